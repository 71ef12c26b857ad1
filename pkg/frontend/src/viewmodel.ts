// UI state machine: session lifecycle, the blend form, history time travel.
// All numbers displayed come from service grid documents; this layer never
// aggregates anything itself.

import { ApiClient } from "./api.js";
import {
  AxisDoc,
  BlendArgs,
  GridDocument,
  OpDescriptor,
  SchemaDoc,
  ServiceError,
  Stamp,
} from "./types.js";

export interface UiError {
  kind: "constraint" | "predicate" | "other";
  message: string;
  offendingValues?: string[];
  column?: number | null;
}

export interface BlendFormState {
  dimension: string;
  pairIndex: number;
  sSup: Stamp;
  sInf: Stamp;
  pred: string;
}

export class ViewModel {
  sessionId: string | null = null;
  schema: SchemaDoc | null = null;
  doc: GridDocument = { version: 1, table: null, log: [] };
  error: UiError | null = null;
  busy = false;
  blendForm: BlendFormState = { dimension: "", pairIndex: 0, sSup: "-", sInf: "-", pred: "" };

  constructor(private client: ApiClient) {}

  async load(dataset: string): Promise<void> {
    this.sessionId = await this.client.createSession(dataset);
    this.schema = await this.client.getSchema(this.sessionId);
    this.doc = await this.client.getTable(this.sessionId);
    this.error = null;
    this.resetBlendForm();
  }

  axes(): AxisDoc[] {
    return this.doc.table ? [this.doc.table.lines, this.doc.table.columns] : [];
  }

  axis(dimension: string): AxisDoc | null {
    return this.axes().find((a) => a.dimension === dimension) ?? null;
  }

  /** Only pairs of consecutive displayed params are blendable. */
  adjacentPairs(dimension: string): [string, string][] {
    const axis = this.axis(dimension);
    if (!axis) return [];
    const pairs: [string, string][] = [];
    for (let i = 0; i + 1 < axis.displayed.length; i++) {
      pairs.push([axis.displayed[i], axis.displayed[i + 1]]);
    }
    return pairs;
  }

  resetBlendForm(): void {
    const first = this.axes().find((a) => a.displayed.length >= 2) ?? this.axes()[0];
    this.blendForm = {
      dimension: first ? first.dimension : "",
      pairIndex: 0,
      sSup: "-",
      sInf: "-",
      pred: "",
    };
  }

  blendDescriptor(): (OpDescriptor & BlendArgs) | null {
    const pairs = this.adjacentPairs(this.blendForm.dimension);
    const pair = pairs[this.blendForm.pairIndex];
    if (!pair || !this.blendForm.pred.trim()) return null;
    return {
      op: "blend",
      dimension: this.blendForm.dimension,
      p_sup: pair[0],
      s_sup: this.blendForm.sSup,
      p_inf: pair[1],
      s_inf: this.blendForm.sInf,
      pred: this.blendForm.pred,
    };
  }

  /** Post one operation; on success the new document becomes current and the
   * operation appears in the history. At most one in-flight operation. */
  async submitOp(op: OpDescriptor): Promise<boolean> {
    if (this.busy || this.sessionId === null) return false;
    this.busy = true;
    this.error = null;
    try {
      this.doc = await this.client.applyOp(this.sessionId, op);
      return true;
    } catch (err) {
      this.error = toUiError(err);
      return false;
    } finally {
      this.busy = false;
    }
  }

  async submitBlend(): Promise<boolean> {
    const descriptor = this.blendDescriptor();
    if (descriptor === null) {
      this.error = { kind: "other", message: "pick an adjacent pair and enter a predicate" };
      return false;
    }
    const ok = await this.submitOp(descriptor);
    if (ok) this.resetBlendForm();
    return ok;
  }

  /** Time travel: undo back to the state right after log[index]. */
  async replayTo(index: number): Promise<boolean> {
    if (this.busy || this.sessionId === null) return false;
    const steps = this.doc.log.length - 1 - index;
    if (steps <= 0) return true;
    this.busy = true;
    this.error = null;
    try {
      for (let i = 0; i < steps; i++) {
        this.doc = await this.client.applyOp(this.sessionId, { op: "undo" });
      }
      return true;
    } catch (err) {
      this.error = toUiError(err);
      return false;
    } finally {
      this.busy = false;
    }
  }

  async fetchSql(): Promise<string> {
    if (this.sessionId === null) throw new Error("no session");
    return this.client.getSql(this.sessionId);
  }
}

export function toUiError(err: unknown): UiError {
  if (err instanceof ServiceError) {
    const violation = err.violation();
    if (violation) {
      return {
        kind: "constraint",
        message: violation.message,
        offendingValues: violation.offending_values,
      };
    }
    const predicate = err.predicateError();
    if (predicate) {
      return { kind: "predicate", message: predicate.message, column: predicate.column };
    }
    return { kind: "other", message: String(err.detail) };
  }
  return { kind: "other", message: err instanceof Error ? err.message : String(err) };
}
