import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { ApiClient } from "../src/api.js";
import { GridDocument, OpDescriptor, SchemaDoc, ServiceError } from "../src/types.js";

const GOLDEN_PATH = fileURLToPath(
  new URL("../../../tests/golden/t3_grid_document.json", import.meta.url)
);

export function goldenT3(): GridDocument {
  return JSON.parse(readFileSync(GOLDEN_PATH, "utf-8")) as GridDocument;
}

/** Minimal document for intermediate steps: enough axis state for the blend
 * form to offer adjacent pairs; cells are not inspected mid-flow. */
export function stubDoc(
  colDisplayed: string[],
  log: OpDescriptor[],
  colOrder?: string[]
): GridDocument {
  return {
    version: 1,
    log,
    table: {
      subject: { fact: "Repartition", measures: [{ fn: "SUM", measure: "Superficie" }] },
      lines: {
        dimension: "Organismes",
        hierarchy: "HORG",
        displayed: ["Variete"],
        order: ["TypeOrganisme", "Categorie", "Variete"],
        available: ["TypeOrganisme", "Categorie"],
      },
      columns: {
        dimension: "Geographies",
        hierarchy: "HGEO",
        displayed: colDisplayed,
        order: colOrder ?? colDisplayed,
        available: [],
      },
      row_headers: [],
      col_headers: [],
      row_tuples: [],
      col_tuples: [],
      measures: ["Superficie"],
      cells: [],
    },
  };
}

export interface FakeStep {
  expectOp?: Partial<Record<string, unknown>>;
  respond: GridDocument | ServiceError;
}

/** Scripted client: each applyOp consumes one step, matching the descriptor
 * against expectations and returning (or throwing) the staged response. */
export class FakeClient implements ApiClient {
  applied: OpDescriptor[] = [];
  private steps: FakeStep[];
  initial: GridDocument;

  constructor(steps: FakeStep[], initial?: GridDocument) {
    this.steps = [...steps];
    this.initial = initial ?? { version: 1, table: null, log: [] };
  }

  async createSession(_dataset: string): Promise<string> {
    return "fake-session";
  }

  async getSchema(_sessionId: string): Promise<SchemaDoc> {
    return {
      constellation: "OGM",
      facts: [
        {
          name: "Repartition",
          measures: [{ name: "Superficie", fn: "SUM" }],
          dimensions: ["Dates", "Organismes", "Geographies"],
        },
      ],
      dimensions: [],
    };
  }

  async getTable(_sessionId: string): Promise<GridDocument> {
    return this.initial;
  }

  async applyOp(_sessionId: string, op: OpDescriptor): Promise<GridDocument> {
    this.applied.push(op);
    const step = this.steps.shift();
    if (!step) throw new Error(`unexpected operation ${JSON.stringify(op)}`);
    if (step.expectOp) {
      for (const [key, want] of Object.entries(step.expectOp)) {
        const got = (op as unknown as Record<string, unknown>)[key];
        if (JSON.stringify(got) !== JSON.stringify(want)) {
          throw new Error(`descriptor mismatch on ${key}: got ${JSON.stringify(got)}, want ${JSON.stringify(want)}`);
        }
      }
    }
    if (step.respond instanceof ServiceError) throw step.respond;
    return step.respond;
  }

  async getSql(_sessionId: string): Promise<string> {
    return "SELECT 1;";
  }
}
