// Wire types for the analysis service (grid document version 1).

export type CellValue = number | string;

export interface HeaderNode {
  value: CellValue;
  children: HeaderNode[];
}

export interface MeasureRef {
  fn: string;
  measure: string;
}

export interface AxisDoc {
  dimension: string;
  hierarchy: string;
  displayed: string[];
  order: string[];
  available: string[];
}

export interface TableDoc {
  subject: { fact: string; measures: MeasureRef[] };
  lines: AxisDoc;
  columns: AxisDoc;
  row_headers: HeaderNode[];
  col_headers: HeaderNode[];
  row_tuples: CellValue[][];
  col_tuples: CellValue[][];
  measures: string[];
  cells: (Record<string, CellValue> | null)[][];
}

export interface GridDocument {
  version: number;
  table: TableDoc | null;
  log: OpDescriptor[];
}

export type Stamp = "+" | "-";

export interface BlendArgs {
  dimension: string;
  p_sup: string;
  s_sup: Stamp;
  p_inf: string;
  s_inf: Stamp;
  pred: string;
}

export interface AxisSpecArgs {
  dimension: string;
  hierarchy: string;
  params?: string[];
}

export type OpDescriptor =
  | ({ op: "display"; fact: string; measures: MeasureRef[]; lines: AxisSpecArgs; columns: AxisSpecArgs })
  | ({ op: "drilldown"; dimension: string; param: string })
  | ({ op: "rollup"; dimension: string; param: string })
  | ({ op: "rotate"; dim_old: string; dim_new: string; hierarchy: string })
  | ({ op: "blend" } & BlendArgs)
  | { op: "undo" };

export interface SchemaDoc {
  constellation: string;
  facts: { name: string; measures: { name: string; fn: string }[]; dimensions: string[] }[];
  dimensions: {
    name: string;
    attributes: { name: string; type: string }[];
    hierarchies: { name: string; params: string[] }[];
  }[];
}

export interface ConstraintViolationDetail {
  message: string;
  offending_values: string[];
}

export interface PredicateErrorDetail {
  message: string;
  column: number | null;
}

export class ServiceError extends Error {
  status: number;
  detail: unknown;

  constructor(status: number, detail: unknown) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
    this.status = status;
    this.detail = detail;
  }

  violation(): ConstraintViolationDetail | null {
    if (this.status === 422 && this.detail && typeof this.detail === "object") {
      const d = this.detail as ConstraintViolationDetail;
      if (Array.isArray(d.offending_values)) return d;
    }
    return null;
  }

  predicateError(): PredicateErrorDetail | null {
    if (this.status === 400 && this.detail && typeof this.detail === "object") {
      const d = this.detail as PredicateErrorDetail;
      if (typeof d.message === "string") return d;
    }
    return null;
  }
}
