// Pure HTML rendering of grid documents. Kept DOM-free so tests can assert
// on the produced markup directly; main.ts only injects the strings.

import { CellValue, GridDocument, HeaderNode, OpDescriptor, TableDoc } from "./types.js";

export function escapeHtml(value: unknown): string {
  return String(value)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function leafCount(node: HeaderNode): number {
  if (node.children.length === 0) return 1;
  return node.children.reduce((n, child) => n + leafCount(child), 0);
}

function headerRows(nodes: HeaderNode[], depth: number): HeaderNode[][] {
  // nodes grouped per level, preserving left-to-right order
  const rows: HeaderNode[][] = Array.from({ length: depth }, () => []);
  const walk = (level: HeaderNode[], d: number) => {
    for (const node of level) {
      rows[d].push(node);
      walk(node.children, d + 1);
    }
  };
  walk(nodes, 0);
  return rows;
}

export function renderTable(table: TableDoc): string {
  const nLineLevels = table.lines.displayed.length;
  const nColLevels = table.columns.displayed.length;
  const nMeasures = table.measures.length;
  const parts: string[] = ['<table class="grid">', "<thead>"];

  const colRows = headerRows(table.col_headers, nColLevels);
  colRows.forEach((nodes, depth) => {
    parts.push("<tr>");
    if (depth === 0) {
      parts.push(
        `<th class="corner" colspan="${nLineLevels}" rowspan="${nColLevels}">` +
          `${escapeHtml(table.subject.fact)}</th>`
      );
    }
    parts.push(`<th class="level-name">${escapeHtml(table.columns.displayed[depth])}</th>`);
    for (const node of nodes) {
      const span = leafCount(node) * nMeasures;
      const rowspan = node.children.length === 0 ? nColLevels - depth : 1;
      parts.push(
        `<th class="col-header" colspan="${span}"` +
          (rowspan > 1 ? ` rowspan="${rowspan}"` : "") +
          `>${escapeHtml(node.value)}</th>`
      );
    }
    parts.push("</tr>");
  });

  parts.push("<tr>");
  for (const level of table.lines.displayed) {
    parts.push(`<th class="line-level">${escapeHtml(level)}</th>`);
  }
  parts.push('<th class="level-name"></th>');
  for (let c = 0; c < table.col_tuples.length; c++) {
    for (const m of table.measures) {
      parts.push(`<th class="measure">${nMeasures > 1 ? escapeHtml(m) : ""}</th>`);
    }
  }
  parts.push("</tr></thead><tbody>");

  table.row_tuples.forEach((tuple, r) => {
    parts.push("<tr>");
    for (let level = 0; level < tuple.length; level++) {
      if (r > 0 && prefixEqual(tuple, table.row_tuples[r - 1], level + 1)) continue;
      let span = 1;
      while (r + span < table.row_tuples.length && prefixEqual(tuple, table.row_tuples[r + span], level + 1)) {
        span += 1;
      }
      parts.push(
        `<th class="row-header"${span > 1 ? ` rowspan="${span}"` : ""}>` +
          `${escapeHtml(tuple[level])}</th>`
      );
    }
    parts.push('<td class="level-name"></td>');
    table.cells[r].forEach((cell) => {
      for (const m of table.measures) {
        const value = cell === null ? "" : formatValue(cell[m]);
        parts.push(`<td class="cell${cell === null ? " empty" : ""}">${escapeHtml(value)}</td>`);
      }
    });
    parts.push("</tr>");
  });
  parts.push("</tbody></table>");
  return parts.join("");
}

function prefixEqual(a: CellValue[], b: CellValue[], length: number): boolean {
  for (let i = 0; i < length; i++) {
    if (a[i] !== b[i]) return false;
  }
  return true;
}

export function formatValue(v: CellValue): string {
  return typeof v === "number" ? String(v) : v;
}

export function describeOp(op: OpDescriptor): string {
  switch (op.op) {
    case "display":
      return `DISPLAY ${op.fact} ${op.measures.map((m) => `${m.fn}(${m.measure})`).join(",")}`;
    case "drilldown":
      return `DRILLDOWN ${op.dimension} ${op.param}`;
    case "rollup":
      return `ROLLUP ${op.dimension} ${op.param}`;
    case "rotate":
      return `ROTATE ${op.dim_old} ${op.dim_new} ${op.hierarchy}`;
    case "blend":
      return `BLEND ${op.dimension} ${op.p_sup}(${op.s_sup}) ${op.p_inf}(${op.s_inf}) WHERE ${op.pred}`;
    case "undo":
      return "UNDO";
  }
}

export function renderHistory(doc: GridDocument, activeIndex: number): string {
  if (doc.log.length === 0) return '<p class="muted">no operations yet</p>';
  const items = doc.log.map((op, i) => {
    const cls = i === activeIndex ? "history-item active" : "history-item";
    return (
      `<li class="${cls}"><button data-replay="${i}">${escapeHtml(describeOp(op))}</button></li>`
    );
  });
  return `<ol class="history">${items.join("")}</ol>`;
}
