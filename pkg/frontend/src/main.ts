// DOM glue: wires the view model to the page. Logic lives in viewmodel.ts
// and render.ts; this file only reads inputs and injects rendered HTML.

import { HttpClient } from "./api.js";
import { escapeHtml, renderHistory, renderTable } from "./render.js";
import { OpDescriptor, Stamp } from "./types.js";
import { ViewModel } from "./viewmodel.js";

const vm = new ViewModel(new HttpClient(""));

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

function redraw(): void {
  const table = vm.doc.table;
  $("grid").innerHTML = table
    ? renderTable(table)
    : '<p class="muted">no table yet: choose axes and display</p>';
  $("history").innerHTML = renderHistory(vm.doc, vm.doc.log.length - 1);
  drawAxisPanels();
  drawBlendForm();
  drawError();
  ($("submit-blend") as HTMLButtonElement).disabled = vm.busy;
}

function drawError(): void {
  const box = $("error");
  if (!vm.error) {
    box.innerHTML = "";
    box.className = "";
    return;
  }
  box.className = "error-box";
  let text = escapeHtml(vm.error.message);
  if (vm.error.kind === "constraint" && vm.error.offendingValues) {
    text += `<br>offending values: <strong>${vm.error.offendingValues.map(escapeHtml).join(", ")}</strong>`;
  }
  if (vm.error.kind === "predicate" && vm.error.column != null) {
    const pred = (document.getElementById("blend-pred") as HTMLInputElement).value;
    text += `<br><code>${escapeHtml(pred)}</code><br><code>${"&nbsp;".repeat(Math.max(0, vm.error.column - 1))}^</code>`;
  }
  box.innerHTML = text;
}

function drawAxisPanels(): void {
  const panel = $("axes");
  const parts: string[] = [];
  for (const axis of vm.axes()) {
    parts.push(`<div class="axis"><h3>${escapeHtml(axis.dimension)} / ${escapeHtml(axis.hierarchy)}</h3>`);
    parts.push(`<p>displayed: ${axis.displayed.map(escapeHtml).join(" &rsaquo; ")}</p>`);
    const drills = axis.available
      .map(
        (p) =>
          `<button data-op="drilldown" data-dim="${escapeHtml(axis.dimension)}" data-param="${escapeHtml(p)}">+ ${escapeHtml(p)}</button>`
      )
      .join(" ");
    const rolls = axis.displayed
      .map(
        (p) =>
          `<button data-op="rollup" data-dim="${escapeHtml(axis.dimension)}" data-param="${escapeHtml(p)}">&uarr; ${escapeHtml(p)}</button>`
      )
      .join(" ");
    parts.push(`<p>drill: ${drills || "-"}</p><p>roll to: ${rolls}</p></div>`);
  }
  panel.innerHTML = parts.join("");
}

function drawBlendForm(): void {
  const dimSelect = $("blend-dim") as HTMLSelectElement;
  dimSelect.innerHTML = vm
    .axes()
    .map((a) => `<option${a.dimension === vm.blendForm.dimension ? " selected" : ""}>${escapeHtml(a.dimension)}</option>`)
    .join("");
  const pairSelect = $("blend-pair") as HTMLSelectElement;
  const pairs = vm.adjacentPairs(vm.blendForm.dimension);
  pairSelect.innerHTML = pairs
    .map(
      (pair, i) =>
        `<option value="${i}"${i === vm.blendForm.pairIndex ? " selected" : ""}>${escapeHtml(pair[0])} / ${escapeHtml(pair[1])}</option>`
    )
    .join("");
  pairSelect.disabled = pairs.length === 0;
  const pair = pairs[vm.blendForm.pairIndex];
  $("stamp-sup-label").textContent = pair ? pair[0] : "upper";
  $("stamp-inf-label").textContent = pair ? pair[1] : "lower";
  ($("stamp-sup") as HTMLInputElement).checked = vm.blendForm.sSup === "+";
  ($("stamp-inf") as HTMLInputElement).checked = vm.blendForm.sInf === "+";
}

async function boot(): Promise<void> {
  await vm.load("sample");
  const schema = vm.schema!;
  const fact = schema.facts[0];
  const [lines, columns] = [fact.dimensions[1] ?? fact.dimensions[0], fact.dimensions[2] ?? fact.dimensions[0]];
  const hierOf = (dim: string) => schema.dimensions.find((d) => d.name === dim)!.hierarchies[0].name;
  const display: OpDescriptor = {
    op: "display",
    fact: fact.name,
    measures: [{ fn: fact.measures[0].fn, measure: fact.measures[0].name }],
    lines: { dimension: lines, hierarchy: hierOf(lines) },
    columns: { dimension: columns, hierarchy: hierOf(columns) },
  };
  await vm.submitOp(display);
  vm.resetBlendForm();
  redraw();
}

function wire(): void {
  $("axes").addEventListener("click", async (event) => {
    const target = event.target as HTMLElement;
    const op = target.dataset.op;
    if (op !== "drilldown" && op !== "rollup") return;
    await vm.submitOp({ op, dimension: target.dataset.dim!, param: target.dataset.param! });
    redraw();
  });

  $("history").addEventListener("click", async (event) => {
    const target = event.target as HTMLElement;
    if (target.dataset.replay === undefined) return;
    await vm.replayTo(Number(target.dataset.replay));
    redraw();
  });

  ($("blend-dim") as HTMLSelectElement).addEventListener("change", (event) => {
    vm.blendForm.dimension = (event.target as HTMLSelectElement).value;
    vm.blendForm.pairIndex = 0;
    redraw();
  });
  ($("blend-pair") as HTMLSelectElement).addEventListener("change", (event) => {
    vm.blendForm.pairIndex = Number((event.target as HTMLSelectElement).value);
    redraw();
  });
  ($("stamp-sup") as HTMLInputElement).addEventListener("change", (event) => {
    vm.blendForm.sSup = ((event.target as HTMLInputElement).checked ? "+" : "-") as Stamp;
  });
  ($("stamp-inf") as HTMLInputElement).addEventListener("change", (event) => {
    vm.blendForm.sInf = ((event.target as HTMLInputElement).checked ? "+" : "-") as Stamp;
  });
  ($("blend-pred") as HTMLInputElement).addEventListener("input", (event) => {
    vm.blendForm.pred = (event.target as HTMLInputElement).value;
  });

  $("submit-blend").addEventListener("click", async () => {
    await vm.submitBlend();
    redraw();
  });

  $("undo").addEventListener("click", async () => {
    await vm.submitOp({ op: "undo" });
    redraw();
  });

  $("show-sql").addEventListener("click", async () => {
    try {
      $("sql").textContent = await vm.fetchSql();
    } catch (err) {
      $("sql").textContent = String(err);
    }
  });
}

if (typeof document !== "undefined") {
  wire();
  boot().catch((err) => {
    $("error").className = "error-box";
    $("error").textContent = String(err);
  });
}
