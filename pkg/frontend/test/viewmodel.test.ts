import assert from "node:assert/strict";
import { test } from "node:test";

import { renderTable } from "../src/render.js";
import { ServiceError } from "../src/types.js";
import { ViewModel } from "../src/viewmodel.js";
import { FakeClient, goldenT3, stubDoc } from "./helpers.js";

const DISPLAY = {
  op: "display" as const,
  fact: "Repartition",
  measures: [{ fn: "SUM", measure: "Superficie" }],
  lines: { dimension: "Organismes", hierarchy: "HORG", params: ["Variete"] },
  columns: { dimension: "Geographies", hierarchy: "HGEO", params: ["Continent", "Pays", "Etat"] },
};

function twoStepBlendSteps() {
  const afterDisplay = stubDoc(["Continent", "Pays", "Etat"], [DISPLAY]);
  const afterBlend1 = stubDoc(
    ["Continent", "Pays_Etat"],
    [...afterDisplay.log, {
      op: "blend", dimension: "Geographies",
      p_sup: "Pays", s_sup: "-", p_inf: "Etat", s_inf: "-",
      pred: "Pays <> 'Etats-Unis'",
    }],
    ["Continent", "Pays_Etat", "Parcelle"]
  );
  return { afterDisplay, afterBlend1, final: goldenT3() };
}

test("the worked two-step blend through the submit path ends at the golden grid", async () => {
  const { afterDisplay, afterBlend1, final } = twoStepBlendSteps();
  const client = new FakeClient([
    { expectOp: { op: "display" }, respond: afterDisplay },
    {
      expectOp: {
        op: "blend", dimension: "Geographies",
        p_sup: "Pays", s_sup: "-", p_inf: "Etat", s_inf: "-",
        pred: "Pays <> 'Etats-Unis'",
      },
      respond: afterBlend1,
    },
    {
      expectOp: {
        op: "blend", dimension: "Geographies",
        p_sup: "Continent", s_sup: "-", p_inf: "Pays_Etat", s_inf: "-",
        pred: "Continent = 'Asie'",
      },
      respond: final,
    },
  ]);
  const vm = new ViewModel(client);
  await vm.load("sample");
  assert.ok(await vm.submitOp(DISPLAY));

  // first blend: the form offers adjacent displayed pairs only
  vm.blendForm.dimension = "Geographies";
  assert.deepEqual(vm.adjacentPairs("Geographies"), [
    ["Continent", "Pays"],
    ["Pays", "Etat"],
  ]);
  vm.blendForm.pairIndex = 1;
  vm.blendForm.pred = "Pays <> 'Etats-Unis'";
  assert.equal(vm.blendForm.sSup, "-");
  assert.equal(vm.blendForm.sInf, "-");
  assert.ok(await vm.submitBlend());

  // second blend consumes the level the first one created
  vm.blendForm.dimension = "Geographies";
  assert.deepEqual(vm.adjacentPairs("Geographies"), [["Continent", "Pays_Etat"]]);
  vm.blendForm.pairIndex = 0;
  vm.blendForm.pred = "Continent = 'Asie'";
  assert.ok(await vm.submitBlend());

  // the rendered grid equals the golden document's cells, value for value
  assert.deepEqual(vm.doc, goldenT3());
  const html = renderTable(vm.doc.table!);
  for (const want of ["500", "400", "1500", "2500", "1700", "1800", "250"]) {
    assert.ok(html.includes(`>${want}</td>`), `cell ${want} missing`);
  }
  assert.ok(html.includes('<td class="cell empty"></td>'), "the EMPTY cell is blank");
  assert.equal(vm.error, null);
  assert.equal(vm.doc.log.length, 3);
});

test("a constraint violation surfaces the offending values inline", async () => {
  const { afterDisplay } = twoStepBlendSteps();
  const client = new FakeClient([
    { respond: afterDisplay },
    {
      respond: new ServiceError(422, {
        message: "blend predicate invalid: upper-set values also parent the lower set: Etats-Unis",
        offending_values: ["Etats-Unis"],
      }),
    },
  ]);
  const vm = new ViewModel(client);
  await vm.load("sample");
  await vm.submitOp(DISPLAY);

  vm.blendForm.dimension = "Geographies";
  vm.blendForm.pairIndex = 1; // Pays / Etat
  vm.blendForm.pred = "Etat = 'Iowa'";
  const ok = await vm.submitBlend();

  assert.equal(ok, false);
  assert.ok(vm.error);
  assert.equal(vm.error!.kind, "constraint");
  assert.deepEqual(vm.error!.offendingValues, ["Etats-Unis"]);
  // the failed operation is not in the history and the table is unchanged
  assert.equal(vm.doc.log.length, 1);
});

test("predicate parse errors carry the column for the caret", async () => {
  const { afterDisplay } = twoStepBlendSteps();
  const client = new FakeClient([
    { respond: afterDisplay },
    { respond: new ServiceError(400, { message: "expected a literal (column 8)", column: 8 }) },
  ]);
  const vm = new ViewModel(client);
  await vm.load("sample");
  await vm.submitOp(DISPLAY);
  vm.blendForm.dimension = "Geographies";
  vm.blendForm.pairIndex = 1;
  vm.blendForm.pred = "Pays <>";
  await vm.submitBlend();
  assert.equal(vm.error!.kind, "predicate");
  assert.equal(vm.error!.column, 8);
});

test("the blend form cannot submit without a pair or predicate", async () => {
  const client = new FakeClient([]);
  const vm = new ViewModel(client);
  await vm.load("sample"); // no table yet: no axes, no pairs
  assert.equal(vm.blendDescriptor(), null);
  const ok = await vm.submitBlend();
  assert.equal(ok, false);
  assert.ok(vm.error);
  assert.equal(client.applied.length, 0, "nothing was posted");
});

test("replayTo walks history back through undo", async () => {
  const { afterDisplay, afterBlend1 } = twoStepBlendSteps();
  const client = new FakeClient([
    { respond: afterDisplay },
    { respond: afterBlend1 },
    { expectOp: { op: "undo" }, respond: afterDisplay },
  ]);
  const vm = new ViewModel(client);
  await vm.load("sample");
  await vm.submitOp(DISPLAY);
  await vm.submitOp(afterBlend1.log[1]);
  assert.equal(vm.doc.log.length, 2);

  assert.ok(await vm.replayTo(0));
  assert.equal(vm.doc.log.length, 1);
  assert.deepEqual(client.applied[client.applied.length - 1], { op: "undo" });
});

test("only one operation is in flight at a time", async () => {
  const { afterDisplay } = twoStepBlendSteps();
  const client = new FakeClient([{ respond: afterDisplay }]);
  const vm = new ViewModel(client);
  await vm.load("sample");
  const first = vm.submitOp(DISPLAY);
  const second = await vm.submitOp({ op: "undo" }); // rejected: busy
  assert.equal(second, false);
  assert.ok(await first);
  assert.equal(client.applied.length, 1);
});

test("empty history renders the post-display state only", async () => {
  const { afterDisplay } = twoStepBlendSteps();
  const client = new FakeClient([{ respond: afterDisplay }]);
  const vm = new ViewModel(client);
  await vm.load("sample");
  assert.equal(vm.doc.table, null);
  assert.equal(vm.doc.log.length, 0);
  await vm.submitOp(DISPLAY);
  assert.equal(vm.doc.log.length, 1);
  assert.deepEqual(vm.doc.table!.columns.displayed, ["Continent", "Pays", "Etat"]);
});
