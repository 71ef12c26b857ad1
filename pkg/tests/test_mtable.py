import time
from decimal import Decimal
from pathlib import Path

import pytest

import blendcube as bc
from blendcube.errors import OperatorError
from blendcube.model import Measure
from blendcube.mtable import EMPTY, MTable, axis_from_hierarchy, evaluate, render_text, validate_table
from blendcube.predicate import parse_predicate

from conftest import brute_force, geo_attr, org_attr

GOLDEN = Path(__file__).resolve().parent / "golden"

# Reference state-level surface table (variety rows, state columns); pairs
# absent here must evaluate to EMPTY, never zero.
T2_REFERENCE = {
    "GTS-Soja": {"Golap": 400, "Iowa": 1500, "Minnesota": 2500, "Penjab": 300, "Rajasthan": 200},
    "Mais Doux": {"Golap": 300, "Minnesota": 500, "Maharashtra": 300, "Penjab": 1300, "Rajasthan": 800},
    "MaisBT176": {"Golap": 200, "Minnesota": 1500, "Maharashtra": 200, "Penjab": 900, "Rajasthan": 600},
    "MCN810": {"Golap": 200, "Iowa": 800, "Minnesota": 3000, "Maharashtra": 800, "Penjab": 800, "Rajasthan": 400},
    "Soja#8": {"Golap": 500, "Iowa": 200, "Minnesota": 250, "Maharashtra": 1000, "Penjab": 700, "Rajasthan": 100},
}
ALL_STATES = ["Golap", "Iowa", "Minnesota", "Maharashtra", "Penjab", "Rajasthan"]


def cell_by_leaves(grid, variete, etat):
    rows = [rt for rt in grid.row_tuples if rt[-1] == variete]
    cols = [ct for ct in grid.col_tuples if ct[-1] == etat]
    assert len(rows) == 1 and len(cols) == 1
    return grid.value(rows[0], cols[0])


def test_t2_cells_match_reference(sample, t2):
    grid = evaluate(t2, sample)
    for variete, per_state in T2_REFERENCE.items():
        for etat in ALL_STATES:
            got = cell_by_leaves(grid, variete, etat)
            want = per_state.get(etat)
            if want is None:
                assert got is EMPTY, (variete, etat)
            else:
                assert got == Decimal(want), (variete, etat)


def test_t2_column_headers_are_hierarchy_consistent(sample, t2):
    geo = sample.dimensions["Geographies"]
    h = geo.hierarchies["HGEO"]
    grid = evaluate(t2, sample)
    for continent, pays, etat in grid.col_tuples:
        assert bc.parent_of(geo, h, "Etat", "Pays", etat) == pays
        assert bc.parent_of(geo, h, "Pays", "Continent", pays) == continent


def test_any_cell_equals_brute_force_oracle(sample, t2):
    grid = evaluate(t2, sample)
    oracle = brute_force(
        sample,
        "Repartition",
        [("SUM", "Superficie")],
        lambda refs: (org_attr(sample, "Variete")(refs),),
        lambda refs: (
            geo_attr(sample, "Continent")(refs),
            geo_attr(sample, "Pays")(refs),
            geo_attr(sample, "Etat")(refs),
        ),
    )
    assert set(oracle) == set(grid.cells)
    for cell, values in oracle.items():
        assert grid.cells[cell]["Superficie"] == values["Superficie"]


def test_restriction_filters_instances(sample, t2):
    t = MTable(
        t2.fact,
        t2.measures,
        t2.lines.clone(),
        t2.columns.clone(),
        {"Dates": parse_predicate("MoisN = '2008-01'")},
    )
    grid = evaluate(t, sample)
    dates = sample.dimensions["Dates"]
    oracle = brute_force(
        sample,
        "Repartition",
        [("SUM", "Superficie")],
        lambda refs: (org_attr(sample, "Variete")(refs),),
        lambda refs: (
            geo_attr(sample, "Continent")(refs),
            geo_attr(sample, "Pays")(refs),
            geo_attr(sample, "Etat")(refs),
        ),
        keep=lambda refs: dates.instances[refs["Dates"]]["MoisN"] == "2008-01",
    )
    assert set(oracle) == set(grid.cells)
    for cell, values in oracle.items():
        assert grid.cells[cell]["Superficie"] == values["Superficie"]


def test_zero_instance_fact_renders_skeleton():
    c = bc.Constellation("X")
    d1 = bc.Dimension("A", [bc.Attribute("Id1")], "Id1", [bc.Hierarchy("H", ["Id1", "All"])])
    d2 = bc.Dimension("B", [bc.Attribute("Id2")], "Id2", [bc.Hierarchy("H", ["Id2", "All"])])
    d1.add_instance(1, {"Id1": "x"})
    d2.add_instance(1, {"Id2": "y"})
    c.add_dimension(d1)
    c.add_dimension(d2)
    c.add_fact(bc.Fact("F", [("M", "SUM")]), ["A", "B"])
    c.seal()
    t = MTable("F", [Measure("M", "SUM")], axis_from_hierarchy(d1, "H"), axis_from_hierarchy(d2, "H"))
    grid = evaluate(t, c)
    assert grid.row_tuples == [] and grid.col_tuples == [] and grid.cells == {}
    text = render_text(grid)
    assert "Id1" in text and "Id2" in text and "x" not in text


def test_sum_conservation_t2_vs_t3(sample, t2):
    from blendcube.algebra import BlendRequest, blend

    g2 = evaluate(t2, sample)
    gts_row = [rt for rt in g2.row_tuples if rt[-1] == "GTS-Soja"][0]
    t2_total = sum(
        g2.value(gts_row, ct) for ct in g2.col_tuples if g2.value(gts_row, ct) is not EMPTY
    )
    assert t2_total == Decimal(4900)  # 400+1500+2500+300+200

    ti = blend(
        BlendRequest(t2, "Geographies", "Pays", "-", "Etat", "-", parse_predicate("Pays <> 'Etats-Unis'")),
        sample,
    )
    t3 = blend(
        BlendRequest(ti, "Geographies", "Continent", "-", "Pays_Etat", "-", parse_predicate("Continent = 'Asie'")),
        sample,
    )
    g3 = evaluate(t3, sample)
    gts_row3 = [rt for rt in g3.row_tuples if rt[-1] == "GTS-Soja"][0]
    t3_total = sum(
        g3.value(gts_row3, ct) for ct in g3.col_tuples if g3.value(gts_row3, ct) is not EMPTY
    )
    assert t3_total == Decimal(4900)  # 500+400+1500+2500
    assert g2.grand_total() == g3.grand_total()


def test_count_conservation(sample):
    t = bc.display(
        sample,
        "Repartition",
        [("COUNT", "Superficie")],
        "Organismes",
        "HORG",
        "Geographies",
        "HGEO",
    )
    grid = evaluate(t, sample)
    assert grid.grand_total() == Decimal(len(sample.facts["Repartition"].instances))


def test_avg_recomputes_from_instances(sample):
    # average over a coarse level equals mean of raw values, not mean of means
    t = bc.display(
        sample,
        "Repartition",
        [("AVG", "Superficie")],
        "Organismes",
        "HORG",
        "Geographies",
        "HGEO",
        params_lines=["Variete"],
        params_columns=["Pays"],
    )
    grid = evaluate(t, sample)
    oracle = brute_force(
        sample,
        "Repartition",
        [("AVG", "Superficie")],
        lambda refs: (org_attr(sample, "Variete")(refs),),
        lambda refs: (geo_attr(sample, "Pays")(refs),),
    )
    for cell, values in oracle.items():
        assert grid.cells[cell]["Superficie"] == values["Superficie"]


def test_render_t3_leaves_in_lexicographic_order(sample, t2):
    from blendcube.algebra import BlendRequest, blend

    ti = blend(
        BlendRequest(t2, "Geographies", "Pays", "-", "Etat", "-", parse_predicate("Pays <> 'Etats-Unis'")),
        sample,
    )
    t3 = blend(
        BlendRequest(ti, "Geographies", "Continent", "-", "Pays_Etat", "-", parse_predicate("Continent = 'Asie'")),
        sample,
    )
    grid = evaluate(t3, sample)
    assert grid.col_tuples == [("Asie",), ("Bresil",), ("Iowa",), ("Minnesota",)]
    text = render_text(grid)
    header = next(line for line in text.splitlines() if "Asie" in line)
    assert header.index("Asie") < header.index("Bresil") < header.index("Iowa") < header.index("Minnesota")


def test_render_2x2_golden(sample):
    t = bc.display(
        sample,
        "Repartition",
        [("SUM", "Superficie")],
        "Organismes",
        "HORG",
        "Geographies",
        "HGEO",
        params_lines=["TypeOrganisme"],
        params_columns=["Continent"],
    )
    text = render_text(evaluate(t, sample))
    golden = (GOLDEN / "render_2x2.txt").read_text(encoding="utf-8")
    assert text == golden


def test_render_widths_fit_longest_cell(sample, t2):
    text = render_text(evaluate(t2, sample))
    lines = [l for l in text.splitlines()[1:] if l]
    assert len({len(l.rstrip()) for l in lines}) >= 1
    # every row aligns on the same column grid: positions of 'Minnesota' column
    header = next(l for l in lines if "Minnesota" in l)
    col = header.index("Minnesota")
    data = next(l for l in lines if l.startswith("GTS-Soja"))
    assert data[col : col + 9].strip() == "2500"[:4] or "2500" in data


def test_validate_table_rejects_same_dimension_twice(sample):
    geo = sample.dimensions["Geographies"]
    t = MTable(
        "Repartition",
        [Measure("Superficie", "SUM")],
        axis_from_hierarchy(geo, "HGEO"),
        axis_from_hierarchy(geo, "HGEO"),
    )
    with pytest.raises(OperatorError, match="different dimensions"):
        validate_table(t, sample)


def test_validate_table_rejects_out_of_order_display(sample):
    geo = sample.dimensions["Geographies"]
    axis = axis_from_hierarchy(geo, "HGEO", ["Etat", "Continent"])
    orgs = sample.dimensions["Organismes"]
    t = MTable(
        "Repartition",
        [Measure("Superficie", "SUM")],
        axis_from_hierarchy(orgs, "HORG"),
        axis,
    )
    with pytest.raises(OperatorError, match="coarse-to-fine"):
        validate_table(t, sample)


def test_unsealed_constellation_rejected():
    c = bc.Constellation("X")
    with pytest.raises(OperatorError, match="not sealed"):
        c.require_sealed()


def test_t2_evaluates_quickly(sample, t2):
    start = time.perf_counter()
    evaluate(t2, sample)
    assert time.perf_counter() - start < 1.0
