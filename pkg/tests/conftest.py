"""Shared fixtures: the bundled sample star and an independent aggregation oracle."""

from __future__ import annotations

from decimal import Decimal

import pytest

import blendcube as bc

GOLDEN_DIR = "tests/golden"


@pytest.fixture(scope="session")
def sample():
    return bc.build_sample_constellation()


def make_t2(c):
    """The canonical analysis table: varieties against continent/country/state."""
    return bc.display(
        c,
        "Repartition",
        [("SUM", "Superficie")],
        "Organismes",
        "HORG",
        "Geographies",
        "HGEO",
        params_lines=["Variete"],
        params_columns=["Continent", "Pays", "Etat"],
    )


@pytest.fixture()
def t2(sample):
    return make_t2(sample)


def brute_force(c, fact_name, measure_aggs, line_key, col_key, keep=None):
    """Single-pass filter-and-sum over raw fact instances.

    Deliberately independent of the evaluation pipeline: no MTable, no axis
    machinery, just dict lookups. line_key/col_key map a fact instance's refs
    to header tuples; keep filters instances.
    """
    f = c.facts[fact_name]
    bags: dict[tuple, dict[str, list[Decimal]]] = {}
    for _key, refs, values in f.instances:
        if keep is not None and not keep(refs):
            continue
        cell = (line_key(refs), col_key(refs))
        bag = bags.setdefault(cell, {})
        for _agg, m in measure_aggs:
            bag.setdefault(m, []).append(values[m])
    out = {}
    for cell, per_measure in bags.items():
        agg_values = {}
        for agg, m in measure_aggs:
            vals = per_measure[m]
            if agg == "SUM":
                agg_values[m] = sum(vals, Decimal(0))
            elif agg == "COUNT":
                agg_values[m] = Decimal(len(vals))
            elif agg == "MIN":
                agg_values[m] = min(vals)
            elif agg == "MAX":
                agg_values[m] = max(vals)
            elif agg == "AVG":
                agg_values[m] = sum(vals, Decimal(0)) / Decimal(len(vals))
        out[cell] = agg_values
    return out


def geo_attr(c, attr):
    """refs -> attribute value of the linked geography instance."""
    geo = c.dimensions["Geographies"]

    def key(refs):
        return geo.instances[refs["Geographies"]][attr]

    return key


def org_attr(c, attr):
    org = c.dimensions["Organismes"]

    def key(refs):
        return org.instances[refs["Organismes"]][attr]

    return key
