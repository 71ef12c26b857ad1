"""Manipulation operators: DISPLAY, DRILLDOWN, ROLLUP, ROTATE, and BLEND.

Every operator is persistent: it returns a new table and leaves the source
untouched, so sessions can keep history and replay. BLEND recombines values
of two consecutive displayed levels into a synthetic level at query time;
the stored data is never rewritten.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import predicate as P
from .errors import ConstraintViolation, OperatorError, StrictnessError
from .model import Constellation, Measure
from .mtable import (
    AxisSpec,
    BlendParameter,
    BlendProvenance,
    MTable,
    axis_from_hierarchy,
    validate_table,
)

STAMPS = ("+", "-")


@dataclass
class BlendRequest:
    table: MTable
    dimension: str
    p_sup: str
    s_sup: str
    p_inf: str
    s_inf: str
    pred: object

    def blend_name(self) -> str:
        return f"{self.p_sup}_{self.p_inf}"


@dataclass
class Partition:
    e_sup: set
    e_inf: set


def _checked_axis(r: BlendRequest, c: Constellation) -> AxisSpec:
    axis = r.table.axis(r.dimension)
    dim = c.dimension(r.dimension)
    if r.s_sup not in STAMPS or r.s_inf not in STAMPS:
        raise OperatorError(f"stamps must be '+' or '-', got ({r.s_sup!r}, {r.s_inf!r})")
    disp = axis.displayed
    if r.p_sup not in disp or r.p_inf not in disp:
        raise OperatorError(
            f"blend params must be displayed on the {r.dimension} axis "
            f"(displayed: {', '.join(disp)})"
        )
    if disp.index(r.p_inf) != disp.index(r.p_sup) + 1:
        raise OperatorError(
            f"{r.p_sup} and {r.p_inf} are not consecutive displayed params "
            f"with {r.p_sup} immediately coarser"
        )
    bad = sorted(a for a in P.references(r.pred) if not dim.has_attribute(a))
    if bad:
        raise P.PredicateError(f"predicate references unknown attribute {bad[0]!r} on {r.dimension}")
    return axis


def compute_partition(r: BlendRequest, c: Constellation) -> Partition:
    """E_sup: upper values over pred instances; E_inf: lower values over the rest.

    Chained blends are transparent here: when p_sup or p_inf is itself a blend
    level, its per-instance map supplies the values.
    """
    c.require_sealed()
    axis = _checked_axis(r, c)
    dim = c.dimension(r.dimension)
    if not dim.instances:
        raise OperatorError(f"dimension {r.dimension} has no instances to blend")
    e_sup = set()
    e_inf = set()
    for key, row in dim.instances.items():
        if P.evaluate(r.pred, row):
            e_sup.add(axis.level_value(dim, r.p_sup, key))
        else:
            e_inf.add(axis.level_value(dim, r.p_inf, key))
    return Partition(e_sup, e_inf)


def check_valid(part: Partition, r: BlendRequest, c: Constellation) -> list:
    """Disjointness check: returns the offending upper values (empty = ok).

    An upper value offends when it is selected into E_sup while also being the
    parent of some E_inf value, i.e. the predicate split a lower value's
    instances across the two sides.
    """
    if not part.e_inf:
        return []
    axis = r.table.axis(r.dimension)
    dim = c.dimension(r.dimension)
    parents: dict[object, set] = {}
    for key in dim.instances:
        lo = axis.level_value(dim, r.p_inf, key)
        if lo in part.e_inf:
            parents.setdefault(lo, set()).add(axis.level_value(dim, r.p_sup, key))
    parent_values = set()
    for lo, ups in parents.items():
        if len(ups) > 1:
            raise StrictnessError(r.p_inf, r.p_sup, lo, ups)
        parent_values.add(next(iter(ups)))
    return sorted(part.e_sup & parent_values, key=str)


def blend(r: BlendRequest, c: Constellation) -> MTable:
    """Apply the multigradual transformation and return the result table.

    The displayed list is rewritten according to the stamps:
        (-,-)  [.., P, ..]             the new level replaces both
        (+,-)  [.., p_sup, P, ..]      replaces the lower one
        (-,+)  [.., P, p_inf, ..]      replaces the upper one
        (+,+)  [.., p_sup, P, p_inf, ..]  inserted between them
    Levels strictly between the two arguments in the navigation order (and the
    (-)-stamped arguments themselves) stop being drill targets.
    """
    part = compute_partition(r, c)
    offending = check_valid(part, r, c)
    if offending:
        raise ConstraintViolation(offending)

    axis = r.table.axis(r.dimension)
    dim = c.dimension(r.dimension)
    name = r.blend_name()
    if name in axis.order or dim.has_attribute(name):
        raise OperatorError(f"blend level name {name!r} collides with an existing level")

    mapping = {}
    for key, row in dim.instances.items():
        if P.evaluate(r.pred, row):
            mapping[key] = axis.level_value(dim, r.p_sup, key)
        else:
            mapping[key] = axis.level_value(dim, r.p_inf, key)

    new = axis.clone()
    new.blends[name] = BlendParameter(
        name=name,
        domain=frozenset(part.e_sup | part.e_inf),
        map=mapping,
        provenance=BlendProvenance(r.p_sup, r.s_sup, r.p_inf, r.s_inf, r.pred),
    )

    def rewrite(seq: list[str]) -> list[str]:
        i_sup = seq.index(r.p_sup)
        i_inf = seq.index(r.p_inf)
        middle = [r.p_sup] if r.s_sup == "+" else []
        middle.append(name)
        if r.s_inf == "+":
            middle.append(r.p_inf)
        return seq[:i_sup] + middle + seq[i_inf + 1 :]

    new.order = rewrite(new.order)
    new.displayed = rewrite(new.displayed)

    result = r.table.with_axis(new)
    validate_table(result, c)
    return result


def display(
    c: Constellation,
    fact: str,
    measures,
    dim_lines: str,
    hier_lines: str,
    dim_columns: str,
    hier_columns: str,
    params_lines=None,
    params_columns=None,
) -> MTable:
    """Build the initial table; axes start at the coarsest non-All param unless
    explicit starting params are given."""
    c.require_sealed()
    f = c.fact(fact)
    if not measures:
        raise OperatorError("DISPLAY needs at least one measure")
    subject = []
    for agg, mname in measures:
        f.measure(mname)  # must exist on the fact
        subject.append(Measure(mname, agg))
    star = c.star[fact]
    for dname in (dim_lines, dim_columns):
        if dname not in star:
            raise OperatorError(f"dimension {dname} is not linked to fact {fact}")
    if dim_lines == dim_columns:
        raise OperatorError("line and column axes must use different dimensions")
    t = MTable(
        fact=fact,
        measures=subject,
        lines=axis_from_hierarchy(c.dimension(dim_lines), hier_lines, params_lines),
        columns=axis_from_hierarchy(c.dimension(dim_columns), hier_columns, params_columns),
    )
    validate_table(t, c)
    return t


def drilldown(t: MTable, dimension: str, param: str) -> MTable:
    """Extend the axis display down to param (which may skip hierarchy levels)."""
    axis = t.axis(dimension)
    idx = axis.level_index(param)
    finest = axis.level_index(axis.displayed[-1])
    if idx <= finest:
        raise OperatorError(f"{param} is not finer than the displayed {axis.displayed[-1]}")
    new = axis.clone()
    new.displayed = axis.displayed + [param]
    return t.with_axis(new)


def rollup(t: MTable, dimension: str, param: str) -> MTable:
    """Drop displayed params finer than param."""
    axis = t.axis(dimension)
    cut = axis.level_index(param)
    kept = [p for p in axis.displayed if axis.level_index(p) <= cut]
    if not kept:
        raise OperatorError(f"cannot roll above the coarsest displayed param {axis.displayed[0]}")
    new = axis.clone()
    new.displayed = kept
    return t.with_axis(new)


def rotate(t: MTable, dim_old: str, dim_new: str, hierarchy: str, c: Constellation) -> MTable:
    """Swap one axis dimension; the new axis restarts at its coarsest param."""
    axis = t.axis(dim_old)  # raises if dim_old is not on an axis
    other = t.columns if axis is t.lines else t.lines
    if dim_new not in c.star[t.fact]:
        raise OperatorError(f"dimension {dim_new} is not linked to fact {t.fact}")
    if dim_new == other.dimension:
        raise OperatorError(f"dimension {dim_new} is already on the other axis")
    new_axis = axis_from_hierarchy(c.dimension(dim_new), hierarchy)
    if axis is t.lines:
        result = MTable(t.fact, t.measures, new_axis, t.columns.clone(), dict(t.restriction))
    else:
        result = MTable(t.fact, t.measures, t.lines.clone(), new_axis, dict(t.restriction))
    validate_table(result, c)
    return result
