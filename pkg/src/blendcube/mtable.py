"""The multidimensional table: a two-axis slice of a fact, and its grid.

A table is a value object (subject, line axis, column axis, restriction).
Evaluation recomputes the grid from fact instances every time; nothing is
cached or maintained incrementally.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import Decimal

from . import predicate as P
from .errors import DataError, OperatorError
from .model import ALL, Constellation, Dimension, Measure
from .values import format_value, sort_key

EMPTY = None  # a cell with no contributing fact instance


@dataclass(frozen=True)
class BlendProvenance:
    p_sup: str
    s_sup: str
    p_inf: str
    s_inf: str
    pred: object


@dataclass
class BlendParameter:
    """A synthetic level: recombined upper/lower values with per-instance mapping."""

    name: str
    domain: frozenset
    map: dict  # dimension instance key -> value
    provenance: BlendProvenance


@dataclass
class AxisSpec:
    """One axis of a table: a hierarchy plus the displayed level names.

    `order` is the full navigation path (coarsest first, All excluded); it
    starts as the reversed hierarchy params and gets rewritten by blends.
    `displayed` is always a subsequence of `order`.
    """

    dimension: str
    hierarchy: str
    displayed: list[str]
    order: list[str]
    blends: dict[str, BlendParameter] = field(default_factory=dict)

    def clone(self) -> "AxisSpec":
        return AxisSpec(
            self.dimension,
            self.hierarchy,
            list(self.displayed),
            list(self.order),
            dict(self.blends),
        )

    def is_level(self, name: str) -> bool:
        return name in self.order

    def level_index(self, name: str) -> int:
        try:
            return self.order.index(name)
        except ValueError:
            raise OperatorError(
                f"{name!r} is not a level of the {self.dimension} axis"
            ) from None

    def level_value(self, dim: Dimension, level: str, key):
        """Value of one displayed level for one dimension instance."""
        blend = self.blends.get(level)
        if blend is not None:
            try:
                return blend.map[key]
            except KeyError:
                raise DataError(f"blend level {level} has no value for instance {key!r}") from None
        return dim.value(key, level)


def axis_from_hierarchy(dim: Dimension, hierarchy: str, displayed=None) -> AxisSpec:
    h = dim.hierarchies.get(hierarchy)
    if h is None:
        raise OperatorError(f"dimension {dim.name} has no hierarchy {hierarchy!r}")
    order = [p for p in reversed(h.params) if p != ALL]
    if displayed is None:
        displayed = [order[0]]
    return AxisSpec(dim.name, hierarchy, list(displayed), order)


@dataclass
class MTable:
    fact: str
    measures: list[Measure]
    lines: AxisSpec
    columns: AxisSpec
    restriction: dict[str, object] = field(default_factory=dict)  # dim -> predicate

    def axis(self, dimension: str) -> AxisSpec:
        if self.lines.dimension == dimension:
            return self.lines
        if self.columns.dimension == dimension:
            return self.columns
        raise OperatorError(f"dimension {dimension!r} is not on an axis of this table")

    def with_axis(self, axis: AxisSpec) -> "MTable":
        if axis.dimension == self.lines.dimension:
            return replace(self, lines=axis)
        return replace(self, columns=axis)

    def restriction_for(self, dimension: str):
        return self.restriction.get(dimension, P.TRUE)


def validate_table(t: MTable, c: Constellation):
    """Check the table invariants against a sealed constellation; raises."""
    c.require_sealed()
    fact = c.fact(t.fact)
    star = c.star[t.fact]
    if t.lines.dimension == t.columns.dimension:
        raise OperatorError("line and column axes must use different dimensions")
    for axis in (t.lines, t.columns):
        if axis.dimension not in star:
            raise OperatorError(f"dimension {axis.dimension} is not linked to fact {t.fact}")
        dim = c.dimension(axis.dimension)
        if axis.hierarchy not in dim.hierarchies:
            raise OperatorError(f"dimension {axis.dimension} has no hierarchy {axis.hierarchy}")
        if not axis.displayed:
            raise OperatorError(f"axis {axis.dimension}: no displayed param")
        if len(set(axis.displayed)) != len(axis.displayed):
            raise OperatorError(f"axis {axis.dimension}: displayed params repeat")
        indexes = [axis.level_index(p) for p in axis.displayed]
        if indexes != sorted(indexes):
            raise OperatorError(f"axis {axis.dimension}: displayed params out of coarse-to-fine order")
        for p in axis.displayed:
            if p not in axis.blends and not dim.has_attribute(p):
                raise OperatorError(f"axis {axis.dimension}: unknown displayed param {p}")
    for m in t.measures:
        fact.measure(m.name)
    for dname in t.restriction:
        if dname not in star:
            raise OperatorError(f"restriction on {dname}, which is not in the star of {t.fact}")


@dataclass
class Grid:
    """Evaluated cells with their header tuples, ready for rendering."""

    line_levels: tuple[str, ...]
    col_levels: tuple[str, ...]
    measures: tuple[str, ...]
    row_tuples: list[tuple]
    col_tuples: list[tuple]
    cells: dict  # (row_tuple, col_tuple) -> {measure: value}
    subject: str = ""

    def cell(self, row: tuple, col: tuple):
        return self.cells.get((row, col), EMPTY)

    def value(self, row: tuple, col: tuple, measure: str | None = None):
        got = self.cells.get((row, col))
        if got is None:
            return EMPTY
        return got[measure or self.measures[0]]

    def grand_total(self, measure: str | None = None):
        m = measure or self.measures[0]
        total = Decimal(0)
        for vals in self.cells.values():
            total += vals[m]
        return total

    def row_leaf(self, leaf_value):
        """Row tuples whose finest component equals leaf_value."""
        return [rt for rt in self.row_tuples if rt[-1] == leaf_value]

    def col_leaf(self, leaf_value):
        return [ct for ct in self.col_tuples if ct[-1] == leaf_value]

    def same_cells(self, other: "Grid") -> bool:
        """Cell-level equality ignoring level names (used by the benchmark)."""
        return (
            self.row_tuples == other.row_tuples
            and self.col_tuples == other.col_tuples
            and self.cells == other.cells
        )


def _aggregate(agg: str, values: list[Decimal]):
    if agg == "SUM":
        return sum(values, Decimal(0))
    if agg == "COUNT":
        return Decimal(len(values))
    if agg == "MIN":
        return min(values)
    if agg == "MAX":
        return max(values)
    if agg == "AVG":
        return sum(values, Decimal(0)) / Decimal(len(values))
    raise OperatorError(f"unknown aggregation {agg!r}")


def evaluate(t: MTable, c: Constellation) -> Grid:
    """Compute the grid: roll every restriction-passing fact instance up to the
    displayed levels of both axes and aggregate measure values per cell.

    Cells nobody contributes to are EMPTY, never zero. Header tuples are sorted
    lexicographically component by component, which keeps children grouped
    under their parents.
    """
    validate_table(t, c)
    fact = c.facts[t.fact]
    line_dim = c.dimensions[t.lines.dimension]
    col_dim = c.dimensions[t.columns.dimension]
    star = c.star[t.fact]

    restrictions = []
    for dname in star:
        pred = t.restriction_for(dname)
        if not isinstance(pred, P.TruePred):
            restrictions.append((dname, c.dimensions[dname], pred))

    collected: dict[tuple, dict[str, list[Decimal]]] = {}
    for key, refs, values in fact.instances:
        passed = True
        for dname, dim, pred in restrictions:
            ref = refs.get(dname)
            if ref not in dim.instances:
                raise DataError(f"fact {t.fact} instance {key!r}: unresolved link to {dname}")
            if not P.evaluate(pred, dim.instances[ref]):
                passed = False
                break
        if not passed:
            continue
        lref = refs.get(t.lines.dimension)
        cref = refs.get(t.columns.dimension)
        if lref not in line_dim.instances or cref not in col_dim.instances:
            raise DataError(f"fact {t.fact} instance {key!r}: unresolved axis link")
        row = tuple(t.lines.level_value(line_dim, lvl, lref) for lvl in t.lines.displayed)
        col = tuple(t.columns.level_value(col_dim, lvl, cref) for lvl in t.columns.displayed)
        per_cell = collected.setdefault((row, col), {})
        for m in t.measures:
            per_cell.setdefault(m.name, []).append(values[m.name])

    cells = {}
    rows = set()
    cols = set()
    for (row, col), per_measure in collected.items():
        rows.add(row)
        cols.add(col)
        cells[(row, col)] = {
            m.name: _aggregate(m.agg, per_measure[m.name]) for m in t.measures
        }

    def tuple_key(tup):
        return tuple(sort_key(v) for v in tup)

    subject = f"{t.fact} " + ", ".join(f"{m.agg}({m.name})" for m in t.measures)
    return Grid(
        line_levels=tuple(t.lines.displayed),
        col_levels=tuple(t.columns.displayed),
        measures=tuple(m.name for m in t.measures),
        row_tuples=sorted(rows, key=tuple_key),
        col_tuples=sorted(cols, key=tuple_key),
        cells=cells,
        subject=subject,
    )


def axis_strictness_report(t: MTable, c: Constellation) -> list[str]:
    """Scan every adjacent displayed pair of both axes, blend levels included.

    Returns human-readable violations; empty means every displayed adjacency
    is a strict roll-up over the instance data.
    """
    problems = []
    for axis in (t.lines, t.columns):
        dim = c.dimensions[axis.dimension]
        for upper, lower in zip(axis.displayed, axis.displayed[1:]):
            parents: dict[object, set] = {}
            for key in dim.instances:
                lo = axis.level_value(dim, lower, key)
                hi = axis.level_value(dim, upper, key)
                parents.setdefault(lo, set()).add(hi)
            for v, ups in parents.items():
                if len(ups) > 1:
                    problems.append(
                        f"{axis.dimension}: ({lower} -> {upper}) value {v!r} "
                        f"has parents {sorted(map(str, ups))}"
                    )
    return problems


def render_text(g: Grid) -> str:
    """Fixed-width rendering with nested headers.

    Coarser column values print once at the start of their span; EMPTY cells
    render blank. Layout (one header row per column level, line level names on
    the last header row):

        <subject> | <col level 1> v v v
                  | <col level 2> v v v
        <line levels>
        <line values> cell cell cell
    """
    n_line = len(g.line_levels)
    n_meas = len(g.measures)
    leaf_cols = []
    for ct in g.col_tuples:
        for m in g.measures:
            leaf_cols.append((ct, m))

    width = n_line + 1 + max(len(leaf_cols), 1)
    table: list[list[str]] = []

    for li, level in enumerate(g.col_levels):
        row = [""] * n_line + [level]
        prev = None
        for ct, m in leaf_cols:
            prefix = ct[: li + 1]
            if prefix != prev and m == g.measures[0]:
                row.append(format_value(ct[li]))
                prev = prefix
            else:
                row.append("")
        row += [""] * (width - len(row))
        table.append(row)
    if n_meas > 1:
        row = [""] * n_line + ["measure"] + [m for _, m in leaf_cols]
        table.append(row)

    table.append(list(g.line_levels) + [""] * (width - n_line))

    for rt in g.row_tuples:
        row = [format_value(v) for v in rt] + [""]
        for ct, m in leaf_cols:
            v = g.value(rt, ct, m)
            row.append("" if v is EMPTY else format_value(v))
        row += [""] * (width - len(row))
        table.append(row)

    widths = [max(len(r[i]) for r in table) for i in range(width)]
    lines = [g.subject] if g.subject else []
    for r in table:
        cells = [r[i].ljust(widths[i]) for i in range(n_line + 1)]
        cells += [r[i].rjust(widths[i]) for i in range(n_line + 1, width)]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"
