"""R-OLAP backend: portable SQL for star storage, table queries and blends.

The dialect is a deliberately small SQL-92 subset: SELECT / FROM (comma
joins and aliased sub-selects) / WHERE / GROUP BY / UNION ALL. Identifiers
are folded to lowercase ascii (Densité -> densite); only non-plain ones get
double quotes. Literals are inlined, single-quoted for text.

A blend translates to a two-branch UNION ALL over its source relation: the
rows selected by the predicate contribute the upper param as the new column,
the remaining rows contribute the lower param, and the outer query regroups.
Chained blends nest the previous query as their source sub-select. Chained
re-aggregation is exact for distributive functions (SUM/MIN/MAX); the
in-memory engine, which recomputes from fact instances, is authoritative for
the rest.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal

from . import predicate as P
from .errors import OperatorError
from .model import Constellation
from .mtable import MTable
from .values import fold_ident

_PLAIN_IDENT = re.compile(r"^[a-z_][a-z0-9_]*$")


@dataclass(frozen=True)
class SqlArtifact:
    text: str
    kind: str  # ddl | tm-query | blend-query
    bindings: tuple = ()  # reserved; the portable generator inlines literals

    def __str__(self):
        return self.text


def quote_ident(name: str) -> str:
    folded = fold_ident(name)
    if _PLAIN_IDENT.match(folded):
        return folded
    return '"' + folded.replace('"', '""') + '"'


def quote_literal(v) -> str:
    if isinstance(v, Decimal):
        return format(v, "f")
    if isinstance(v, (int, float)):
        return str(v)
    return "'" + str(v).replace("'", "''") + "'"


def predicate_sql(pred, qualifier: str | None = None) -> str:
    """Render a predicate over folded column names."""
    prefix = quote_ident(qualifier) + "." if qualifier else ""
    if isinstance(pred, P.TruePred):
        return "1 = 1"
    if isinstance(pred, P.FalsePred):
        return "1 = 0"
    if isinstance(pred, P.Not):
        return f"NOT ({predicate_sql(pred.inner, qualifier)})"
    if isinstance(pred, P.And):
        return f"{_wrap(pred.left, qualifier)} AND {_wrap(pred.right, qualifier)}"
    if isinstance(pred, P.Or):
        return f"({predicate_sql(pred.left, qualifier)} OR {predicate_sql(pred.right, qualifier)})"
    if isinstance(pred, P.Comparison):
        return f"{prefix}{quote_ident(pred.attr)} {pred.op} {quote_literal(pred.literal)}"
    raise OperatorError(f"cannot translate predicate node {pred!r}")


def _wrap(node, qualifier):
    text = predicate_sql(node, qualifier)
    return f"({text})" if isinstance(node, P.Or) else text


def _key_type(instances) -> str:
    if instances and all(isinstance(k, int) for k in _keys(instances)):
        return "INTEGER"
    if not instances:
        return "INTEGER"
    return "VARCHAR(255)"


def _keys(instances):
    if isinstance(instances, dict):
        return instances.keys()
    return [k for k, _refs, _values in instances]


def generate_star_ddl(c: Constellation) -> list[SqlArtifact]:
    """One CREATE TABLE per dimension and per fact: surrogate key, then the
    attribute (or foreign-key and measure) columns, folded names."""
    c.require_sealed()
    artifacts = []
    for d in c.dimensions.values():
        cols = [f"  {quote_ident(d.key_column)} {_key_type(d.instances)} NOT NULL"]
        for a in d.attributes:
            if a.name == "All":
                continue
            sqltype = "DECIMAL(20,6)" if a.vtype == "decimal" else "VARCHAR(255)"
            cols.append(f"  {quote_ident(a.name)} {sqltype} NOT NULL")
        cols.append(f"  PRIMARY KEY ({quote_ident(d.key_column)})")
        text = f"CREATE TABLE {quote_ident(d.name)} (\n" + ",\n".join(cols) + "\n);"
        artifacts.append(SqlArtifact(text, "ddl"))

    for f in c.facts.values():
        cols = [f"  {quote_ident(f.key_column)} {_key_type(f.instances)} NOT NULL"]
        for dname in c.star[f.name]:
            d = c.dimensions[dname]
            fk = c.links[f.name][dname]
            cols.append(f"  {quote_ident(fk)} {_key_type(d.instances)} NOT NULL")
        for m in f.measures:
            cols.append(f"  {quote_ident(m.name)} DECIMAL(20,6) NOT NULL")
        cols.append(f"  PRIMARY KEY ({quote_ident(f.key_column)})")
        for dname in c.star[f.name]:
            d = c.dimensions[dname]
            fk = c.links[f.name][dname]
            cols.append(
                f"  FOREIGN KEY ({quote_ident(fk)}) REFERENCES "
                f"{quote_ident(d.name)} ({quote_ident(d.key_column)})"
            )
        text = f"CREATE TABLE {quote_ident(f.name)} (\n" + ",\n".join(cols) + "\n);"
        artifacts.append(SqlArtifact(text, "ddl"))
    return artifacts


def _group_columns(t: MTable) -> list[str]:
    """Folded column names, column axis first (coarse to fine), then lines."""
    return [fold_ident(p) for p in t.columns.displayed] + [
        fold_ident(p) for p in t.lines.displayed
    ]


def generate_tm_query(t: MTable, c: Constellation) -> SqlArtifact:
    """Aggregation query for a plain (unblended) table over the star tables."""
    c.require_sealed()
    if t.lines.blends or t.columns.blends:
        raise OperatorError("blended table: build the query with generate_blend_query instead")

    fact = c.fact(t.fact)
    fact_table = fold_ident(t.fact)
    joined = []  # (dimension name, table name)
    for dname in c.star[t.fact]:
        pred = t.restriction_for(dname)
        if dname in (t.lines.dimension, t.columns.dimension) or not isinstance(pred, P.TruePred):
            joined.append(dname)

    # qualify attribute columns only when the folded name is ambiguous
    seen: dict[str, int] = {}
    for dname in joined:
        for a in c.dimensions[dname].attributes:
            if a.name != "All":
                col = fold_ident(a.name)
                seen[col] = seen.get(col, 0) + 1

    def attr_col(dname: str, attr: str) -> str:
        col = quote_ident(attr)
        if seen.get(fold_ident(attr), 0) > 1:
            return f"{quote_ident(dname)}.{col}"
        return col

    select = [f"{m.agg}({quote_ident(m.name)}) AS {quote_ident(m.name)}" for m in t.measures]
    group = []
    for axis in (t.columns, t.lines):
        for p in axis.displayed:
            group.append(attr_col(axis.dimension, p))
    select += group

    tables = [fact_table] + [fold_ident(d) for d in joined]
    conditions = []
    for dname in joined:
        fk = quote_ident(c.links[t.fact][dname])
        key = quote_ident(c.dimensions[dname].key_column)
        conditions.append(f"{fact_table}.{fk} = {quote_ident(dname)}.{key}")
    for dname in joined:
        pred = t.restriction_for(dname)
        if not isinstance(pred, P.TruePred):
            qualifier = dname if any(
                seen.get(fold_ident(a), 0) > 1 for a in P.references(pred)
            ) else None
            conditions.append(predicate_sql(pred, qualifier))

    text = "SELECT " + ", ".join(select) + "\nFROM " + ", ".join(tables)
    if conditions:
        text += "\nWHERE " + "\n  AND ".join(conditions)
    text += "\nGROUP BY " + ", ".join(group) + ";"
    return SqlArtifact(text, "tm-query")


def generate_blend_query(src, r) -> SqlArtifact:
    """Two-branch union translation of one blend over a source relation.

    src is either a stored relation name or the previous SqlArtifact in the
    chain (wrapped as a sub-select). The request's predicate may only touch
    columns the source relation exposes, i.e. displayed params of its table.
    """
    t = r.table
    source_cols = {fold_ident(p) for axis in (t.lines, t.columns) for p in axis.displayed}
    missing = sorted(
        a for a in P.references(r.pred) if fold_ident(a) not in source_cols
    )
    if missing:
        raise OperatorError(
            f"blend predicate references {missing[0]!r}, which the source relation "
            "does not expose; only displayed params can appear in SQL-translated predicates"
        )

    new_col = fold_ident(r.blend_name())
    axis = t.axis(r.dimension)
    i = axis.displayed.index(r.p_sup)
    middle = [r.p_sup] if r.s_sup == "+" else []
    middle.append(r.blend_name())
    if r.s_inf == "+":
        middle.append(r.p_inf)
    new_displayed = axis.displayed[:i] + middle + axis.displayed[i + 2 :]

    if axis is t.columns:
        out_group = [fold_ident(p) for p in new_displayed] + [
            fold_ident(p) for p in t.lines.displayed
        ]
    else:
        out_group = [fold_ident(p) for p in t.columns.displayed] + [
            fold_ident(p) for p in new_displayed
        ]

    if isinstance(src, SqlArtifact):
        body = src.text.rstrip().rstrip(";")
        indented = "\n".join("    " + line for line in body.splitlines())
        from_clause = "(\n" + indented + "\n  ) AS src"
    else:
        from_clause = fold_ident(str(src))

    measure_cols = [quote_ident(m.name) for m in t.measures]
    pred_sql = predicate_sql(r.pred)

    def branch(where: str, source_param: str) -> str:
        cols = list(measure_cols)
        for g in out_group:
            if g == new_col:
                cols.append(f"{fold_ident(source_param)} AS {new_col}")
            else:
                cols.append(g)
        return (
            "  SELECT " + ", ".join(cols) + f"\n  FROM {from_clause}\n  WHERE {where}"
        )

    inner = (
        branch(pred_sql, r.p_sup)
        + "\n  UNION ALL\n"
        + branch(f"NOT ({pred_sql})", r.p_inf)
    )
    select = [f"{m.agg}({quote_ident(m.name)}) AS {quote_ident(m.name)}" for m in t.measures]
    select += out_group
    text = (
        "SELECT "
        + ", ".join(select)
        + "\nFROM (\n"
        + inner
        + "\n) AS blended\nGROUP BY "
        + ", ".join(out_group)
        + ";"
    )
    return SqlArtifact(text, "blend-query")
