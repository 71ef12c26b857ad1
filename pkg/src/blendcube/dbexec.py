"""Optional external-engine harness.

Reads a connection descriptor from the BLENDCUBE_DB_URL environment variable
(sqlite URLs only: ``sqlite:///:memory:`` or ``sqlite:///path/to/file.db``).
Everything here is skipped when the variable is unset; the in-memory engine
never depends on it.
"""

from __future__ import annotations

import os
import sqlite3
from decimal import Decimal

from .errors import DataError
from .model import Constellation
from .mtable import Grid
from .sqlgen import SqlArtifact, generate_star_ddl
from .values import format_value

ENV_VAR = "BLENDCUBE_DB_URL"


def db_url() -> str | None:
    url = os.environ.get(ENV_VAR, "").strip()
    return url or None


def connect(url: str) -> sqlite3.Connection:
    if not url.startswith("sqlite:"):
        raise DataError(f"{ENV_VAR} supports sqlite URLs only, got {url!r}")
    path = url[len("sqlite:") :].lstrip("/")
    if path in ("", ":memory:"):
        return sqlite3.connect(":memory:")
    if not url.startswith("sqlite:///"):
        raise DataError(f"malformed sqlite URL {url!r}, expected sqlite:///path")
    return sqlite3.connect("/" + path if url.startswith("sqlite:////") else path)


def load_constellation(conn: sqlite3.Connection, c: Constellation):
    """Create the star tables and insert every instance row."""
    for artifact in generate_star_ddl(c):
        conn.execute(artifact.text.rstrip(";"))
    for d in c.dimensions.values():
        attrs = [a for a in d.attributes if a.name != "All"]
        placeholders = ", ".join("?" * (1 + len(attrs)))
        table = _fold(d.name)
        sql = f"INSERT INTO {table} VALUES ({placeholders})"
        for key, row in d.instances.items():
            conn.execute(sql, [_db_value(key)] + [_db_value(row[a.name]) for a in attrs])
    for f in c.facts.values():
        star = c.star[f.name]
        placeholders = ", ".join("?" * (1 + len(star) + len(f.measures)))
        sql = f"INSERT INTO {_fold(f.name)} VALUES ({placeholders})"
        for key, refs, values in f.instances:
            conn.execute(
                sql,
                [_db_value(key)]
                + [_db_value(refs[d]) for d in star]
                + [_db_value(values[m.name]) for m in f.measures],
            )
    conn.commit()


def _fold(name: str) -> str:
    from .values import fold_ident

    return fold_ident(name)


def _db_value(v):
    if isinstance(v, Decimal):
        return int(v) if v == v.to_integral_value() else float(v)
    return v


def fetch(conn: sqlite3.Connection, artifact: SqlArtifact | str) -> list[tuple]:
    sql = artifact.text if isinstance(artifact, SqlArtifact) else artifact
    return [tuple(r) for r in conn.execute(sql.rstrip().rstrip(";"))]


def _normalize(v):
    if v is None:
        return None
    if isinstance(v, Decimal):
        return Decimal(format_value(v))
    if isinstance(v, bool):
        return Decimal(int(v))
    if isinstance(v, int):
        return Decimal(v)
    if isinstance(v, float):
        return Decimal(repr(v))
    return str(v)


def grid_multiset(g: Grid) -> list[tuple]:
    """The grid as (measure values..., column values..., line values...) rows,
    matching the generated SELECT order, for comparison with engine output."""
    rows = []
    for (rt, ct), vals in g.cells.items():
        rows.append(tuple(_normalize(vals[m]) for m in g.measures) + tuple(map(_normalize, ct)) + tuple(map(_normalize, rt)))
    return sorted(rows, key=lambda r: tuple(str(x) for x in r))


def rows_multiset(rows: list[tuple]) -> list[tuple]:
    out = [tuple(_normalize(v) for v in row) for row in rows]
    return sorted(out, key=lambda r: tuple(str(x) for x in r))
