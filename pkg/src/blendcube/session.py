"""Analysis session: a loaded constellation, the current table, and history.

Both the CLI and the HTTP service drive this object. Operations are applied
through descriptors so the log can be replayed (order is semantic: blend
composition does not commute) and undone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import algebra, sqlgen
from .errors import OperatorError
from .model import Constellation
from .mtable import Grid, MTable, evaluate
from .predicate import parse_predicate


@dataclass
class LogEntry:
    descriptor: dict
    table: MTable


@dataclass
class Session:
    constellation: Constellation
    log: list[LogEntry] = field(default_factory=list)

    @property
    def table(self) -> MTable | None:
        return self.log[-1].table if self.log else None

    def current_table(self) -> MTable:
        t = self.table
        if t is None:
            raise OperatorError("no table yet; run DISPLAY first")
        return t

    def grid(self) -> Grid:
        return evaluate(self.current_table(), self.constellation)

    def apply(self, descriptor: dict) -> MTable:
        """Apply one operation descriptor; returns the new current table."""
        op = descriptor.get("op")
        c = self.constellation
        if op == "display":
            measures = [(m["fn"].upper(), m["measure"]) for m in descriptor["measures"]]
            lines = descriptor["lines"]
            columns = descriptor["columns"]
            t = algebra.display(
                c,
                descriptor["fact"],
                measures,
                lines["dimension"],
                lines["hierarchy"],
                columns["dimension"],
                columns["hierarchy"],
                params_lines=lines.get("params"),
                params_columns=columns.get("params"),
            )
        elif op == "drilldown":
            t = algebra.drilldown(self.current_table(), descriptor["dimension"], descriptor["param"])
        elif op == "rollup":
            t = algebra.rollup(self.current_table(), descriptor["dimension"], descriptor["param"])
        elif op == "rotate":
            t = algebra.rotate(
                self.current_table(),
                descriptor["dim_old"],
                descriptor["dim_new"],
                descriptor["hierarchy"],
                c,
            )
        elif op == "blend":
            t = algebra.blend(self.blend_request(descriptor), c)
        elif op == "undo":
            if not self.log:
                raise OperatorError("nothing to undo")
            self.log.pop()
            return self.table
        else:
            raise OperatorError(f"unknown operation {op!r}")
        self.log.append(LogEntry(descriptor, t))
        return t

    def blend_request(self, descriptor: dict) -> algebra.BlendRequest:
        pred = descriptor["pred"]
        if isinstance(pred, str):
            pred = parse_predicate(pred)
        return algebra.BlendRequest(
            self.current_table(),
            descriptor["dimension"],
            descriptor["p_sup"],
            descriptor["s_sup"],
            descriptor["p_inf"],
            descriptor["s_inf"],
            pred,
        )

    def replay(self) -> "Session":
        """Re-run the log descriptors on a fresh session; used to verify the
        log reproduces the current table."""
        fresh = Session(self.constellation)
        for entry in self.log:
            fresh.apply(entry.descriptor)
        return fresh

    def sql(self) -> sqlgen.SqlArtifact:
        """SQL for the current table: the base table query, wrapped once per
        blend. Navigation after the first blend leaves the supported envelope."""
        self.current_table()
        first_blend = None
        for i, entry in enumerate(self.log):
            if entry.descriptor.get("op") == "blend":
                first_blend = i
                break
        if first_blend is None:
            return sqlgen.generate_tm_query(self.current_table(), self.constellation)

        for entry in self.log[first_blend:]:
            if entry.descriptor.get("op") != "blend":
                raise OperatorError(
                    "SQL generation supports display/drill operations only before the "
                    "first blend; re-create the table or ask for SQL before navigating"
                )
        base = self.log[first_blend - 1].table if first_blend > 0 else None
        if base is None:
            raise OperatorError("no table before the first blend")
        artifact = sqlgen.generate_tm_query(base, self.constellation)
        table = base
        for entry in self.log[first_blend:]:
            session_view = Session(self.constellation, [LogEntry({}, table)])
            request = session_view.blend_request(entry.descriptor)
            artifact = sqlgen.generate_blend_query(artifact, request)
            table = entry.table
        return artifact
