"""Command language, REPL and batch runner.

Commands (one per line, ``#`` starts a comment):

    LOAD SCHEMA <path>            LOAD DATA <table> <path>
    LOAD DATASET <dir>            LOAD SAMPLE
    DISPLAY <fact> <AGG(m)[,AGG(m)...]> LINES <dim> <hier> [<p1[,p2..]>]
                                  COLS <dim> <hier> [<p1[,p2..]>]
    DRILLDOWN <dim> <param>       ROLLUP <dim> <param>
    ROTATE <dim_old> <dim_new> <hier>
    BLEND <dim> <p_sup>(+|-) <p_inf>(+|-) WHERE <pred>
    SHOW    SQL    UNDO    SAVE <path>    QUIT

Exit codes: 0 ok, 1 command error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import bench as bench_mod
from . import ingest
from .errors import BlendcubeError, CommandError, ConstraintViolation, PredicateError, ValidationError
from .mtable import Grid, render_text
from .predicate import parse_predicate
from .session import Session
from .values import format_value

VERBS = (
    "LOAD", "DISPLAY", "DRILLDOWN", "ROLLUP", "ROTATE", "BLEND",
    "SHOW", "SQL", "UNDO", "SAVE", "QUIT",
)

_MEASURE_RE = re.compile(r"^(\w+)\((\w+)\)$", re.UNICODE)
_STAMPED_RE = re.compile(r"^(\w+)\((.)\)$", re.UNICODE | re.DOTALL)


@dataclass
class Command:
    verb: str
    args: dict = field(default_factory=dict)


def _split(line: str):
    """Whitespace tokens with their 1-based start columns."""
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", line)]


def parse(line: str) -> Command | None:
    """Parse one command line; None for blank/comment lines."""
    bare = line.split("#", 1)[0].rstrip()
    if not bare.strip():
        return None
    tokens = _split(bare)
    verb = tokens[0][0].upper()
    if verb not in VERBS:
        raise CommandError(f"unknown verb {tokens[0][0]!r}", column=tokens[0][1])

    if verb in ("SHOW", "SQL", "UNDO", "QUIT"):
        if len(tokens) > 1:
            raise CommandError(f"{verb} takes no arguments", column=tokens[1][1])
        return Command(verb)

    if verb == "SAVE":
        if len(tokens) != 2:
            raise CommandError("SAVE takes exactly one path", column=tokens[0][1])
        return Command("SAVE", {"path": tokens[1][0]})

    if verb == "LOAD":
        if len(tokens) < 2:
            raise CommandError("LOAD needs a form: SCHEMA, DATA, DATASET or SAMPLE")
        form = tokens[1][0].upper()
        rest = tokens[2:]
        if form == "SCHEMA" and len(rest) == 1:
            return Command("LOAD", {"form": "SCHEMA", "path": rest[0][0]})
        if form == "DATA" and len(rest) == 2:
            return Command("LOAD", {"form": "DATA", "table": rest[0][0], "path": rest[1][0]})
        if form == "DATASET" and len(rest) == 1:
            return Command("LOAD", {"form": "DATASET", "path": rest[0][0]})
        if form == "SAMPLE" and not rest:
            return Command("LOAD", {"form": "SAMPLE"})
        raise CommandError(
            "LOAD forms: LOAD SCHEMA <path> | LOAD DATA <table> <path> | "
            "LOAD DATASET <dir> | LOAD SAMPLE",
            column=tokens[1][1],
        )

    if verb in ("DRILLDOWN", "ROLLUP"):
        if len(tokens) != 3:
            raise CommandError(f"{verb} <dimension> <param>", column=tokens[0][1])
        return Command(verb, {"dimension": tokens[1][0], "param": tokens[2][0]})

    if verb == "ROTATE":
        if len(tokens) != 4:
            raise CommandError("ROTATE <dim_old> <dim_new> <hierarchy>", column=tokens[0][1])
        return Command(
            "ROTATE",
            {"dim_old": tokens[1][0], "dim_new": tokens[2][0], "hierarchy": tokens[3][0]},
        )

    if verb == "DISPLAY":
        return _parse_display(tokens)

    if verb == "BLEND":
        return _parse_blend(bare, tokens)

    raise CommandError(f"unhandled verb {verb}")


def _parse_display(tokens) -> Command:
    if len(tokens) < 3:
        raise CommandError("DISPLAY <fact> <AGG(m),...> LINES ... COLS ...")
    fact = tokens[1][0]
    measures = []
    for part in tokens[2][0].split(","):
        m = _MEASURE_RE.match(part)
        if not m:
            raise CommandError(f"bad measure spec {part!r}, expected AGG(name)", column=tokens[2][1])
        measures.append({"fn": m.group(1).upper(), "measure": m.group(2)})

    def axis(keyword: str, start: int):
        if start >= len(tokens) or tokens[start][0].upper() != keyword:
            col = tokens[start][1] if start < len(tokens) else None
            raise CommandError(f"expected {keyword}", column=col)
        if start + 2 >= len(tokens):
            raise CommandError(f"{keyword} needs <dimension> <hierarchy>", column=tokens[start][1])
        spec = {"dimension": tokens[start + 1][0], "hierarchy": tokens[start + 2][0]}
        nxt = start + 3
        if nxt < len(tokens) and tokens[nxt][0].upper() not in ("LINES", "COLS"):
            spec["params"] = tokens[nxt][0].split(",")
            nxt += 1
        return spec, nxt

    lines, nxt = axis("LINES", 3)
    columns, nxt = axis("COLS", nxt)
    if nxt != len(tokens):
        raise CommandError("unexpected trailing arguments", column=tokens[nxt][1])
    return Command(
        "DISPLAY", {"fact": fact, "measures": measures, "lines": lines, "columns": columns}
    )


def _parse_blend(line: str, tokens) -> Command:
    if len(tokens) < 5:
        raise CommandError("BLEND <dim> <p_sup>(+|-) <p_inf>(+|-) WHERE <pred>")
    dimension = tokens[1][0]

    def stamped(tok, col):
        m = _STAMPED_RE.match(tok)
        if not m:
            raise CommandError(f"expected NAME(+) or NAME(-), got {tok!r}", column=col)
        if m.group(2) not in "+-":
            # point at the stamp character itself
            raise CommandError(
                f"bad stamp {m.group(2)!r}, expected + or -", column=col + len(m.group(1)) + 1
            )
        return m.group(1), m.group(2)

    p_sup, s_sup = stamped(tokens[2][0], tokens[2][1])
    p_inf, s_inf = stamped(tokens[3][0], tokens[3][1])
    if tokens[4][0].upper() != "WHERE":
        raise CommandError("expected WHERE", column=tokens[4][1])
    pred_start = tokens[4][1] + len(tokens[4][0])
    pred_text = line[pred_start:]
    try:
        pred = parse_predicate(pred_text)
    except PredicateError as e:
        col = pred_start + (e.column or 1)
        raise CommandError(f"bad predicate: {e}", column=col) from None
    return Command(
        "BLEND",
        {
            "dimension": dimension,
            "p_sup": p_sup,
            "s_sup": s_sup,
            "p_inf": p_inf,
            "s_inf": s_inf,
            "pred": pred,
        },
    )


def render(cmd: Command) -> str:
    """Canonical text of a command; parse(render(cmd)) round-trips."""
    a = cmd.args
    if cmd.verb == "LOAD":
        form = a["form"]
        if form == "SCHEMA":
            return f"LOAD SCHEMA {a['path']}"
        if form == "DATA":
            return f"LOAD DATA {a['table']} {a['path']}"
        if form == "DATASET":
            return f"LOAD DATASET {a['path']}"
        return "LOAD SAMPLE"
    if cmd.verb == "DISPLAY":
        measures = ",".join(f"{m['fn']}({m['measure']})" for m in a["measures"])
        out = f"DISPLAY {a['fact']} {measures}"
        for key, word in (("lines", "LINES"), ("columns", "COLS")):
            spec = a[key]
            out += f" {word} {spec['dimension']} {spec['hierarchy']}"
            if spec.get("params"):
                out += " " + ",".join(spec["params"])
        return out
    if cmd.verb in ("DRILLDOWN", "ROLLUP"):
        return f"{cmd.verb} {a['dimension']} {a['param']}"
    if cmd.verb == "ROTATE":
        return f"ROTATE {a['dim_old']} {a['dim_new']} {a['hierarchy']}"
    if cmd.verb == "BLEND":
        return (
            f"BLEND {a['dimension']} {a['p_sup']}({a['s_sup']}) "
            f"{a['p_inf']}({a['s_inf']}) WHERE {a['pred']}"
        )
    if cmd.verb == "SAVE":
        return f"SAVE {a['path']}"
    return cmd.verb


def grid_to_csv(g: Grid) -> str:
    """Machine-readable grid: full header values repeated, EMPTY as blank."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    leaf_cols = [(ct, m) for ct in g.col_tuples for m in g.measures]
    for i, level in enumerate(g.col_levels):
        w.writerow([""] * len(g.line_levels) + [level] + [format_value(ct[i]) for ct, _ in leaf_cols])
    if len(g.measures) > 1:
        w.writerow([""] * len(g.line_levels) + ["measure"] + [m for _, m in leaf_cols])
    w.writerow(list(g.line_levels) + [""] + [""] * len(leaf_cols))
    for rt in g.row_tuples:
        row = [format_value(v) for v in rt] + [""]
        for ct, m in leaf_cols:
            v = g.value(rt, ct, m)
            row.append("" if v is None else format_value(v))
        w.writerow(row)
    return out.getvalue()


class Runner:
    """Applies parsed commands to a session; used by both REPL and batch."""

    def __init__(self, out=None, emit_sql: str | None = None):
        self.out = out or sys.stdout
        self.emit_sql = emit_sql
        self.constellation = None
        self.session: Session | None = None
        self.quit = False
        self.had_error = False

    def _session(self) -> Session:
        if self.constellation is None:
            raise CommandError("no constellation loaded; LOAD first")
        if not self.constellation.sealed:
            self.constellation.seal()
        if self.session is None:
            self.session = Session(self.constellation)
        return self.session

    def execute(self, line: str):
        try:
            cmd = parse(line)
            if cmd is None:
                return
            self._dispatch(cmd)
        except ValidationError as e:
            self.had_error = True
            print(f"error: {e}", file=self.out)
            for v in e.report.violations:
                print(f"  {v}", file=self.out)
        except ConstraintViolation as e:
            self.had_error = True
            print(f"error: {e}", file=self.out)
            print(f"  offending values: {', '.join(e.offending_values)}", file=self.out)
        except BlendcubeError as e:
            self.had_error = True
            print(f"error: {e}", file=self.out)

    def _dispatch(self, cmd: Command):
        a = cmd.args
        if cmd.verb == "QUIT":
            self.quit = True
            return
        if cmd.verb == "LOAD":
            self._load(a)
            return
        if cmd.verb == "SHOW":
            print(render_text(self._session().grid()), file=self.out, end="")
            return
        if cmd.verb == "SQL":
            artifact = self._session().sql()
            print(artifact.text, file=self.out)
            if self.emit_sql:
                Path(self.emit_sql).write_text(artifact.text + "\n", encoding="utf-8")
            return
        if cmd.verb == "SAVE":
            text = grid_to_csv(self._session().grid())
            try:
                Path(a["path"]).write_text(text, encoding="utf-8")
            except OSError as e:
                raise CommandError(f"cannot write {a['path']}: {e}") from None
            print(f"saved {a['path']}", file=self.out)
            return
        if cmd.verb == "UNDO":
            self._session().apply({"op": "undo"})
            print("ok", file=self.out)
            return

        descriptor = {"op": cmd.verb.lower(), **a}
        self._session().apply(descriptor)
        t = self._session().table
        print(
            f"ok: {t.fact} | lines {t.lines.dimension} {'/'.join(t.lines.displayed)}"
            f" | cols {t.columns.dimension} {'/'.join(t.columns.displayed)}",
            file=self.out,
        )

    def _load(self, a: dict):
        form = a["form"]
        if form == "SAMPLE":
            self.constellation = ingest.build_sample_constellation()
            self.session = None
            print("loaded sample dataset", file=self.out)
            return
        if form == "DATASET":
            self.constellation = ingest.load_dataset(a["path"])
            self.session = None
            print(f"loaded dataset {a['path']}", file=self.out)
            return
        if form == "SCHEMA":
            self.constellation = ingest.load_schema(a["path"])
            self.session = None
            print(f"loaded schema {a['path']}", file=self.out)
            return
        count = 0
        if self.constellation is None:
            raise CommandError("LOAD SCHEMA before LOAD DATA")
        count = ingest.load_csv(self.constellation, a["table"], a["path"])
        print(f"loaded {count} rows into {a['table']}", file=self.out)


def run_script(lines, out=None, emit_sql=None, golden=None) -> int:
    runner = Runner(out=out, emit_sql=emit_sql)
    for line in lines:
        runner.execute(line)
        if runner.quit:
            break
    if golden is not None:
        try:
            expected = Path(golden).read_text(encoding="utf-8")
        except OSError as e:
            print(f"i/o error: cannot read golden {golden}: {e}", file=runner.out)
            return 2
        try:
            actual = grid_to_csv(runner._session().grid())
        except BlendcubeError as e:
            print(f"error: no grid to compare: {e}", file=runner.out)
            return 1
        if actual.replace("\r\n", "\n") != expected.replace("\r\n", "\n"):
            print(f"golden mismatch against {golden}", file=runner.out)
            for i, (got, want) in enumerate(
                zip(actual.splitlines(), expected.splitlines()), 1
            ):
                if got != want:
                    print(f"  line {i}: got      {got}", file=runner.out)
                    print(f"  line {i}: expected {want}", file=runner.out)
                    break
            return 1
        print(f"golden match: {golden}", file=runner.out)
    return 1 if runner.had_error else 0


def repl(out=None) -> int:
    runner = Runner(out=out)
    print("blendcube - type QUIT to leave", file=runner.out)
    while not runner.quit:
        try:
            line = input("blend> ")
        except EOFError:
            break
        except KeyboardInterrupt:
            print("", file=runner.out)
            break
        runner.execute(line)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="blendcube", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="run a command script")
    p_run.add_argument("script")
    p_run.add_argument("--emit-sql", metavar="PATH", help="write the latest SQL command output here")
    p_run.add_argument("--golden", metavar="PATH", help="diff final grid CSV against this file")

    sub.add_parser("repl", help="interactive session")

    p_sample = sub.add_parser("gen-sample", help="write the bundled sample dataset")
    p_sample.add_argument("directory")

    p_bench_gen = sub.add_parser("gen-bench", help="write a generated benchmark dataset")
    p_bench_gen.add_argument("directory")
    p_bench_gen.add_argument("--geo", type=int, default=10)
    p_bench_gen.add_argument("--seed", type=int, default=0)
    p_bench_gen.add_argument("--allow-large", action="store_true")

    p_bench = sub.add_parser("bench", help="dynamic vs materialized cost comparison")
    p_bench.add_argument("--sizes", default="10:100:10", help="START:STOP:STEP or comma list")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--reps", type=int, default=5)
    p_bench.add_argument("--out", metavar="PATH", help="write the CSV report here")
    p_bench.add_argument("--skew", action="store_true", help="also run skewed/empty partitions")
    p_bench.add_argument("--allow-large", action="store_true")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.add_argument("--host", default="127.0.0.1")

    args = parser.parse_args(argv)

    if args.command in (None, "repl"):
        return repl()

    if args.command == "run":
        try:
            text = Path(args.script).read_text(encoding="utf-8")
        except OSError as e:
            print(f"i/o error: {e}", file=sys.stderr)
            return 2
        return run_script(text.splitlines(), emit_sql=args.emit_sql, golden=args.golden)

    if args.command == "gen-sample":
        paths = ingest.generate_sample_dataset(args.directory)
        for p in paths:
            print(p)
        return 0

    if args.command == "gen-bench":
        try:
            c = ingest.generate_bench_dataset(args.geo, seed=args.seed, allow_large=args.allow_large)
        except BlendcubeError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        for p in ingest.write_dataset(c, args.directory, ingest.BENCH_SCHEMA):
            print(p)
        return 0

    if args.command == "bench":
        try:
            sizes = bench_mod.parse_sizes(args.sizes)
            results = bench_mod.run_bench(
                sizes,
                seed=args.seed,
                reps=args.reps,
                skew=args.skew,
                allow_large=args.allow_large,
            )
        except BlendcubeError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        report = bench_mod.report_csv(results)
        if args.out:
            Path(args.out).write_text(report, encoding="utf-8")
            print(f"report written to {args.out}")
        print(report, end="")
        trend = bench_mod.spearman_trend(results)
        if trend is not None:
            print(f"# spearman(overhead_pct, n_geo) = {trend:+.3f}")
        return 0

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        port = args.port or int(os.environ.get("BLENDCUBE_PORT", "8075"))
        uvicorn.run(create_app(), host=args.host, port=port)
        return 0

    parser.error(f"unknown command {args.command}")
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
