"""Dynamic-vs-materialized cost comparison for the blend operator.

Series 1 performs the recombination dynamically (blend + evaluation); series 2
evaluates the same analysis over the level that was precomputed into a stored
attribute at ingest. Grid equality between the two series is asserted before
any timing. Wall-clock medians are reported; with BLENDCUBE_DB_URL set, the
generated SQL for both series is additionally timed on the external engine.
"""

from __future__ import annotations

import gc
import io
import csv
import statistics
import time
from dataclasses import dataclass

from . import dbexec
from .algebra import BlendRequest, blend, display
from .errors import DataError
from .ingest import BENCH_ORGANISM_COUNT, BENCH_PREDICATES, generate_bench_dataset
from .mtable import evaluate
from .predicate import parse_predicate
from .session import Session
from .sqlgen import generate_tm_query


@dataclass
class BenchResult:
    n_geo: int
    n_repartition: int
    scenario: str
    seed: int
    reps: int
    t_dynamic: float
    t_materialized: float
    overhead_pct: float
    t_dynamic_sql: float | None = None
    t_materialized_sql: float | None = None


def parse_sizes(spec: str) -> list[int]:
    """Accepts '10:100:10' (inclusive) or a comma list like '10,20,50'."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise DataError("size range must be START:STOP:STEP")
        start, stop, step = (int(p) for p in parts)
        if step <= 0 or stop < start:
            raise DataError("bad size range")
        return list(range(start, stop + 1, step))
    return [int(p) for p in spec.split(",") if p.strip()]


def _median_time(fn, reps: int) -> float:
    times = []
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(reps):
            start = time.perf_counter()
            fn()
            times.append(time.perf_counter() - start)
    finally:
        if gc_was_enabled:
            gc.enable()
    return statistics.median(times)


def _paired_median_times(fn_a, fn_b, reps: int, inner: int = 3) -> tuple[float, float]:
    """Median over reps of per-rep best-of-`inner` timings, with the two
    workloads alternating order inside each rep.

    Pairing makes machine drift hit both series equally; taking the best of a
    few inner runs (the timeit approach) discards scheduler hiccups, which
    would otherwise swamp the few-percent differences being measured.
    """
    a_times: list[float] = []
    b_times: list[float] = []

    def best(fn) -> float:
        runs = []
        for _ in range(inner):
            t0 = time.perf_counter()
            fn()
            runs.append(time.perf_counter() - t0)
        return min(runs)

    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for i in range(reps):
            if i % 2 == 0:
                a_times.append(best(fn_a))
                b_times.append(best(fn_b))
            else:
                b_times.append(best(fn_b))
                a_times.append(best(fn_a))
    finally:
        if gc_was_enabled:
            gc.enable()
    return statistics.median(a_times), statistics.median(b_times)


def run_one(n_geo: int, seed: int = 0, reps: int = 5, scenario: str = "homogeneous",
            allow_large: bool = False, conn=None) -> BenchResult:
    if reps < 1:
        raise DataError("reps must be at least 1")
    c = generate_bench_dataset(n_geo, seed=seed, allow_large=allow_large, scenario=scenario)
    pred = parse_predicate(BENCH_PREDICATES[scenario])

    base = display(
        c, "Repartition", [("SUM", "Superficie")],
        "Organismes", "HORG", "Geographies", "HGEO",
        params_lines=["Variete"], params_columns=["Pays", "Etat"],
    )
    materialized = display(
        c, "Repartition", [("SUM", "Superficie")],
        "Organismes", "HORG", "Geographies", "HMAT",
        params_lines=["Variete"], params_columns=["PaysEtatM"],
    )

    def dynamic():
        request = BlendRequest(base, "Geographies", "Pays", "-", "Etat", "-", pred)
        return evaluate(blend(request, c), c)

    def stored():
        return evaluate(materialized, c)

    g_dynamic = dynamic()
    g_stored = stored()
    if not g_dynamic.same_cells(g_stored):
        raise DataError(
            f"series grids differ at n_geo={n_geo} scenario={scenario}; "
            "the benchmark comparison would be meaningless"
        )

    t_dynamic, t_materialized = _paired_median_times(dynamic, stored, reps)
    overhead = 100.0 * (t_dynamic - t_materialized) / t_materialized

    t_dynamic_sql = t_materialized_sql = None
    if conn is not None:
        dbexec.load_constellation(conn, c)
        session = Session(c)
        session.apply({
            "op": "display", "fact": "Repartition",
            "measures": [{"fn": "SUM", "measure": "Superficie"}],
            "lines": {"dimension": "Organismes", "hierarchy": "HORG", "params": ["Variete"]},
            "columns": {"dimension": "Geographies", "hierarchy": "HGEO", "params": ["Pays", "Etat"]},
        })
        session.apply({
            "op": "blend", "dimension": "Geographies",
            "p_sup": "Pays", "s_sup": "-", "p_inf": "Etat", "s_inf": "-",
            "pred": BENCH_PREDICATES[scenario],
        })
        blend_sql = session.sql()
        stored_sql = generate_tm_query(materialized, c)
        t_dynamic_sql = _median_time(lambda: dbexec.fetch(conn, blend_sql), reps)
        t_materialized_sql = _median_time(lambda: dbexec.fetch(conn, stored_sql), reps)
        if dbexec.rows_multiset(dbexec.fetch(conn, blend_sql)) != dbexec.grid_multiset(g_dynamic):
            raise DataError(f"external engine disagrees with the in-memory grid at n_geo={n_geo}")
        _drop_tables(conn, c)

    return BenchResult(
        n_geo=n_geo,
        n_repartition=BENCH_ORGANISM_COUNT * n_geo,
        scenario=scenario,
        seed=seed,
        reps=reps,
        t_dynamic=t_dynamic,
        t_materialized=t_materialized,
        overhead_pct=overhead,
        t_dynamic_sql=t_dynamic_sql,
        t_materialized_sql=t_materialized_sql,
    )


def _drop_tables(conn, c):
    from .values import fold_ident

    for name in list(c.facts) + list(c.dimensions):
        conn.execute(f"DROP TABLE {fold_ident(name)}")
    conn.commit()


def isolated_overhead_ratio(n_geo: int, seed: int = 0, samples: int = 50) -> float:
    """The blend operation's own cost as a percentage of one grid evaluation,
    both measured in isolation (medians over many samples).

    This is the dynamic route's true surcharge, free of the end-to-end noise
    that swamps sub-percent differences between two near-identical workloads.
    """
    c = generate_bench_dataset(n_geo, seed=seed)
    pred = parse_predicate(BENCH_PREDICATES["homogeneous"])
    base = display(
        c, "Repartition", [("SUM", "Superficie")],
        "Organismes", "HORG", "Geographies", "HGEO",
        params_lines=["Variete"], params_columns=["Pays", "Etat"],
    )
    request = BlendRequest(base, "Geographies", "Pays", "-", "Etat", "-", pred)
    blended = blend(request, c)
    evaluate(blended, c)

    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        blend_times = []
        for _ in range(samples):
            t0 = time.perf_counter()
            blend(request, c)
            blend_times.append(time.perf_counter() - t0)
        eval_times = []
        for _ in range(max(5, samples // 5)):
            t0 = time.perf_counter()
            evaluate(blended, c)
            eval_times.append(time.perf_counter() - t0)
    finally:
        if gc_was_enabled:
            gc.enable()
    return 100.0 * statistics.median(blend_times) / statistics.median(eval_times)


def run_bench(sizes, seed: int = 0, reps: int = 5, skew: bool = False,
              allow_large: bool = False) -> list[BenchResult]:
    url = dbexec.db_url()
    conn = dbexec.connect(url) if url else None
    scenarios = ["homogeneous"] + (["skewed", "empty_inf"] if skew else [])
    results = []
    try:
        for n in sizes:
            for scenario in scenarios:
                results.append(
                    run_one(n, seed=seed, reps=reps, scenario=scenario,
                            allow_large=allow_large, conn=conn)
                )
    finally:
        if conn is not None:
            conn.close()
    return results


def spearman_trend(results: list[BenchResult]) -> float | None:
    """Spearman rank correlation of overhead_pct against n_geo over the
    homogeneous sweep; None when fewer than two sizes ran."""
    points = [(r.n_geo, r.overhead_pct) for r in results if r.scenario == "homogeneous"]
    if len(points) < 2:
        return None
    xs = _ranks([p[0] for p in points])
    ys = _ranks([p[1] for p in points])
    n = len(points)
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    if vx == 0 or vy == 0:
        return 0.0
    return cov / (vx * vy) ** 0.5


def _ranks(values) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def report_csv(results: list[BenchResult]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(
        ["n_geo", "n_repartition", "scenario", "seed", "reps",
         "t_dynamic_s", "t_materialized_s", "overhead_pct",
         "t_dynamic_sql_s", "t_materialized_sql_s"]
    )
    for r in results:
        w.writerow([
            r.n_geo, r.n_repartition, r.scenario, r.seed, r.reps,
            f"{r.t_dynamic:.6f}", f"{r.t_materialized:.6f}", f"{r.overhead_pct:.2f}",
            "" if r.t_dynamic_sql is None else f"{r.t_dynamic_sql:.6f}",
            "" if r.t_materialized_sql is None else f"{r.t_materialized_sql:.6f}",
        ])
    return out.getvalue()
