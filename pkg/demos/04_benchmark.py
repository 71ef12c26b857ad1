#!/usr/bin/env python3
"""Cost of dynamic recombination vs a precomputed attribute, at desk scale.

Series 1 blends and evaluates at query time; series 2 evaluates over a
stored column holding the same recombination. Both series must produce
identical grids; the interesting number is the timing overhead, which stays
small and whose fixed component shrinks as the fact table grows.
"""

from blendcube import bench

sizes = [10, 30, 50, 70, 100]
results = bench.run_bench(sizes, seed=42, reps=5)
print(bench.report_csv(results), end="")

trend = bench.spearman_trend(results)
print(f"\nspearman(overhead_pct, n_geo) = {trend:+.3f}")

print("\nthe dynamic surcharge in isolation (blend op vs one evaluation):")
for n in (10, 100):
    print(f"  n_geo={n:4d}: {bench.isolated_overhead_ratio(n, seed=42):.2f}%")

print("\nskewed partitions and an empty lower set (margin cases):")
for r in bench.run_bench([20], seed=42, reps=3, skew=True):
    print(f"  scenario={r.scenario:12s} overhead={r.overhead_pct:+.1f}%")
