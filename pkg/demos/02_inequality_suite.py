"""Functional inequalities over a randomized ensemble, in 1D/2D/3D.

Each inequality is checked with both sides computed independently; the
reported margin is (rhs - lhs) / max(|lhs|, |rhs|), so positive means the
inequality holds with room to spare.
"""

from qnslab import SuiteConfig, run_inequality_suite

cfg = SuiteConfig(
    seeds=tuple(range(20)),
    grids=((128,), (32, 32), (16, 16, 16)),
    modes=5,
    floor=1.0,
    checks=("jungel-quartic", "jungel-hessian", "grad6", "div-vs-D"),
)
report = run_inequality_suite(cfg)

print(f"overall pass: {report.overall_pass}")
print(f"{'check':<16} {'count':>6} {'failures':>9} {'worst margin':>14} "
      f"{'at (seed, grid)':>18}")
for agg in report.aggregates():
    print(f"{agg.check:<16} {agg.count:>6d} {agg.failures:>9d} "
          f"{agg.worst_margin:>14.3e} "
          f"{f'({agg.worst_seed}, {agg.worst_grid})':>18}")
