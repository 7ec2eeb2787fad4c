"""
Convergence study across the perturbation range
===============================================

Fills the full (epsilon, N) error grid for the model problem and prints
it in the usual two-row-per-epsilon layout: maximum nodal errors above,
observed orders below.  Away from the resonance band around 2^-6 the
orders settle at 2 (the mesh pays a log factor that the observed order
hides at these sizes); the last pair of lines is the epsilon-uniform
summary taken as the worst row per column.
"""

import numpy as np

from spfide import example1, run_study

problem, exact = example1()
epsilons = [2.0 ** -k for k in (0, 6, 12, 18, 24)]
ns = [64, 128, 256, 512, 1024]

report = run_study(problem, exact, epsilons, ns, solver="both")

header = f"{'epsilon':>10}" + "".join(f"{f'N={n}':>12}" for n in ns)
print(header)
for i, k in enumerate((0, 6, 12, 18, 24)):
    errors = "".join(f"{e:12.4e}" for e in report.errors[i])
    rates = "".join(
        "            " if np.isnan(r) else f"{r:12.2f}" for r in report.rates[i]
    )
    print(f"{f'2^-{k}':>10}{errors}")
    print(f"{'':>10}{rates}")

print(f"{'e^N':>10}" + "".join(f"{e:12.4e}" for e in report.uniform_errors))
print(f"{'p^N':>10}" + "".join(
    "            " if np.isnan(r) else f"{r:12.2f}" for r in report.uniform_rates
))

print()
print("worst cross-solver gap over the grid:",
      f"{np.nanmax(report.cross_check_gaps):.2e}")
print("note the 2^-6 row: its transition point sits where the layer and")
print("mesh widths interfere, so the error dips and rebounds before the")
print("asymptotic order takes over; every other row is already clean")
