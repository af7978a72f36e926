"""Empirical remainder bounds for the truncated exponential polynomials.

On the closed left half-disk the truncations obey factorial remainder
bounds, and the normalized tails stay below sqrt(1.04) once k >= 5. This
script samples the half-disk and prints the worst slack seen per bound
(slack = bound - observed). At large k the bound 1/(k+1)! sits far below
double-precision roundoff, so slacks down to -1e-12 count as holding.

Run:  python demos/02_taylor_remainders.py
"""

import json
import math

from odeql import truncated_exp, verify_remainder_bounds

report = verify_remainder_bounds(samples=5000, k_range=(5, 20), seed=1)

print(f"samples: {report['samples']} random + boundary cases, "
      f"k = {report['k_min']}..{report['k_max']}\n")
print(f"{'bound':<18} {'worst slack':>12}   at")
for name, entry in report["bounds"].items():
    arg = entry["argmax"]
    where = f"z = {arg['z_re']:+.3f}{arg['z_im']:+.3f}i, k = {arg['k']}"
    if "b" in arg:
        where += f", b = {arg['b']}"
    print(f"{name:<18} {entry['worst_slack']:12.3e}   {where}")

print(f"\nall bounds held: {report['passed']}")

# the classic scalar data point: T_5 at z = -1
err = abs(truncated_exp(-1.0, 5) - math.exp(-1.0))
print(f"\n|T_5(-1) - e^-1| = {err:.10f} <= 1/6! = {1 / math.factorial(6):.10f}")

print("\nfull report as JSON:")
print(json.dumps({k: v for k, v in report.items() if k != "bounds"}, indent=2))
