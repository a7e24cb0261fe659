"""The function y_m, its Riccati residual, and the two quadrature ledgers.

Run: python3 demos/05_riccati_and_ledgers.py   (about 10 s)
"""
from bulkuniv.riccati_bounds import riccati_residual, verify_H_integral, verify_L_bound, y_m_profile

print(" m   theta_min   y_min       Riccati residual")
for m in range(2, 11):
    tmin, ymin, _ = y_m_profile(m)
    print(f"{m:2d}  {tmin:.6f}   {ymin:.6f}   {riccati_residual(m)['max_residual']:.1e}")

for title, (summary, seg) in (("L ledger", verify_L_bound()), ("H ledger", verify_H_integral())):
    print(f"\n{title}: value {summary.value:.5f} target {summary.target} pass {summary.passed}")
    for name, s in seg.items():
        print(f"  {name:12s} {s.value:.5f} +- {s.radius:.1e}  target {s.direction} {s.target}  pass {s.passed}")
