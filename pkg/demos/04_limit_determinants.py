"""Limiting matrices T_{m-1}: determinants by two routes and the norm-bound chain.

Run: python3 demos/04_limit_determinants.py
"""
from bulkuniv.limit_determinants import certify, det_report

print(" m   det T_m'          det T_(m-1)       relative gap")
for m in range(2, 15):
    r = det_report(m)
    print(f"{m:2d}  {r['det_Tm_prime']: .12f}  {r['det_Tm_minus1']: .12f}  {r['relative_gap']:.1e}")

print("\nbound routes (value, criterion, pass):")
for m in (2, 20, 40, 60, 120):
    for b in certify(m):
        print(f"  m = {m:3d}  {b.route:8s} {b.bound_value:.6f}  {b.criterion:26s} {b.passes}")
