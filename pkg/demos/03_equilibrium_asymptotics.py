"""Equilibrium density data for V = x^(2m) and the integrals I(q).

Run: python3 demos/03_equilibrium_asymptotics.py
"""
from bulkuniv.asymptotics import density_normalization, h_coeffs, i_q, theta_eval

for m in (1, 2, 3, 5):
    coeffs = ", ".join(str(c) for c in h_coeffs(m))
    print(f"m = {m}: h coefficients in x^2 = [{coeffs}]")
    print(f"        theta(1/2) = {theta_eval(m, 0.5):.12f}, density mass = {density_normalization(m):.15f}")

print("\n m    I(1)          I(3)          I~(3) = m I(3) - 1/2")
for m in (2, 5, 10, 20, 50):
    i1, _ = i_q(m, 1)
    i3, t3 = i_q(m, 3)
    print(f"{m:3d}  {i1: .10f}  {i3: .10f}  {t3: .6f}")
