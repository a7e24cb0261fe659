"""Recurrence coefficients for exp(-x^4) and their growth against the MRS number.

Run: python3 demos/01_recurrence_coefficients.py
"""
import numpy as np

from bulkuniv.asymptotics import mrs_leading
from bulkuniv.orthopoly import Potential, gram_matrix, recurrence_table

V = Potential.parse("k4=1")
tab = recurrence_table(V, 64, precision_bits=256)

print("j      b_j            c_j / 2       ratio")
for j in (5, 10, 20, 40, 60):
    half_c = mrs_leading(V, j)[0] / 2
    print(f"{j:3d}  {tab.b[j]:.10f}  {half_c:.10f}  {tab.b[j] / half_c:.5f}")

G = gram_matrix(tab, 40)
print(f"\northonormality defect up to degree 40: {np.max(np.abs(G - np.eye(41))):.2e}")
print(f"b_0 as stored (decimal string): {tab.b_str[0][:40]}...")
