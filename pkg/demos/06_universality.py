"""Scaled finite kernels against the sine-kernel limits, and gap probabilities.

Run: python3 demos/06_universality.py
"""
import numpy as np

from bulkuniv.orthopoly import Potential, recurrence_table
from bulkuniv.universality_harness import GapSpec, gap_probability, scaled_kernel_error
from bulkuniv.widom_kernels import build_blocks

tab = recurrence_table(Potential.parse("k4=1"), 64, precision_bits=256)
for beta in (1, 4):
    print(f"beta = {beta}: entrywise sup errors on [-1, 1]^2")
    for N in (20, 40, 60):
        e = scaled_kernel_error(build_blocks(tab, None, N), tab, N, beta)
        print(f"  N = {N}: " + "  ".join(f"{v:.4f}" for v in e.ravel()))

print("\ngap probability of (-theta, theta), sine-kernel limits")
print(" theta   beta=1    beta=2    beta=4")
for t in np.linspace(0.1, 1.0, 4):
    p = [gap_probability(GapSpec(t, beta=b)) for b in (1, 2, 4)]
    print(f" {t:.2f}   " + "  ".join(f"{v:.6f}" for v in p))

bl = build_blocks(tab, None, 40)
for beta in (1, 2, 4):
    spec = GapSpec(0.5, beta=beta)
    fin = gap_probability(spec, "finite", bl, tab, 40)
    print(f"theta = 0.5, beta = {beta}: finite N = 40 {fin:.5f}  limit {gap_probability(spec):.5f}")
