"""Finite-N kernels for the orthogonal and symplectic ensembles with weight exp(-x^4).

Shows the densities against the unitary density K_N(x, x) and the size of the
finite-rank correction that separates them.

Run: python3 demos/02_widom_kernels.py
"""
import numpy as np

from bulkuniv.orthopoly import Potential, recurrence_table
from bulkuniv.widom_kernels import WidomKernel, build_blocks, cd_kernel

N = 40
tab = recurrence_table(Potential.parse("k4=1"), 64, precision_bits=256)
blocks = build_blocks(tab, None, N)
k1, k4 = WidomKernel(blocks, tab, 1), WidomKernel(blocks, tab, 4)

print(f"N = {N}: densities on a few points")
print("   x      K_N(x,x)   S_1(x,x)   S_4(x,x)/2 (N/2 particles)")
for x in (0.0, 0.5, 1.0, 1.5, 2.0):
    X = np.array(x)
    print(f"{x:5.2f}  {float(cd_kernel(tab, N, X, X)):9.5f}  {float(k1.scalar(X, X)):9.5f}  "
          f"{0.5 * float(k4.scalar(X, X)):9.5f}")

grid = np.linspace(-1, 1, 5)
M = k1.matrix(grid[:, None], grid[None, :])
print("\nbeta = 1 matrix kernel entries on a 5 x 5 grid (S block):")
print(np.array2string(M.S, precision=4, suppress_small=True))
