"""
Numerical verification of bulk universality for orthogonal and symplectic
random-matrix ensembles with polynomial weights.

Modules
-------
orthopoly
    Extended-precision recurrence coefficients, wave functions and the
    epsilon transform for weights exp(-V).
widom_kernels
    Matrix elements of D and epsilon, the finite-rank correction blocks, and
    the beta = 1, 4 scalar and matrix kernels.
asymptotics
    Equilibrium-measure data, the integrals I(q) and limiting block patterns.
limit_determinants
    Limiting matrices T_m', T_{m-1}, their determinants and norm bounds.
riccati_bounds
    The Riccati structure of y_m and interval-style quadrature ledgers.
universality_harness
    Scaled-kernel comparisons, gap probabilities and cluster functions.
cli
    Batch driver with CSV/JSON reports.
"""

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "orthopoly",
    "widom_kernels",
    "asymptotics",
    "limit_determinants",
    "riccati_bounds",
    "universality_harness",
    "cli",
]
