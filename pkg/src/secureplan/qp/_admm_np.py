"""Pure-numpy backend for the splitting iteration.

Kept in lockstep with the Cython kernel in ``_admm_cy.pyx``: both implement
exactly the same relaxed iteration so results are interchangeable up to
floating-point rounding.
"""

import numpy as np
from scipy.linalg import cho_solve

BACKEND = "numpy"


def run_epoch(chol, P, q, A, AT, l, u, R, sigma, alpha, x, z, y, niters):
    """Run ``niters`` iterations in place on (x, z, y)."""
    for _ in range(niters):
        rhs = sigma * x - q + AT @ (R * z - y)
        x_t = cho_solve(chol, rhs, check_finite=False)
        z_t = A @ x_t
        x[:] = alpha * x_t + (1.0 - alpha) * x
        zr = alpha * z_t + (1.0 - alpha) * z
        v = zr + y / R
        np.clip(v, l, u, out=z)
        y += R * (zr - z)
