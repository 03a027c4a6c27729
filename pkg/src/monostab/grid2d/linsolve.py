"""Sparse direct solves, falling back to algebraic multigrid for very large systems."""
from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

DIRECT_LIMIT = 250_000


def factor(A, spd: bool = False):
    """Return a function solving A x = b (b may be a matrix of right-hand sides)."""
    A = sparse.csc_matrix(A)
    n = A.shape[0]
    if n <= DIRECT_LIMIT or not spd:
        lu = spla.splu(A, permc_spec="MMD_AT_PLUS_A")
        return lu.solve
    import pyamg

    ml = pyamg.smoothed_aggregation_solver(A.tocsr(), symmetry="symmetric")

    def solve(b):
        b = np.asarray(b)
        if b.ndim == 1:
            return ml.solve(b, tol=1e-13, accel="cg", maxiter=500)
        return np.column_stack([ml.solve(b[:, j], tol=1e-13, accel="cg", maxiter=500) for j in range(b.shape[1])])

    return solve
