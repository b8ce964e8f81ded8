"""Jacobi-preconditioned conjugate gradients, numpy edition.

Mirrors the compiled kernel in _pcg.pyx step for step: same update order,
same convergence test, same flags.  Keep the two in sync.  The matrix
product goes through scipy's sequential CSR kernel, everything else is
plain numpy.

Flags: 0 converged, 1 iteration cap reached, 2 non-positive curvature.
"""

import numpy as np
import scipy.sparse as sp

BACKEND = "python"


def pcg(indptr, indices, data, diag, b, tol, max_iter):
    n = b.shape[0]
    x = np.zeros(n)
    bnorm = np.sqrt(np.dot(b, b))
    if bnorm == 0.0:
        return x, 0.0, 0, 0

    matrix = sp.csr_matrix((data, indices, indptr), shape=(n, n))
    inv_diag = 1.0 / diag
    r = b.astype(np.float64, copy=True)
    z = r * inv_diag
    p = z.copy()
    rz = float(np.dot(r, z))
    best = float(np.sqrt(np.dot(r, r))) / bnorm

    for k in range(1, max_iter + 1):
        ap = matrix @ p
        p_ap = float(np.dot(p, ap))
        if p_ap <= 0.0:
            return x, best, k - 1, 2
        alpha = rz / p_ap
        x += alpha * p
        r -= alpha * ap
        res = float(np.sqrt(np.dot(r, r))) / bnorm
        if res < best:
            best = res
        if res <= tol:
            return x, res, k, 0
        z = r * inv_diag
        rz_next = float(np.dot(r, z))
        p = z + (rz_next / rz) * p
        rz = rz_next

    return x, best, max_iter, 1
