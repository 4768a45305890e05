"""Inner sweep kernels for the coordinate-descent solvers.

Everything here works on the Gram ("covariance update") formulation: with
``G = X'X/n`` and ``c = X'(y - Xb)/n`` maintained incrementally, one
coordinate update costs O(q) instead of O(n).  ``G`` is symmetric, so row
slices stand in for column slices and stay contiguous.

The kernels are plain Python/NumPy and are JIT-compiled by numba when it is
installed.  Both paths execute the identical source, so results agree to the
last bit; the test suite checks that explicitly.
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without the extra
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        return wrap


@njit(cache=True, nogil=True)
def enet_sweep(G, c, beta, order, lam1, lam2):
    """One elastic-net coordinate sweep over ``order``; returns max |change|.

    Minimizes 0.5 b'Gb - c0'b + lam1*sum|b_j| + lam2*sum b_j^2 one coordinate
    at a time.  ``c`` must hold X'(y - Xb)/n on entry and is updated in place
    alongside ``beta``.
    """
    maxd = 0.0
    for t in range(order.shape[0]):
        j = order[t]
        gjj = G[j, j]
        denom = gjj + 2.0 * lam2
        if denom <= 0.0:
            # zero-variance column (or degenerate ridge weight): leave at 0
            continue
        z = c[j] + gjj * beta[j]
        if z > lam1:
            bnew = (z - lam1) / denom
        elif z < -lam1:
            bnew = (z + lam1) / denom
        else:
            bnew = 0.0
        d = bnew - beta[j]
        if d != 0.0:
            c -= G[j] * d
            beta[j] = bnew
            ad = abs(d)
            if ad > maxd:
                maxd = ad
    return maxd


@njit(cache=True, nogil=True)
def group_sweep(G, c, beta, starts, ends, lips, weights, lam):
    """One block proximal-gradient sweep over contiguous groups.

    Each block takes a gradient step with its own Lipschitz constant
    ``lips[g]`` = largest eigenvalue of G_gg, followed by the group-soft-
    threshold prox.  A fixed point of this map satisfies the group-lasso
    KKT conditions exactly.
    """
    maxd = 0.0
    for g in range(starts.shape[0]):
        a = starts[g]
        b = ends[g]
        L = lips[g]
        if L <= 0.0:
            continue
        u = beta[a:b] + c[a:b] / L
        nu = np.sqrt(np.sum(u * u))
        thr = lam * weights[g] / L
        if nu <= thr:
            bnew = np.zeros(b - a)
        else:
            bnew = u * (1.0 - thr / nu)
        d = bnew - beta[a:b]
        ad = np.max(np.abs(d))
        if ad > 0.0:
            c -= np.dot(d, G[a:b])
            beta[a:b] = bnew
            if ad > maxd:
                maxd = ad
    return maxd
