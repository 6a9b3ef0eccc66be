"""Compiled pairwise scans shared by the metric and embedding modules.

All scans walk the strict upper triangle in row-major order, so witnesses
are the first maximising pair encountered.  Distances arrive in row blocks
so that models whose full matrix would not fit in memory can still be
scanned.
"""

import numpy as np
from numba import njit

# entries per distance block handed to the kernels
BLOCK_ENTRIES = 1 << 22


@njit(cache=True)
def lip_block(F, D, row0, out):
    """Update ``out[k]`` with max |F[i,k]-F[j,k]| / D[i-row0, j] over j > i."""
    c = D.shape[0]
    n = D.shape[1]
    m = F.shape[1]
    for a in range(c):
        i = row0 + a
        for j in range(i + 1, n):
            dij = D[a, j]
            for k in range(m):
                num = abs(F[i, k] - F[j, k])
                if dij > 0.0:
                    r = num / dij
                elif num > 0.0:
                    r = np.inf
                else:
                    r = 0.0
                if r > out[k]:
                    out[k] = r


@njit(cache=True)
def lip_block_witness(f, D, row0, best, wi, wj):
    c = D.shape[0]
    n = D.shape[1]
    for a in range(c):
        i = row0 + a
        for j in range(i + 1, n):
            dij = D[a, j]
            num = abs(f[i] - f[j])
            if dij > 0.0:
                r = num / dij
            elif num > 0.0:
                r = np.inf
            else:
                r = 0.0
            if r > best[0]:
                best[0] = r
                wi[0] = i
                wj[0] = j


@njit(cache=True)
def vec_lip_block(P, D, row0, G, out):
    """Max over j > i of dual-norm(P[i]-P[j]) / D, dual norm given by rows of G.

    The dual norm of a difference ``v`` is ``max_g |<g, v>|``; for the
    Euclidean case ``G`` is empty and the 2-norm is used instead.
    """
    c = D.shape[0]
    n = D.shape[1]
    dim = P.shape[1]
    ng = G.shape[0]
    for a in range(c):
        i = row0 + a
        for j in range(i + 1, n):
            if ng == 0:
                s = 0.0
                for k in range(dim):
                    t = P[i, k] - P[j, k]
                    s += t * t
                num = np.sqrt(s)
            else:
                num = 0.0
                for g in range(ng):
                    s = 0.0
                    for k in range(dim):
                        s += G[g, k] * (P[i, k] - P[j, k])
                    s = abs(s)
                    if s > num:
                        num = s
            dij = D[a, j]
            if dij > 0.0:
                r = num / dij
            elif num > 0.0:
                r = np.inf
            else:
                r = 0.0
            if r > out[0]:
                out[0] = r
