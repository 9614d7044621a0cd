"""Exact singularity testing for integer matrices.

Floating-point determinants near zero cannot certify singularity, so
invertibility is decided over prime fields: a matrix that is singular
over the rationals is singular modulo every prime, while a nonsingular
integer matrix vanishes modulo a given prime with probability on the
order of m/prime. Verdicts are taken modulo two distinct primes; in the
(astronomically rare) event that they disagree, an exact fraction-free
big-integer elimination settles it.

The primes sit just below 2^31 so that products of two residues fit in
int64 and the elimination stays vectorized.
"""

from __future__ import annotations

import numpy as np

PRIMES = (2147483647, 2147483629)


def rank_mod_prime(a: np.ndarray, prime: int) -> int:
    """Rank of an integer matrix over GF(prime), by Gaussian elimination."""
    a = np.mod(np.asarray(a, dtype=np.int64), prime)
    n_rows, n_cols = a.shape
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        pivots = np.flatnonzero(a[r:, c])
        if pivots.size == 0:
            continue
        piv = r + pivots[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), -1, prime)
        a[r, c:] = a[r, c:] * inv % prime
        below = np.flatnonzero(a[r + 1 :, c])
        if below.size:
            rows = r + 1 + below
            # residues < 2^31, so the outer product fits in int64
            a[rows, c:] = (a[rows, c:] - np.outer(a[rows, c], a[r, c:])) % prime
        r += 1
    return r


def _full_rank_mod(a: np.ndarray, prime: int) -> bool:
    """Early-exit full-rank test for a square matrix over GF(prime)."""
    a = np.mod(np.asarray(a, dtype=np.int64), prime)
    m = a.shape[0]
    for c in range(m):
        pivots = np.flatnonzero(a[c:, c])
        if pivots.size == 0:
            return False
        piv = c + pivots[0]
        if piv != c:
            a[[c, piv]] = a[[piv, c]]
        inv = pow(int(a[c, c]), -1, prime)
        a[c, c:] = a[c, c:] * inv % prime
        below = np.flatnonzero(a[c + 1 :, c])
        if below.size:
            rows = c + 1 + below
            a[rows, c:] = (a[rows, c:] - np.outer(a[rows, c], a[c, c:])) % prime
    return True


def det_exact(a: np.ndarray) -> int:
    """Exact integer determinant by Bareiss fraction-free elimination."""
    mat = [[int(v) for v in row] for row in np.asarray(a)]
    m = len(mat)
    if m == 0 or any(len(row) != m for row in mat):
        raise ValueError("det_exact requires a nonempty square matrix")
    sign = 1
    prev = 1
    for k in range(m - 1):
        if mat[k][k] == 0:
            swap = next((i for i in range(k + 1, m) if mat[i][k] != 0), None)
            if swap is None:
                return 0
            mat[k], mat[swap] = mat[swap], mat[k]
            sign = -sign
        for i in range(k + 1, m):
            for j in range(k + 1, m):
                mat[i][j] = (mat[i][j] * mat[k][k] - mat[i][k] * mat[k][j]) // prev
            mat[i][k] = 0
        prev = mat[k][k]
    return sign * mat[m - 1][m - 1]


def is_invertible(a: np.ndarray) -> bool:
    """Exact invertibility verdict for a square integer matrix.

    Full rank modulo the first prime already proves a nonzero
    determinant, so the second prime is only consulted when the first
    says singular; if the two primes disagree, the exact big-integer
    determinant decides.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if _full_rank_mod(a, PRIMES[0]):
        return True
    if not _full_rank_mod(a, PRIMES[1]):
        return False
    return det_exact(a) != 0
