"""Winner-take-all capping: keep the k largest-magnitude entries.

The cap never increases any p-norm, never drops the largest entry (for
k >= 1), and its residual is controlled by
``|x - cap_k(x)|_2 <= |x|_p * (k+1)^(1/2 - 1/p)`` for p in (0, 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(eq=False)
class CapResult:
    """Capped vector plus the sorted indices that were kept.

    kept_indices always has min(k, len(x)) entries; when k exceeds the
    number of nonzeros, zero positions are kept to fill the budget.
    """

    vector: np.ndarray
    kept_indices: np.ndarray


def cap(x: np.ndarray, k: int) -> CapResult:
    """Zero all but the k largest-magnitude entries of x.

    Ties in magnitude are broken toward the lower index, which makes
    the operation deterministic and idempotent. k = 0 yields the zero
    vector; k >= len(x) is the identity. Selection uses an
    expected-linear-time partition of the magnitudes rather than a full
    sort.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input vector has non-finite entries")
    k = int(k)
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")

    n = x.shape[0]
    if k == 0:
        return CapResult(np.zeros(n), np.empty(0, dtype=np.int64))
    if k >= n:
        return CapResult(x.copy(), np.arange(n, dtype=np.int64))

    mags = np.abs(x)
    threshold = np.partition(mags, n - k)[n - k]
    kept = np.flatnonzero(mags > threshold)
    need = k - kept.size
    if need > 0:
        at_threshold = np.flatnonzero(mags == threshold)[:need]
        kept = np.sort(np.concatenate([kept, at_threshold]))
    out = np.zeros(n)
    out[kept] = x[kept]
    return CapResult(out, kept.astype(np.int64))


def cap_error_bound(norm_p_of_x: float, k: int, p_norm: float) -> float:
    """Closed-form bound on |x - cap_k(x)|_2 given |x|_p.

    Returns norm_p_of_x * (k+1)**(1/2 - 1/p_norm); valid for
    p_norm in (0, 2).
    """
    if not 0.0 < p_norm < 2.0:
        raise ValueError(f"p_norm must lie in (0, 2), got {p_norm}")
    if norm_p_of_x < 0.0:
        raise ValueError(f"norm must be non-negative, got {norm_p_of_x}")
    k = int(k)
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    return norm_p_of_x * float(k + 1) ** (0.5 - 1.0 / p_norm)
