"""Sparse random sign matrices and their matrix-vector products.

The projection matrix has independent entries taking the value +1 or -1
each with probability p(1-p) and 0 otherwise, which is exactly the
distribution of the difference of two independent Bernoulli(p) draws.
Entries have mean zero and variance 2p(1-p). Only nonzeros are stored,
in compressed sparse row form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .seeding import check_seed

_MAX_POSITIONS = np.iinfo(np.int64).max


@dataclass
class EntryStats:
    """Empirical moments of a sampled matrix, over all positions."""

    zero_fraction: float
    mean: float
    variance: float
    sample_count: int


@dataclass(eq=False)
class SparseSignMatrix:
    """A {-1, 0, +1} random matrix in compressed sparse row storage.

    Rebuilding with identical (n_rows, n_cols, p, seed) reproduces
    bit-identical storage: row i is drawn from its own counter-derived
    stream, so generation order (or parallelism) cannot change the
    result. Instances are treated as immutable after construction.
    """

    n_rows: int
    n_cols: int
    p: float
    seed: int
    indptr: np.ndarray  # int64, length n_rows + 1
    indices: np.ndarray  # int64 column index per stored entry, sorted per row
    values: np.ndarray  # int8, each exactly -1 or +1
    _row_ids: np.ndarray | None = field(default=None, repr=False)

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    def to_dense(self) -> np.ndarray:
        """Dense float64 copy (for small matrices and oracle checks)."""
        out = np.zeros((self.n_rows, self.n_cols))
        rows = np.repeat(np.arange(self.n_rows), np.diff(self.indptr))
        out[rows, self.indices] = self.values
        return out

    def _cached_row_ids(self) -> np.ndarray:
        if self._row_ids is None:
            self._row_ids = np.repeat(np.arange(self.n_rows), np.diff(self.indptr))
        return self._row_ids


def _validate_structure(m: SparseSignMatrix) -> None:
    if m.indptr.shape != (m.n_rows + 1,) or m.indptr[0] != 0:
        raise ValueError("malformed indptr")
    if np.any(np.diff(m.indptr) < 0) or m.indptr[-1] != m.values.shape[0]:
        raise ValueError("malformed indptr")
    if m.indices.shape != m.values.shape:
        raise ValueError("indices/values length mismatch")
    if m.nnz:
        if not np.all(np.isin(m.values, (-1, 1))):
            raise ValueError("stored values must be exactly -1 or +1")
        if m.indices.min() < 0 or m.indices.max() >= m.n_cols:
            raise ValueError("column index out of range")
        for r in range(m.n_rows):
            cols = m.indices[m.indptr[r] : m.indptr[r + 1]]
            if cols.size > 1 and np.any(np.diff(cols) <= 0):
                raise ValueError(f"row {r}: column indices not strictly increasing")


def _row_generator(seed: int) -> tuple[np.random.Generator, "callable"]:
    """One reusable Philox generator plus a rekey(row) function.

    Row i's stream is Philox keyed by (seed, i) with the counter at
    zero, so any row can be regenerated independently of the others and
    of generation order; reusing a single bit-generator object just
    avoids per-row construction cost.
    """
    bg = np.random.Philox(key=0)
    gen = np.random.Generator(bg)
    template = bg.state

    def rekey(row: int) -> None:
        state = dict(template)
        state["state"] = {
            "counter": np.zeros(4, dtype=np.uint64),
            "key": np.array([seed, row], dtype=np.uint64),
        }
        state["buffer"] = np.zeros(4, dtype=np.uint64)
        state["buffer_pos"] = 4
        bg.state = state

    return gen, rekey


def sample_matrix(n_rows: int, n_cols: int, p: float, seed: int) -> SparseSignMatrix:
    """Draw a sparse sign matrix with i.i.d. difference-of-Bernoulli entries.

    Each entry is +1 with probability p(1-p), -1 with probability
    p(1-p), and 0 otherwise; that trinomial is distributionally equal to
    X - Y with X, Y independent Bernoulli(p), and sampling it directly
    halves the number of uniform draws. Row i comes from its own
    counter-based stream keyed by (seed, i), so the output is a pure
    function of (n_rows, n_cols, p, seed).
    """
    if n_rows < 1 or n_cols < 1:
        raise ValueError(f"dimensions must be positive, got {n_rows}x{n_cols}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly inside (0, 1), got {p}")
    if n_rows * n_cols > _MAX_POSITIONS:
        raise ValueError(f"{n_rows}x{n_cols} overflows the index type")
    seed = check_seed(seed)

    q = p * (1.0 - p)
    gen, rekey = _row_generator(seed)
    u = np.empty((n_rows, n_cols))
    for i in range(n_rows):
        rekey(i)
        gen.random(out=u[i])

    nz_rows, nz_cols = np.nonzero(u < 2.0 * q)
    values = np.where(u[nz_rows, nz_cols] < q, 1, -1).astype(np.int8)
    counts = np.bincount(nz_rows, minlength=n_rows).astype(np.int64)
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return SparseSignMatrix(
        n_rows, n_cols, p, seed, indptr, nz_cols.astype(np.int64), values
    )


def apply(m: SparseSignMatrix, x: np.ndarray) -> np.ndarray:
    """Exact sparse product M @ x, accumulated in float64.

    Accumulation uses a fixed bin-summation order, so the result is
    independent of thread configuration.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != m.n_cols:
        raise ValueError(f"expected a vector of length {m.n_cols}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input vector has non-finite entries")
    if m.nnz == 0:
        return np.zeros(m.n_rows)
    contrib = m.values * x[m.indices]
    return np.bincount(m._cached_row_ids(), weights=contrib, minlength=m.n_rows)


def entry_stats(m: SparseSignMatrix) -> EntryStats:
    """Exact empirical zero fraction, mean, and variance over all positions."""
    total = m.n_rows * m.n_cols
    nnz = m.nnz
    mean = float(m.values.sum(dtype=np.int64)) / total
    # values are +-1, so the mean square equals the nonzero fraction
    variance = nnz / total - mean * mean
    return EntryStats(
        zero_fraction=1.0 - nnz / total,
        mean=mean,
        variance=variance,
        sample_count=total,
    )


def submatrix(m: SparseSignMatrix, row_indices) -> SparseSignMatrix:
    """Extract rows in the given order; columns are untouched.

    The result keeps the parent's (p, seed) as provenance; it is not
    itself reproducible from those parameters alone.
    """
    row_indices = [int(r) for r in row_indices]
    if len(set(row_indices)) != len(row_indices):
        raise ValueError("row indices must be distinct")
    for r in row_indices:
        if not 0 <= r < m.n_rows:
            raise ValueError(f"row index {r} out of range for {m.n_rows} rows")

    chunks_cols = [m.indices[m.indptr[r] : m.indptr[r + 1]] for r in row_indices]
    chunks_vals = [m.values[m.indptr[r] : m.indptr[r + 1]] for r in row_indices]
    counts = np.array([c.size for c in chunks_cols], dtype=np.int64)
    indptr = np.zeros(len(row_indices) + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = (
        np.concatenate(chunks_cols) if indptr[-1] else np.empty(0, dtype=np.int64)
    )
    values = np.concatenate(chunks_vals) if indptr[-1] else np.empty(0, dtype=np.int8)
    return SparseSignMatrix(
        len(row_indices), m.n_cols, m.p, m.seed, indptr, indices, values
    )


def dump_matrix(m: SparseSignMatrix, path) -> None:
    """Write the text form: header `n m p seed`, then one `row col value` line per entry."""
    lines = [f"{m.n_rows} {m.n_cols} {m.p!r} {m.seed}"]
    rows = np.repeat(np.arange(m.n_rows), np.diff(m.indptr))
    for r, c, v in zip(rows, m.indices, m.values):
        lines.append(f"{r} {c} {v}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_matrix(path) -> SparseSignMatrix:
    """Read the text form written by dump_matrix; the round trip is lossless."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise ValueError(f"{path}: malformed header")
        n_rows, n_cols = int(header[0]), int(header[1])
        p, seed = float(header[2]), int(header[3])
        triples = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}: line {lineno}: expected `row col value`")
            triples.append((int(parts[0]), int(parts[1]), int(parts[2])))

    counts = np.zeros(n_rows, dtype=np.int64)
    for r, _, _ in triples:
        if not 0 <= r < n_rows:
            raise ValueError(f"{path}: row index {r} out of range")
        counts[r] += 1
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = np.empty(len(triples), dtype=np.int64)
    values = np.empty(len(triples), dtype=np.int8)
    cursor = indptr[:-1].copy()
    for r, c, v in triples:
        indices[cursor[r]] = c
        values[cursor[r]] = v
        cursor[r] += 1
    m = SparseSignMatrix(n_rows, n_cols, p, seed, indptr, indices, values)
    _validate_structure(m)
    return m
