"""The two-stage signal transform: sparse sign projection, then cap.

A transform maps an m-vector to an n-vector (typically n >> m) by
multiplying with a random sign matrix and zeroing everything but the
k largest-magnitude coordinates, mimicking an expand-then-inhibit
sensing circuit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import projection
from .cap import cap
from .seeding import check_seed


@dataclass(frozen=True)
class TransformConfig:
    """Everything needed to rebuild one transform bit-for-bit."""

    input_dim: int
    output_dim: int
    bernoulli_p: float
    cap_k: int
    seed: int

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be positive, got {self.input_dim}")
        if self.output_dim < 1:
            raise ValueError(f"output_dim must be positive, got {self.output_dim}")
        if not 0.0 < self.bernoulli_p < 1.0:
            raise ValueError(f"bernoulli_p must lie in (0, 1), got {self.bernoulli_p}")
        if not 0 <= self.cap_k <= self.output_dim:
            raise ValueError(
                f"cap_k must lie in [0, output_dim], got {self.cap_k} with n={self.output_dim}"
            )
        check_seed(self.seed)

    def to_kv_text(self) -> str:
        """Flat key-value block (keys m, n, p, k, seed) for report embedding."""
        return (
            f"m={self.input_dim}\n"
            f"n={self.output_dim}\n"
            f"p={self.bernoulli_p!r}\n"
            f"k={self.cap_k}\n"
            f"seed={self.seed}\n"
        )

    @classmethod
    def from_kv_text(cls, text: str) -> "TransformConfig":
        fields = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
        missing = {"m", "n", "p", "k", "seed"} - fields.keys()
        if missing:
            raise ValueError(f"key-value block missing {sorted(missing)}")
        return cls(
            input_dim=int(fields["m"]),
            output_dim=int(fields["n"]),
            bernoulli_p=float(fields["p"]),
            cap_k=int(fields["k"]),
            seed=int(fields["seed"]),
        )


@dataclass(eq=False)
class Transform:
    """A built transform; immutable and safe for concurrent use."""

    config: TransformConfig
    matrix: projection.SparseSignMatrix

    def forward(self, s: np.ndarray) -> np.ndarray:
        """Project s and keep the cap_k largest-magnitude coordinates."""
        return cap(projection.apply(self.matrix, s), self.config.cap_k).vector

    def forward_batch(self, rows) -> np.ndarray:
        """Row-wise forward; preserves row order.

        Every row goes through the exact single-vector path, so a batch
        equals the per-row loop bit-for-bit.
        """
        rows = _as_2d(rows, self.config.input_dim)
        if rows.shape[0] == 0:
            return np.empty((0, self.config.output_dim))
        return np.stack([self.forward(row) for row in rows])


def _as_2d(rows, expected_dim: int) -> np.ndarray:
    arr = np.asarray(rows, dtype=object if _is_ragged(rows) else np.float64)
    if arr.dtype == object:
        raise ValueError("ragged rows: every row must have the same length")
    if arr.ndim != 2:
        if arr.ndim == 1 and arr.shape[0] == 0:
            return arr.reshape(0, expected_dim)
        raise ValueError(f"expected a 2-D batch, got shape {arr.shape}")
    if arr.shape[1] != expected_dim:
        raise ValueError(
            f"rows have length {arr.shape[1]}, transform expects {expected_dim}"
        )
    return arr


def _is_ragged(rows) -> bool:
    try:
        np.asarray(rows, dtype=np.float64)
        return False
    except ValueError:
        return True


def build(config: TransformConfig) -> Transform:
    """Sample the projection matrix for a config; deterministic in the seed."""
    matrix = projection.sample_matrix(
        config.output_dim, config.input_dim, config.bernoulli_p, config.seed
    )
    return Transform(config=config, matrix=matrix)
