"""Projection-then-cap composition: shapes, sparsity, determinism."""

import numpy as np
import pytest

from flycap.projection import apply
from flycap.transform import Transform, TransformConfig, build


def small_config(**overrides):
    fields = dict(input_dim=30, output_dim=120, bernoulli_p=0.1, cap_k=15, seed=5)
    fields.update(overrides)
    return TransformConfig(**fields)


class TestConfig:
    def test_paper_scale_build(self):
        t = build(
            TransformConfig(
                input_dim=433, output_dim=2000, bernoulli_p=0.05, cap_k=200, seed=1
            )
        )
        assert t.matrix.shape == (2000, 433)
        assert t.matrix.seed == t.config.seed

    def test_validation(self):
        with pytest.raises(ValueError):
            TransformConfig(input_dim=0, output_dim=5, bernoulli_p=0.1, cap_k=1, seed=0)
        with pytest.raises(ValueError):
            TransformConfig(input_dim=5, output_dim=5, bernoulli_p=0.1, cap_k=6, seed=0)
        with pytest.raises(ValueError):
            TransformConfig(input_dim=5, output_dim=5, bernoulli_p=0.0, cap_k=2, seed=0)
        with pytest.raises(ValueError):
            TransformConfig(input_dim=5, output_dim=5, bernoulli_p=0.1, cap_k=-1, seed=0)

    def test_kv_round_trip(self):
        config = small_config()
        assert TransformConfig.from_kv_text(config.to_kv_text()) == config

    def test_kv_missing_key(self):
        with pytest.raises(ValueError):
            TransformConfig.from_kv_text("m=3\nn=5\n")


class TestForward:
    def test_zero_input_gives_zero_output(self):
        t = build(small_config())
        out = t.forward(np.zeros(30))
        assert np.array_equal(out, np.zeros(120))

    def test_cap_zero_gives_zero_output(self):
        t = build(small_config(cap_k=0))
        out = t.forward(np.random.default_rng(0).standard_normal(30))
        assert np.array_equal(out, np.zeros(120))

    def test_matches_projection_plus_cap(self):
        t = build(small_config())
        x = np.random.default_rng(1).standard_normal(30)
        projected = apply(t.matrix, x)
        out = t.forward(x)
        kept = out != 0.0
        assert np.array_equal(out[kept], projected[kept])

    def test_sparsity_budget(self):
        t = build(
            TransformConfig(
                input_dim=433, output_dim=2000, bernoulli_p=0.05, cap_k=200, seed=2
            )
        )
        out = t.forward(np.random.default_rng(3).standard_normal(433))
        nnz = int(np.sum(out != 0.0))
        assert nnz <= 200
        assert np.mean(out == 0.0) >= 0.9

    def test_full_cap_equals_raw_projection(self):
        t = build(small_config(cap_k=120))
        x = np.random.default_rng(4).standard_normal(30)
        assert np.array_equal(t.forward(x), apply(t.matrix, x))

    def test_deterministic_across_builds(self):
        config = small_config()
        a, b = build(config), build(config)
        rng = np.random.default_rng(5)
        for _ in range(100):
            x = rng.standard_normal(30)
            assert np.array_equal(a.forward(x), b.forward(x))

    def test_errors(self):
        t = build(small_config())
        with pytest.raises(ValueError):
            t.forward(np.zeros(29))
        with pytest.raises(ValueError):
            t.forward(np.full(30, np.nan))


class TestForwardBatch:
    def test_empty_batch(self):
        t = build(small_config())
        out = t.forward_batch(np.empty((0, 30)))
        assert out.shape == (0, 120)

    def test_single_row_equals_forward(self):
        t = build(small_config())
        x = np.random.default_rng(6).standard_normal(30)
        assert np.array_equal(t.forward_batch(x[None, :])[0], t.forward(x))

    def test_batch_equals_per_row_loop(self):
        t = build(small_config())
        rows = np.random.default_rng(7).standard_normal((1000, 30))
        batch = t.forward_batch(rows)
        for i in range(0, 1000, 97):
            assert np.array_equal(batch[i], t.forward(rows[i]))
        assert batch.shape == (1000, 120)

    def test_ragged_rows_rejected(self):
        t = build(small_config())
        with pytest.raises(ValueError):
            t.forward_batch([[1.0] * 30, [1.0] * 29])

    def test_wrong_width_rejected(self):
        t = build(small_config())
        with pytest.raises(ValueError):
            t.forward_batch(np.zeros((4, 31)))
