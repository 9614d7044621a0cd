"""Sweep orchestration: seeding, report schema, figure tables."""

import numpy as np
import pytest

from flycap.data import SplitSpec, save_csv, synth_blobs
from flycap.experiments import (
    ExperimentReport,
    GridPoint,
    SweepSpec,
    SynthSpec,
    fig_tables,
    run_sweep,
)
from flycap.svm import TrainSpec


def tiny_spec(grid, repeats=2, **overrides):
    """Small synthetic sweep that runs in well under a second per cell."""
    fields = dict(
        grid=tuple(grid),
        synth=SynthSpec(
            num_classes=3, per_class=12, dim=16, center_scale=2.0,
            noise_sigma=0.3, seed=5,
        ),
        repeats=repeats,
        split=SplitSpec(train_fraction=0.75, seed=1),
        train=TrainSpec(lambda_=1e-3, epochs=4, seed=2),
        seed=99,
    )
    fields.update(overrides)
    return SweepSpec(**fields)


def strip_timing(report):
    return {
        "spec": report.spec_echo,
        "baseline": report.baseline,
        "records": [
            {k: v for k, v in rec.items() if k != "train_seconds"}
            for rec in report.records
        ],
    }


class TestGridPoint:
    def test_baseline_ignores_transform_params(self):
        GridPoint(variant="baseline")

    def test_project_requires_p_and_n(self):
        with pytest.raises(ValueError):
            GridPoint(variant="project", p=0.05)
        with pytest.raises(ValueError):
            GridPoint(variant="project", n=100)

    def test_cap_requires_k(self):
        with pytest.raises(ValueError):
            GridPoint(variant="cap", p=0.05, n=100)

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            GridPoint(variant="mystery")


class TestSweepSpec:
    def test_requires_exactly_one_source(self):
        with pytest.raises(ValueError):
            SweepSpec(grid=(GridPoint(variant="baseline"),))
        with pytest.raises(ValueError):
            SweepSpec(
                grid=(GridPoint(variant="baseline"),),
                dataset_path="x.csv",
                synth=SynthSpec(),
            )

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec(grid=(), synth=SynthSpec())


class TestRunSweep:
    def test_baseline_grid_point_matches_report_baseline(self):
        """A grid holding only the no-transform point reproduces the
        canonical baseline protocol."""
        report = run_sweep(tiny_spec([GridPoint(variant="baseline")]))
        rec = report.records[0]
        assert rec["variant"] == "baseline"
        assert rec["acc_mean"] == pytest.approx(report.baseline["acc_mean"], abs=1e-12)
        assert rec["acc_std"] == pytest.approx(report.baseline["acc_std"], abs=1e-12)

    def test_deterministic_modulo_timing(self):
        spec = tiny_spec(
            [GridPoint(variant="project", p=0.1, n=32),
             GridPoint(variant="cap", p=0.1, n=32, k=8)]
        )
        a, b = run_sweep(spec), run_sweep(spec)
        assert strip_timing(a) == strip_timing(b)

    def test_record_schema(self):
        report = run_sweep(tiny_spec([GridPoint(variant="cap", p=0.1, n=32, k=8)]))
        rec = report.records[0]
        assert list(rec.keys()) == [
            "p", "n", "k", "sigma", "variant",
            "acc_mean", "acc_std", "train_seconds", "sparsity",
        ]
        assert 0.0 <= rec["acc_mean"] <= 1.0
        assert rec["train_seconds"] >= 0.0

    def test_cap_sparsity_is_k_over_n(self):
        report = run_sweep(tiny_spec([GridPoint(variant="cap", p=0.1, n=32, k=8)]))
        assert report.records[0]["sparsity"] == pytest.approx(8 / 32)

    def test_k_zero_sparsity_and_chance_accuracy(self):
        report = run_sweep(tiny_spec([GridPoint(variant="cap", p=0.1, n=32, k=0)]))
        rec = report.records[0]
        assert rec["sparsity"] == 0.0
        assert rec["acc_mean"] == pytest.approx(1.0 / 3.0, abs=0.01)

    def test_csv_source(self, tmp_path):
        d = synth_blobs(3, 10, 8, 2.0, 0.2, 3)
        path = tmp_path / "d.csv"
        save_csv(d, path)
        spec = tiny_spec([GridPoint(variant="baseline")], synth=None,
                         dataset_path=str(path))
        report = run_sweep(spec)
        assert report.spec_echo["dataset"] == str(path)

    def test_missing_dataset_rejected(self, tmp_path):
        missing = SweepSpec(
            grid=(GridPoint(variant="baseline"),),
            dataset_path=str(tmp_path / "missing.csv"),
        )
        with pytest.raises(FileNotFoundError):
            run_sweep(missing)

    def test_oversized_k_is_clamped_to_n(self):
        report = run_sweep(
            tiny_spec([GridPoint(variant="cap", p=0.1, n=4, k=100)], repeats=1)
        )
        assert report.records[0]["sparsity"] == pytest.approx(1.0)

    def test_failed_grid_point_carries_context(self, monkeypatch):
        """A failure inside one grid point aborts the sweep and names
        the point."""
        import flycap.experiments as experiments
        from flycap.experiments import SweepError

        original = experiments._run_cell

        def explode(base, point, spec, slot, repeat):
            if slot == 1:  # first real grid point; baseline uses slot 0
                raise ValueError("injected failure")
            return original(base, point, spec, slot, repeat)

        monkeypatch.setattr(experiments, "_run_cell", explode)
        with pytest.raises(SweepError, match="grid point 0"):
            run_sweep(tiny_spec([GridPoint(variant="baseline")], repeats=1))

    def test_noise_grid_three_variants(self):
        points = []
        for sigma in (0.0, 0.5):
            points.append(GridPoint(variant="baseline", noise_sigma=sigma))
            points.append(GridPoint(variant="project", p=0.1, n=32, noise_sigma=sigma))
            points.append(
                GridPoint(variant="cap", p=0.1, n=32, k=8, noise_sigma=sigma)
            )
        report = run_sweep(tiny_spec(points, repeats=1))
        rows = fig_tables(report, "noise")
        assert len(rows) == 6
        by_sigma = {}
        for row in rows:
            by_sigma.setdefault(row["noise"], []).append(row["variant"])
        assert all(len(v) == 3 for v in by_sigma.values())


class TestFigTables:
    def make_report(self):
        points = [
            GridPoint(variant="project", p=p, n=n)
            for p in (0.05, 0.2)
            for n in (16, 32)
        ]
        return run_sweep(tiny_spec(points, repeats=1))

    def test_row_count_is_axis_times_variants(self):
        rows = fig_tables(self.make_report(), "p")
        assert len(rows) == 4  # 2 p values x 2 curves
        assert {row["variant"] for row in rows} == {"project,n=16", "project,n=32"}

    def test_axis_values_echoed(self):
        rows = fig_tables(self.make_report(), "p")
        assert sorted({row["p"] for row in rows}) == [0.05, 0.2]
        assert all(row["repeats"] == 1 for row in rows)

    def test_absent_axis_rejected(self):
        report = self.make_report()
        with pytest.raises(ValueError, match="absent"):
            fig_tables(report, "k")

    def test_unknown_axis_rejected(self):
        with pytest.raises(ValueError, match="unknown axis"):
            fig_tables(self.make_report(), "sigma")

    def test_empty_report_rejected(self):
        empty = ExperimentReport(spec_echo={}, baseline={}, records=[])
        with pytest.raises(ValueError, match="no records"):
            fig_tables(empty, "p")


class TestReportJson:
    def test_schema_keys(self):
        report = run_sweep(tiny_spec([GridPoint(variant="cap", p=0.1, n=32, k=4)]))
        obj = report.to_json_obj()
        assert set(obj.keys()) == {"spec", "baseline", "records"}
        assert set(obj["baseline"].keys()) == {"acc_mean", "acc_std"}
        assert set(obj["records"][0].keys()) == {
            "p", "n", "k", "sigma", "variant",
            "acc_mean", "acc_std", "train_seconds", "sparsity",
        }
