import json

import numpy as np
import pytest

from linfty import solutions as S
from linfty import verify as V
from linfty.report import Report, point_rows

TOP_KEYS = ["map", "operator", "params", "n", "samples", "aggregates", "boundary", "inclusion",
            "oracle", "tolerances", "members", "distances", "verdict"]


def tiny_report(residual, flags=None):
    residual = np.asarray(residual, dtype=float)
    flags = flags or [[] for _ in residual]
    include = np.array([not f for f in flags])
    pts = point_rows(np.ones((residual.size, 2)), residual, residual, flags)
    return Report("m", "op", {}, 2, {"count": residual.size}, pts,
                  aggregates=Report.aggregate(residual, include))


class TestAggregate:
    def test_values(self):
        agg = Report.aggregate([1.0, 2.0, 3.0, 100.0], [True, True, True, False])
        assert agg["max"] == 3.0 and agg["mean"] == 2.0
        assert agg["included"] == 3 and agg["excluded"] == 1

    def test_non_finite_counted(self):
        agg = Report.aggregate([1.0, np.inf, np.nan], [True] * 3)
        assert agg["non_finite"] == 2 and agg["max"] == 1.0

    def test_empty(self):
        agg = Report.aggregate([np.nan], [True])
        assert agg["max"] is None


class TestSerialisation:
    def test_null_for_non_finite(self):
        data = json.loads(tiny_report([0.5, np.inf, np.nan]).to_json())
        assert data["samples"]["residual"] == [0.5, None, None]
        assert "Infinity" not in tiny_report([np.inf]).to_json()

    def test_same_keys_for_every_kind(self):
        samples = V.sample_punctured_ball(2, 2, 4)
        from linfty.inclusion import scan_inclusion
        reports = [
            V.residual_report("q-infinity", S.power_map(1.0, 2), samples),
            scan_inclusion(S.power_map(1.0, 2), samples, "K", 2.5),
            V.nonuniqueness_demo("q-infinity", [0.5, 1.0], 2, samples=samples),
        ]
        for rep in reports:
            assert list(json.loads(rep.to_json())) == TOP_KEYS

    def test_aggregates_recomputable(self):
        samples = V.sample_punctured_ball(2)
        pts = np.array([[0.1, 0.1], [0.1, -0.2]])
        for rep in (V.residual_report("q-infinity", S.power_map(2.0, 2), samples),
                    V.residual_report("infinity-laplacian", S.trig_map(), pts)):
            data = json.loads(rep.to_json())
            s = data["samples"]
            vals = np.array([np.inf if v is None else v for v in s["normalized_residual"]])
            include = [not f for f in s["flags"]]
            again = Report.aggregate(vals, include)
            for key in ("max", "mean", "p99", "included"):
                assert again[key] == data["aggregates"][key]

    def test_csv_round_trip(self, tmp_path):
        rep = V.residual_report("linear", S.mu_map(2.0, 2), V.sample_punctured_ball(2, 3, 4), mu=2.0)
        rep.to_csv(tmp_path / "r.csv")
        data = np.genfromtxt(tmp_path / "r.csv", delimiter=",", skip_header=1, usecols=(0, 1, 2, 3))
        np.testing.assert_array_equal(data[:, :2], rep.points.x)
        np.testing.assert_array_equal(data[:, 3], rep.points.normalized)

    def test_summary(self):
        rep = V.residual_report("q-infinity", S.power_map(1.0, 2), V.sample_punctured_ball(2, 2, 4))
        assert rep.summary().startswith("PASS q-infinity map=power n=2 max=")

    def test_reproducible(self, tmp_path):
        a = V.residual_report("q-infinity", S.power_map(0.5, 3), V.sample_punctured_ball(3, seed=5))
        b = V.residual_report("q-infinity", S.power_map(0.5, 3), V.sample_punctured_ball(3, seed=5))
        assert a.to_json() == b.to_json()
        a.to_json(tmp_path / "a.json")
        assert json.loads((tmp_path / "a.json").read_text())["verdict"] == "pass"


@pytest.mark.parametrize("flag", ["interface-band", "near-interface"])
def test_flagged_points_excluded(flag):
    rep = tiny_report([1e-12, 5.0], [[], [flag]])
    assert rep.aggregates["max"] == 1e-12
    assert rep.points.residual[1] == 5.0
