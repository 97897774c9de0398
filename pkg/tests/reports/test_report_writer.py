import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import pytest

from src.config import config_loader
from src.reports.report_writer import (
    Report,
    ReportWriter,
    read_report,
    render_report,
    to_jsonable,
    trajectory_header,
)


@pytest.fixture(autouse=True)
def clear_config_cache():
    config_loader.clear_cache()
    yield
    config_loader.clear_cache()


@dataclass(frozen=True)
class _Stats:
    steps: int
    tolerance: float


class TestToJsonable:
    def test_numbers(self):
        assert to_jsonable(1 + 2j) == [1.0, 2.0]
        assert to_jsonable(Fraction(-1, 3)) == "-1/3"
        assert to_jsonable(np.float64(0.1)) == 0.1
        assert to_jsonable(np.int64(3)) == 3
        assert to_jsonable(np.bool_(True)) is True

    def test_non_finite_floats_become_strings(self):
        assert to_jsonable(float("nan")) == "nan"
        assert to_jsonable(-math.inf) == "-inf"

    def test_containers_and_dataclasses(self):
        payload = {"m": np.eye(2, dtype=complex), "s": _Stats(4, 1e-9), 1: (Fraction(1), None)}
        out = to_jsonable(payload)
        assert out["m"] == [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
        assert out["s"] == {"steps": 4, "tolerance": 1e-9}
        assert out["1"] == ["1", None]


class TestReport:
    def test_checks_decide_ok(self):
        """
        Tests that a report is ok only while every recorded defect is within its tolerance.
        """
        # Arrange
        report = Report("periods")

        # Act
        report.check("period", 1e-12, 1e-10)
        assert report.ok
        report.check("jacobian", 1e-3, 1e-6)

        # Assert
        assert not report.ok
        assert [c.name for c in report.failed()] == ["jacobian"]
        assert report.summary() == "periods: 1/2 checks failed (jacobian)"

    def test_exact_defects_pass_only_at_zero(self):
        report = Report("wallcross")
        assert report.check("pentagon_defect", Fraction(0), 0).ok
        assert not report.check("poisson_defect", Fraction(1, 10**9), 0).ok

    def test_non_finite_value_fails(self):
        report = Report("twistor")
        assert not report.check("kernel", float("inf"), 1e-10).ok

    def test_require(self):
        report = Report("lagrangian-check")
        assert report.require("nondegenerate", True).ok
        assert not report.require("good", False).ok

    def test_summary_when_ok(self):
        report = Report("selftest")
        report.check("a", 0.0, 1.0)
        assert report.summary() == "selftest: ok (1 checks)"


class TestRender:
    def test_rendered_report_matches_schema(self):
        report = Report("periods", tolerances={"period_tol": 1e-10}, results={"value": 1j})
        report.check("period", 0.0, 1e-10)
        payload = json.loads(render_report(report))
        assert payload["ok"] is True
        assert payload["results"]["value"] == [0.0, 1.0]
        assert "eta_orientation" in payload["conventions"]

    def test_schema_violation_raises(self):
        report = Report("periods", tolerances={"period_tol": 0.0})
        with pytest.raises(RuntimeError) as excinfo:
            render_report(report)
        assert "schema" in str(excinfo.value)

    def test_rendering_is_deterministic(self):
        def build():
            r = Report("hk-verify", seed=7, results={"b": 1.0, "a": [0.1, 0.2]})
            r.check("quaternion_defect", 1e-15, 1e-12)
            return render_report(r)

        assert build() == build()


class TestWriter:
    def test_write_and_read_report(self, tmp_path):
        writer = ReportWriter(tmp_path / "nested")
        path = writer.write_report(Report("selftest"))
        assert path.name == "report.json"
        assert read_report(path)["subcommand"] == "selftest"
        assert read_report(tmp_path / "missing.json") is None

    def test_csv_uses_full_precision(self, tmp_path):
        writer = ReportWriter(tmp_path)
        path = writer.write_csv("t.csv", trajectory_header(1), [[1.0, 0.0, 1 / 3, 0.0]])
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "eps_re,eps_im,theta1_re,theta1_im"
        assert lines[1].split(",")[2] == format(1 / 3, ".17g")

    def test_trajectory_header(self):
        assert trajectory_header(2) == ["eps_re", "eps_im", "theta1_re", "theta1_im", "theta2_re", "theta2_im"]
