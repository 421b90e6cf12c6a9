"""
Tests for verification.py - the property suite behind verify.
"""

import pytest

from optimal_quadrature.errors import InvalidParameterError
from optimal_quadrature.verification import (
    Check,
    SuiteReport,
    agreement_tol,
    check_operator,
    print_report,
    run_suite,
)


class TestCheck:
    """Test single check records."""

    def test_passed_at_tolerance(self):
        assert Check("exactness", 1e-10, 1e-10).passed
        assert not Check("exactness", 1e-10, 2e-10).passed

    def test_to_dict(self):
        data = Check("symmetry", 1e-8, 0.0, N=5).to_dict()
        assert data == {"name": "symmetry", "N": 5, "tolerance": 1e-8, "observed": 0.0, "passed": True}


class TestSuiteReport:
    """Test report aggregation."""

    def test_failures(self):
        report = SuiteReport(1, [4])
        report.add("good", 1.0, 0.5, 4)
        report.add("bad", 1.0, 2.0, 4)
        assert not report.passed
        assert [check.name for check in report.failures()] == ["bad"]
        assert report.to_dict()["passed"] is False

    def test_note_never_fails(self):
        report = SuiteReport(3, [5])
        report.note("dense symmetry defect", 1.0, 5)
        assert report.passed
        assert report.enforced() == []
        assert report.to_dict()["checks"][0]["tolerance"] is None

    def test_empty_report_passes(self):
        assert SuiteReport(1, []).passed

    def test_agreement_tolerances(self):
        assert agreement_tol(1) == 1e-12
        assert agreement_tol(1, "closed") == 1e-12
        assert agreement_tol(3) == 1e-9
        assert agreement_tol(3, "closed") == 1e-8
        assert agreement_tol(5) == 1e-9


class TestCheckOperator:
    """Test the operator checks."""

    def test_m3_operator_passes(self, operator_m3):
        report = SuiteReport(3, [10])
        check_operator(report, operator_m3, 10)
        assert report.passed
        assert len(report.checks) == 5


class TestRunSuite:
    """Test complete suite runs."""

    def test_m1(self):
        report = run_suite(1, [4, 10], trials=10, seed=0)
        assert report.passed
        names = {check.name for check in report.checks}
        assert {"closed vs dense", "sobolev vs dense", "analytic vs truncated tails"} <= names
        assert {check.N for check in report.checks} == {4, 10}

    def test_m3(self):
        report = run_suite(3, [5], trials=10, seed=0)
        assert report.passed
        assert "closed exactness" in {check.name for check in report.checks}

    def test_symmetry_enforced_for_m1_only(self):
        m1 = run_suite(1, [5], trials=5, seed=0)
        assert "dense symmetry" in {check.name for check in m1.enforced()}
        m3 = run_suite(3, [3], trials=5, seed=0)
        assert m3.passed
        notes = {check.name: check for check in m3.checks if check.tolerance is None}
        assert set(notes) == {"dense symmetry defect", "sobolev symmetry defect", "closed symmetry defect"}
        assert all(check.observed > 0 for check in notes.values())
        assert not any(check.name.endswith("symmetry") for check in m3.enforced())

    def test_m5_has_no_closed_form_checks(self):
        report = run_suite(5, [10], trials=5, seed=0)
        assert report.passed
        assert not any(check.name.startswith("closed") for check in report.checks)

    def test_requires_grids(self):
        with pytest.raises(InvalidParameterError, match="at least one N"):
            run_suite(1, [])

    def test_even_order(self):
        with pytest.raises(InvalidParameterError, match="odd"):
            run_suite(2, [4])


class TestPrintReport:
    """Test the readable report."""

    def test_passed(self, capsys):
        report = SuiteReport(1, [4])
        report.add("sobolev exactness", 1e-10, 1e-15, 4)
        print_report(report)
        out = capsys.readouterr().out
        assert "✓ sobolev exactness" in out
        assert "PASSED: all 1 checks" in out

    def test_failed(self, capsys):
        report = SuiteReport(1, [4])
        report.add("sobolev exactness", 1e-10, 1e-15, 4)
        report.add("sobolev symmetry", 1e-8, 1.0, 4)
        print_report(report)
        out = capsys.readouterr().out
        assert "✗ sobolev symmetry" in out
        assert "FAILED: 1 of 2 checks" in out

    def test_measurement_line(self, capsys):
        report = SuiteReport(3, [5])
        report.add("dense exactness", 1e-10, 1e-15, 5)
        report.note("dense symmetry defect", 5e-5, 5)
        print_report(report)
        out = capsys.readouterr().out
        assert "· dense symmetry defect" in out
        assert "(info)" in out
        assert "PASSED: all 1 checks" in out
