"""
Tests for run-report and result-header validation.
"""

from spacetime_tt.report import NewtonReport
from spacetime_tt.validation import (
    RESULT_COLUMNS,
    RUN_REPORT_SCHEMA,
    ValidationResult,
    get_schema,
    validate_report,
    validate_result_header,
)


class TestValidationResult:
    """Test ValidationResult class functionality."""

    def test_valid_result(self):
        """Test valid ValidationResult."""
        result = ValidationResult(True)
        assert result.valid is True
        assert result.errors == []
        assert bool(result) is True
        assert str(result) == "Valid run report"

    def test_invalid_result(self):
        """Test invalid ValidationResult."""
        result = ValidationResult(False, ["Error 1", "Error 2"])
        assert bool(result) is False
        assert str(result) == "Invalid run report: Error 1; Error 2"

    def test_invalid_result_no_errors(self):
        """Test invalid result with no specific errors."""
        result = ValidationResult(False)
        assert result.errors == []
        assert str(result) == "Invalid run report: "


class TestValidateReport:
    """Test schema validation of run reports."""

    def test_report_object(self, sample_report):
        """Test a NewtonReport validates directly."""
        assert validate_report(sample_report)

    def test_report_dict(self, sample_report):
        """Test the serialized form validates."""
        assert validate_report(sample_report.to_dict())

    def test_fresh_report(self):
        """Test an empty full-grid report is valid."""
        assert validate_report(NewtonReport())

    def test_step_factor_out_of_range(self, sample_report):
        """Test a step factor above one is rejected with its location."""
        data = sample_report.to_dict()
        data["history"][0]["step_factor"] = 2.0
        result = validate_report(data)
        assert not result
        assert result.errors[0].startswith("history/0/step_factor")

    def test_unknown_criterion(self, sample_report):
        """Test an unknown stopping criterion is rejected."""
        data = sample_report.to_dict()
        data["criterion"] = "gave_up"
        assert not validate_report(data)

    def test_extra_key(self, sample_report):
        """Test keys outside the schema are rejected."""
        data = sample_report.to_dict()
        data["notes"] = "extra"
        assert not validate_report(data)

    def test_missing_required(self, sample_report):
        """Test a missing required key is rejected."""
        data = sample_report.to_dict()
        del data["converged"]
        result = validate_report(data)
        assert not result
        assert "converged" in result.errors[0]

    def test_zero_rank(self, sample_report):
        """Test TT ranks must be positive."""
        data = sample_report.to_dict()
        data["history"][1]["ranks"] = [3, 0, 3]
        assert not validate_report(data)


class TestValidateResultHeader:
    """Test result-table header checks."""

    def test_exact_header(self):
        """Test the canonical header passes."""
        assert validate_result_header(list(RESULT_COLUMNS))

    def test_whitespace_tolerated(self):
        """Test surrounding whitespace is ignored."""
        assert validate_result_header([f" {c} " for c in RESULT_COLUMNS])

    def test_missing_and_unexpected(self):
        """Test missing and extra columns are both reported."""
        columns = [c for c in RESULT_COLUMNS if c != "cr"] + ["speedup"]
        result = validate_result_header(columns)
        assert not result
        assert "missing columns: cr" in result.errors
        assert "unexpected columns: speedup" in result.errors

    def test_order_matters(self):
        """Test a permuted header is rejected."""
        columns = list(RESULT_COLUMNS)
        columns[0], columns[1] = columns[1], columns[0]
        result = validate_result_header(columns)
        assert not result
        assert result.errors == ["column order differs"]


class TestGetSchema:
    """Test schema access."""

    def test_returns_copy(self):
        """Test modifying the returned schema leaves the original intact."""
        schema = get_schema()
        schema["required"].append("extra")
        assert "extra" not in RUN_REPORT_SCHEMA["required"]
        assert schema["title"] == "Newton run report"
