"""
Schema Validation - JSON schema validation for run reports and result tables.

Validates serialized Newton reports against ``schemas/run-report.json`` and
result CSV headers against the fixed column layout.
"""

import json
from importlib import resources
from typing import Any, Dict, List, Optional, Sequence, Union

from jsonschema import ValidationError, validate

from .report import NewtonReport

# Exact column order of result tables
RESULT_COLUMNS = (
    "experiment",
    "solver",
    "N",
    "rel_error",
    "resid_final",
    "newton_iters",
    "wall_s",
    "max_rank",
    "cr",
    "status",
)


def _load_schema() -> Dict[str, Any]:
    """Load the run-report schema shipped with the package."""
    schema_data = resources.files(__package__).joinpath("schemas/run-report.json").read_text()
    return json.loads(schema_data)


RUN_REPORT_SCHEMA = _load_schema()


class ValidationResult:
    """Result of schema validation.

    Supports boolean conversion for simple valid/invalid checks.

    Attributes:
        valid: True if validation passed, False otherwise
        errors: List of validation error messages
    """

    def __init__(self, valid: bool, errors: Optional[List[str]] = None):
        self.valid = valid
        self.errors = errors or []

    def __bool__(self) -> bool:
        return self.valid

    def __str__(self) -> str:
        if self.valid:
            return "Valid run report"
        return f"Invalid run report: {'; '.join(self.errors)}"


def validate_report(report: Union[NewtonReport, Dict[str, Any]]) -> ValidationResult:
    """Validate a report, or its dictionary form, against the run-report schema."""
    report_dict = report.to_dict() if isinstance(report, NewtonReport) else report
    try:
        validate(report_dict, RUN_REPORT_SCHEMA)
        return ValidationResult(True)
    except ValidationError as e:
        location = "/".join(str(p) for p in e.absolute_path)
        prefix = f"{location}: " if location else ""
        return ValidationResult(False, [f"{prefix}{e.message}"])


def validate_result_header(columns: Sequence[str]) -> ValidationResult:
    """Check a result-table header against RESULT_COLUMNS, order included."""
    columns = [c.strip() for c in columns]
    if tuple(columns) == RESULT_COLUMNS:
        return ValidationResult(True)
    errors = []
    missing = [c for c in RESULT_COLUMNS if c not in columns]
    unexpected = [c for c in columns if c not in RESULT_COLUMNS]
    if missing:
        errors.append(f"missing columns: {', '.join(missing)}")
    if unexpected:
        errors.append(f"unexpected columns: {', '.join(unexpected)}")
    if not errors:
        errors.append("column order differs")
    return ValidationResult(False, errors)


def get_schema() -> Dict[str, Any]:
    """Return a copy of the run-report schema."""
    return json.loads(json.dumps(RUN_REPORT_SCHEMA))
