"""Exception types shared across the package."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .model import ValidationReport


class GamesmithError(Exception):
    """Base class; carries a stable machine-readable code."""

    code = "ERROR"


class ParseError(GamesmithError):
    code = "PARSE_ERROR"


class SchemaError(GamesmithError):
    code = "SCHEMA_ERROR"


class DesignValidationError(GamesmithError):
    code = "VALIDATION_ERROR"

    def __init__(self, message: str, report: "ValidationReport"):
        super().__init__(message)
        self.report = report


class InvalidDesignError(DesignValidationError):
    code = "INVALID_DESIGN"


class UnknownStateError(GamesmithError):
    code = "UNKNOWN_STATE"


class UnaffordableError(GamesmithError):
    code = "UNAFFORDABLE"


class NoValidActionsError(GamesmithError):
    code = "NO_VALID_ACTIONS"


class UnknownMetricError(GamesmithError):
    code = "UNKNOWN_METRIC"


class NoLegalEditError(GamesmithError):
    code = "NO_LEGAL_EDIT"


class SelectorAborted(GamesmithError):
    code = "SELECTOR_ABORTED"
