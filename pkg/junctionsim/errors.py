"""
Exception hierarchy shared by the simulator, the CLI and the HTTP service.
Each class carries the process exit code the CLI reports for it.
"""
from typing import List, Optional


class JunctionSimError(Exception):
    """Base error for junctionsim."""

    exit_code = 1


class ScenarioError(JunctionSimError):
    """Scenario file missing, unparsable, or failing schema validation."""

    exit_code = 2

    def __init__(self, message: str, errors: Optional[List[str]] = None):
        super().__init__(message)
        self.errors = errors or []

    def __str__(self) -> str:
        if not self.errors:
            return super().__str__()
        return super().__str__() + "\n" + "\n".join(f"  - {err}" for err in self.errors)


class ContractViolation(JunctionSimError, ValueError):
    """A precondition of a decision operation was broken by the caller."""

    exit_code = 4


class MatrixDeliveryError(JunctionSimError):
    """Road-status reports did not form a complete 8-direction matrix."""

    exit_code = 4


class ReplayMismatch(JunctionSimError):
    """Replaying an event log produced decisions different from the recorded ones."""

    exit_code = 3
