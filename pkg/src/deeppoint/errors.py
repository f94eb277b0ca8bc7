"""Error hierarchy shared by every DeepPoint module.

Each error carries a stable ``error_code`` for event logs and an ``exit_code``
the CLI returns (2 config/input, 3 IO, 4 numerical failure).
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .metrics.emd import Matching


class DeepPointError(Exception):
    error_code = "deeppoint_error"
    exit_code = 1

    def to_dict(self) -> dict[str, object]:
        return {"error_code": self.error_code, "message": str(self)}


class InvalidInput(DeepPointError, ValueError):
    error_code = "invalid_input"
    exit_code = 2


class DegenerateCloud(InvalidInput):
    error_code = "degenerate_cloud"


class EmptyView(InvalidInput):
    error_code = "empty_view"


class SizeMismatch(InvalidInput):
    error_code = "size_mismatch"


class TooLarge(InvalidInput):
    error_code = "too_large"


class InvalidConfig(DeepPointError, ValueError):
    error_code = "invalid_config"
    exit_code = 2


class ConfigMismatch(InvalidConfig):
    error_code = "config_mismatch"


class ShapeError(DeepPointError, ValueError):
    error_code = "shape_error"
    exit_code = 2


class IoError(DeepPointError, OSError):
    error_code = "io_error"
    exit_code = 3


class ParseError(IoError):
    error_code = "parse_error"

    def __init__(self, message: str, *, line: int | None = None, path: str | None = None) -> None:
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where = f"{where}{line}: "
        elif where:
            where = f"{where} "
        super().__init__(f"{where}{message}")


class NumericalError(DeepPointError, ArithmeticError):
    error_code = "numerical_error"
    exit_code = 4

    def __init__(self, message: str, *, op_id: int | None = None) -> None:
        self.op_id = op_id
        suffix = f" (op {op_id})" if op_id is not None else ""
        super().__init__(f"{message}{suffix}")


class ApproxFailure(NumericalError):
    """Auction did not converge; ``matching`` holds the best complete bijection found."""

    error_code = "approx_failure"

    def __init__(self, message: str, *, matching: "Matching") -> None:
        self.matching = matching
        super().__init__(message)
