from enum import Enum
from typing import Dict, Any, Optional
from datetime import datetime, timezone


class ErrorCode(str, Enum):
    VALIDATION_ERROR = "VAL_1201"
    INVALID_SCALAR = "VAL_1202"
    INVALID_MULTI_INDEX = "VAL_1203"
    INVALID_SYSTEM = "VAL_1204"
    REGIME_MISMATCH = "VAL_1205"
    INVALID_SOLVE_SPEC = "VAL_1206"
    DUPLICATE_COEFFICIENT = "VAL_1207"

    DIVISION_BY_ZERO = "NUM_1401"
    FLOAT_OVERFLOW = "NUM_1402"
    ZERO_LAST_COMPONENT = "NUM_1403"

    ZERO_MONOMIAL = "SOL_1501"
    SINGULAR_JACOBIAN = "SOL_1502"
    NOT_CONVERGED = "SOL_1503"
    CONSTRAINTS_VIOLATED = "SOL_1504"

    FILE_NOT_FOUND = "IO_1601"
    MALFORMED_DOCUMENT = "IO_1602"


ERROR_DETAILS: Dict[ErrorCode, Dict[str, Any]] = {
    ErrorCode.VALIDATION_ERROR: {"message": "Invalid input", "exit_code": 2},
    ErrorCode.INVALID_SCALAR: {"message": "Invalid scalar value", "exit_code": 2},
    ErrorCode.INVALID_MULTI_INDEX: {"message": "Invalid multi-index", "exit_code": 2},
    ErrorCode.INVALID_SYSTEM: {"message": "Invalid homogeneous system", "exit_code": 2},
    ErrorCode.REGIME_MISMATCH: {"message": "Mixed exact and float arithmetic", "exit_code": 2},
    ErrorCode.INVALID_SOLVE_SPEC: {"message": "Invalid solve specification", "exit_code": 2},
    ErrorCode.DUPLICATE_COEFFICIENT: {"message": "Duplicate coefficient entry", "exit_code": 2},
    ErrorCode.DIVISION_BY_ZERO: {"message": "Division by the zero scalar", "exit_code": 2},
    ErrorCode.FLOAT_OVERFLOW: {"message": "Floating-point magnitude out of range", "exit_code": 2},
    ErrorCode.ZERO_LAST_COMPONENT: {"message": "z_N(0) must be nonzero", "exit_code": 2},
    ErrorCode.ZERO_MONOMIAL: {"message": "Designated coefficient multiplies a zero monomial", "exit_code": 3},
    ErrorCode.SINGULAR_JACOBIAN: {"message": "Jacobian is singular", "exit_code": 3},
    ErrorCode.NOT_CONVERGED: {"message": "Newton iteration did not converge", "exit_code": 3},
    ErrorCode.CONSTRAINTS_VIOLATED: {"message": "Constraints are not satisfied", "exit_code": 3},
    ErrorCode.FILE_NOT_FOUND: {"message": "File not found", "exit_code": 2},
    ErrorCode.MALFORMED_DOCUMENT: {"message": "Malformed document", "exit_code": 2},
}


class HomsolveError(Exception):
    code: ErrorCode = ErrorCode.VALIDATION_ERROR

    def __init__(self, message: str, code: Optional[ErrorCode] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        if code is not None:
            self.code = code
        self.message = message
        self.details = details or {}

    @property
    def exit_code(self) -> int:
        return ERROR_DETAILS.get(self.code, {}).get("exit_code", 2)


class ValidationError(HomsolveError):
    code = ErrorCode.VALIDATION_ERROR


class RegimeMismatchError(ValidationError):
    code = ErrorCode.REGIME_MISMATCH


class ZeroDivisionScalarError(HomsolveError):
    code = ErrorCode.DIVISION_BY_ZERO


class ScalarOverflowError(HomsolveError):
    code = ErrorCode.FLOAT_OVERFLOW

    def __init__(self, magnitude: float, message: Optional[str] = None):
        super().__init__(message or f"magnitude {magnitude:.3e} exceeds the float range", details={"magnitude": magnitude})
        self.magnitude = magnitude


class ZeroRatioError(HomsolveError):
    code = ErrorCode.ZERO_LAST_COMPONENT


class SolverError(HomsolveError):
    code = ErrorCode.NOT_CONVERGED


class ZeroMonomialError(SolverError):
    code = ErrorCode.ZERO_MONOMIAL

    def __init__(self, equation: int, exponents: tuple):
        super().__init__(
            f"equation {equation}: designated index {exponents} has zero monomial value",
            details={"equation": equation, "exponents": list(exponents)},
        )
        self.equation = equation
        self.exponents = exponents


class SingularJacobianError(SolverError):
    code = ErrorCode.SINGULAR_JACOBIAN

    def __init__(self, condition: float, iteration: int = 0):
        super().__init__(
            f"singular Jacobian at iteration {iteration} (condition estimate {condition:.3e})",
            details={"condition": condition, "iteration": iteration},
        )
        self.condition = condition
        self.iteration = iteration


class NonConvergenceError(SolverError):
    code = ErrorCode.NOT_CONVERGED


def get_error_response(error_code: ErrorCode, details: Any = None) -> Dict[str, Any]:
    """Get standardized error response"""
    error_info = ERROR_DETAILS.get(error_code, {
        "message": "An error occurred",
        "exit_code": 2,
    })

    return {
        "error": {
            "code": error_code.value,
            "message": error_info["message"],
            "details": details,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
    }
