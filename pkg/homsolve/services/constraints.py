"""The N algebraic constraints tying coefficients, Z and initial-data ratios.

Residuals use the constraint multiplied through by r_n,

    res_n = Z * r_n - sum c[n, m] * prod_{l<N} r_l ** m_l,

which is polynomial, needs no division and stays meaningful when r_n == 0.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from homsolve.core.config import settings
from homsolve.core.monitoring import monitor_service_call
from homsolve.dependencies.error_code import (
    ErrorCode,
    RegimeMismatchError,
    SolverError,
    ValidationError,
    ZeroMonomialError,
    ZeroRatioError,
)
from homsolve.models.scalar import Regime, Scalar, to_float
from homsolve.models.system import (
    CoefficientKey,
    HomogeneousSystem,
    MultiIndex,
    StateVector,
    ensure_valid,
    monomial_from_table,
    power_table,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RatioVector:
    """r_n = z_n(0)/z_N(0); the last entry is exactly one."""

    components: Tuple[Scalar, ...]

    def __post_init__(self):
        components = tuple(self.components)
        if not components:
            raise ValidationError("ratio vector must have at least one component")
        if components[-1] != Scalar.one(components[-1].regime):
            raise ValidationError("the last ratio must be exactly 1")
        if any(c.regime is not components[0].regime for c in components):
            raise RegimeMismatchError("ratio vector mixes exact and float components")
        object.__setattr__(self, "components", components)

    @classmethod
    def from_free(cls, free: Sequence[Scalar], regime: Regime) -> "RatioVector":
        """Build (r_1, ..., r_{N-1}, 1)."""
        return cls(tuple(Scalar.lift(r, regime) for r in free) + (Scalar.one(regime),))

    @property
    def regime(self) -> Regime:
        return self.components[0].regime

    @property
    def free(self) -> Tuple[Scalar, ...]:
        return self.components[:-1]

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self) -> Iterator[Scalar]:
        return iter(self.components)

    def __getitem__(self, i: int) -> Scalar:
        return self.components[i]

    def component(self, n: int) -> Scalar:
        return self.components[n - 1]

    def to_float(self) -> "RatioVector":
        return RatioVector(tuple(to_float(c) for c in self.components))

    def initial_state(self, scale: Optional[Scalar] = None) -> StateVector:
        """z(0) = scale * r; scale defaults to 1 so that z_N(0) = 1."""
        factor = scale if scale is not None else Scalar.one(self.regime)
        return StateVector(tuple(r * factor for r in self.components), 0)


class SolveMode(str, Enum):
    COEFFICIENTS = "coefficients"
    Z_PIVOT = "z-pivot"
    NEWTON = "newton"


class UnknownKind(str, Enum):
    Z = "z"
    RATIO = "ratio"
    COEFFICIENT = "coefficient"


@dataclass(frozen=True)
class Unknown:
    """One quantity the Newton solver moves: Z, a ratio r_k (k < N) or a coefficient."""

    kind: UnknownKind
    index: Optional[int] = None
    equation: Optional[int] = None
    exponents: Optional[MultiIndex] = None

    @classmethod
    def z(cls) -> "Unknown":
        return cls(UnknownKind.Z)

    @classmethod
    def ratio(cls, k: int) -> "Unknown":
        return cls(UnknownKind.RATIO, index=k)

    @classmethod
    def coefficient(cls, equation: int, exponents: Sequence[int]) -> "Unknown":
        return cls(UnknownKind.COEFFICIENT, equation=equation, exponents=MultiIndex(exponents))

    def __str__(self) -> str:
        if self.kind is UnknownKind.Z:
            return "Z"
        if self.kind is UnknownKind.RATIO:
            return f"r{self.index}"
        return f"c[{self.equation},{tuple(self.exponents)}]"


def default_unknowns(n_vars: int) -> List[Unknown]:
    return [Unknown.z()] + [Unknown.ratio(k) for k in range(1, n_vars)]


@dataclass
class SolveSpec:
    mode: SolveMode
    designated: Dict[int, MultiIndex] = field(default_factory=dict)
    pivot_equation: Optional[int] = None
    guess_z: Optional[Scalar] = None
    guess_ratios: Optional[List[Scalar]] = None
    unknowns: Optional[List[Unknown]] = None
    tol: float = field(default_factory=lambda: settings.NEWTON_TOL)
    max_iter: int = field(default_factory=lambda: settings.NEWTON_MAX_ITER)
    max_halvings: int = field(default_factory=lambda: settings.NEWTON_MAX_HALVINGS)

    def __post_init__(self):
        self.mode = SolveMode(self.mode)
        self.designated = {int(n): MultiIndex(mi) for n, mi in self.designated.items()}

    @classmethod
    def pure_power(cls, n_vars: int, degree: int, mode: SolveMode = SolveMode.COEFFICIENTS,
                   pivot_equation: Optional[int] = None) -> "SolveSpec":
        """Designate the z_N**M coefficient of every (non-pivot) equation; its monomial is always 1."""
        pure = MultiIndex((0,) * (n_vars - 1) + (degree,))
        equations = [n for n in range(1, n_vars + 1) if n != pivot_equation]
        return cls(mode, designated={n: pure for n in equations}, pivot_equation=pivot_equation)

    def resolved_unknowns(self, n_vars: int) -> List[Unknown]:
        return list(self.unknowns) if self.unknowns else default_unknowns(n_vars)

    def validate(self, system: HomogeneousSystem) -> "SolveSpec":
        n_vars, degree = system.n_vars, system.degree

        def check_index(n: int, mi: MultiIndex) -> None:
            if len(mi) != n_vars or any(m < 0 for m in mi) or mi.degree != degree:
                raise ValidationError(
                    f"equation {n}: designated exponents {tuple(mi)} are not a degree-{degree} index in {n_vars} variables",
                    code=ErrorCode.INVALID_SOLVE_SPEC,
                )

        if self.mode is SolveMode.COEFFICIENTS:
            expected = set(range(1, n_vars + 1))
            if set(self.designated) != expected:
                raise ValidationError(
                    f"coefficients mode needs one designated index for each equation 1..{n_vars}",
                    code=ErrorCode.INVALID_SOLVE_SPEC,
                )
        elif self.mode is SolveMode.Z_PIVOT:
            if self.pivot_equation is None or not 1 <= self.pivot_equation <= n_vars:
                raise ValidationError(
                    f"z-pivot mode needs a pivot equation in 1..{n_vars}", code=ErrorCode.INVALID_SOLVE_SPEC
                )
            expected = set(range(1, n_vars + 1)) - {self.pivot_equation}
            if set(self.designated) != expected:
                raise ValidationError(
                    f"z-pivot mode needs one designated index for every equation except {self.pivot_equation}",
                    code=ErrorCode.INVALID_SOLVE_SPEC,
                )
        else:
            if self.guess_z is None or self.guess_ratios is None:
                raise ValidationError("newton mode needs a guess for Z and the ratios", code=ErrorCode.INVALID_SOLVE_SPEC)
            if len(self.guess_ratios) != n_vars - 1:
                raise ValidationError(
                    f"newton mode needs {n_vars - 1} guessed ratios, got {len(self.guess_ratios)}",
                    code=ErrorCode.INVALID_SOLVE_SPEC,
                )
            unknowns = self.resolved_unknowns(n_vars)
            if len(unknowns) != n_vars:
                raise ValidationError(
                    f"newton mode needs exactly {n_vars} unknowns, got {len(unknowns)}",
                    code=ErrorCode.INVALID_SOLVE_SPEC,
                )
            if len(set(unknowns)) != len(unknowns):
                raise ValidationError("newton unknowns must be distinct", code=ErrorCode.INVALID_SOLVE_SPEC)
            for u in unknowns:
                if u.kind is UnknownKind.RATIO and not (u.index is not None and 1 <= u.index <= n_vars - 1):
                    raise ValidationError(
                        f"ratio unknown index must lie in 1..{n_vars - 1}", code=ErrorCode.INVALID_SOLVE_SPEC
                    )
                if u.kind is UnknownKind.COEFFICIENT:
                    if u.equation is None or u.exponents is None or not 1 <= u.equation <= n_vars:
                        raise ValidationError("coefficient unknown needs an equation and exponents",
                                              code=ErrorCode.INVALID_SOLVE_SPEC)
                    check_index(u.equation, u.exponents)
            if self.tol <= 0 or self.max_iter < 0 or self.max_halvings < 0:
                raise ValidationError("solver controls must be positive", code=ErrorCode.INVALID_SOLVE_SPEC)

        for n, mi in self.designated.items():
            check_index(n, mi)
        return self


@dataclass(frozen=True)
class Certificate:
    max_residual: float
    mode: str


@dataclass(frozen=True)
class SolvableInstance:
    system: HomogeneousSystem
    z0: StateVector
    Z: Scalar
    certificate: Certificate

    @property
    def regime(self) -> Regime:
        return self.system.regime

    @property
    def ratios(self) -> RatioVector:
        return ratios_from_init(self.z0)

    @property
    def degenerate(self) -> bool:
        return self.Z.is_zero

    def to_float(self) -> "SolvableInstance":
        if self.regime is Regime.FLOAT:
            return self
        system = self.system.to_float()
        z0 = self.z0.to_float()
        Z = to_float(self.Z)
        residuals = constraint_residuals(system, Z, ratios_from_init(z0))
        return SolvableInstance(system, z0, Z, Certificate(max_residual(residuals), self.certificate.mode))


def ratios_from_init(z0: StateVector) -> RatioVector:
    last = z0.last
    if last.is_zero:
        raise ZeroRatioError("z_N(0) must be nonzero")
    one = Scalar.one(last.regime)
    return RatioVector(tuple(zn / last for zn in z0.components[:-1]) + (one,))


def _check_regimes(system: HomogeneousSystem, *values: Scalar) -> None:
    for v in values:
        if v.regime is not system.regime:
            raise RegimeMismatchError(f"{v.regime.value} value used with a {system.regime.value} system")


def _equation_sum(system: HomogeneousSystem, n: int, table, skip: Optional[MultiIndex] = None) -> Scalar:
    total = Scalar.zero(system.regime)
    for mi, c in system.terms(n):
        if mi == skip:
            continue
        total = total + c * monomial_from_table(mi, table)
    return total


def constraint_residuals(system: HomogeneousSystem, Z: Scalar, r: RatioVector) -> List[Scalar]:
    if len(r) != system.n_vars:
        raise ValidationError(f"ratio vector has {len(r)} entries, system has {system.n_vars} variables")
    _check_regimes(system, Z, *r)
    table = power_table(r.components, system.monomials)
    return [Z * r.component(n) - _equation_sum(system, n, table) for n in range(1, system.n_vars + 1)]


def max_residual(residuals: Sequence[Scalar]) -> float:
    return max((res.magnitude() for res in residuals), default=0.0)


def _solve_designated(
    system: HomogeneousSystem,
    Z: Scalar,
    r: RatioVector,
    designated: Dict[int, MultiIndex],
) -> HomogeneousSystem:
    table = power_table(r.components, [*system.monomials, *designated.values()])
    updates: Dict[CoefficientKey, Scalar] = {}
    for n, mi in sorted(designated.items()):
        monomial = monomial_from_table(mi, table)
        if monomial.is_zero:
            raise ZeroMonomialError(n, tuple(mi))
        others = _equation_sum(system, n, table, skip=mi)
        updates[(n, mi)] = (Z * r.component(n) - others) / monomial
    return system.with_coefficients(updates)


@monitor_service_call("solve_designated_coefficients")
def solve_designated_coefficients(
    system: HomogeneousSystem,
    Z: Scalar,
    r: RatioVector,
    spec: SolveSpec,
) -> HomogeneousSystem:
    """Replace one designated coefficient per equation so that every residual vanishes."""
    ensure_valid(system)
    if spec.mode is not SolveMode.COEFFICIENTS:
        raise ValidationError(f"expected a coefficients-mode spec, got {spec.mode.value}", code=ErrorCode.INVALID_SOLVE_SPEC)
    spec.validate(system)
    _check_regimes(system, Z, *r)
    solved = _solve_designated(system, Z, r, spec.designated)
    logger.debug(f"Solved {len(spec.designated)} designated coefficient(s)")
    return solved


@monitor_service_call("solve_z_pivot")
def solve_z_pivot(
    system: HomogeneousSystem,
    r: RatioVector,
    spec: SolveSpec,
) -> Tuple[Scalar, HomogeneousSystem]:
    """Z from the fully known pivot equation, then one coefficient in every other equation."""
    ensure_valid(system)
    if spec.mode is not SolveMode.Z_PIVOT:
        raise ValidationError(f"expected a z-pivot spec, got {spec.mode.value}", code=ErrorCode.INVALID_SOLVE_SPEC)
    spec.validate(system)
    _check_regimes(system, *r)

    pivot = spec.pivot_equation
    r_pivot = r.component(pivot)
    if r_pivot.is_zero:
        raise ZeroRatioError(f"pivot ratio r_{pivot} is zero; Z cannot be resolved from equation {pivot}")
    table = power_table(r.components, system.monomials)
    Z = _equation_sum(system, pivot, table) / r_pivot
    if Z.is_zero:
        logger.warning(f"Pivot equation {pivot} resolves Z = 0; the instance is degenerate")
    solved = _solve_designated(system, Z, r, spec.designated)
    return Z, solved


def certify(
    system: HomogeneousSystem,
    z0: StateVector,
    Z: Scalar,
    mode: str,
    tol: Optional[float] = None,
) -> SolvableInstance:
    """Check the constraints and wrap the data as a SolvableInstance."""
    residuals = constraint_residuals(system, Z, ratios_from_init(z0))
    worst = max_residual(residuals)
    if system.regime is Regime.EXACT:
        satisfied = all(res.is_zero for res in residuals)
    else:
        bound = (settings.NEWTON_TOL if tol is None else tol) * (1.0 + Z.magnitude())
        satisfied = worst <= bound
    if not satisfied:
        raise SolverError(
            f"constraints not satisfied: max residual {worst:.3e}",
            code=ErrorCode.CONSTRAINTS_VIOLATED,
            details={"max_residual": worst},
        )
    if Z.is_zero:
        logger.warning("Certified instance has Z = 0; its trajectory vanishes from s = 1 on")
    return SolvableInstance(system, z0, Z, Certificate(worst, mode))
