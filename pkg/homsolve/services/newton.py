"""Damped Newton iteration on the constraint residuals.

The residuals are holomorphic in every unknown, so the complex Jacobian J is
stacked into the real 2N x 2N block matrix [[Re J, -Im J], [Im J, Re J]]
before each linear solve.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from homsolve.core.config import settings
from homsolve.core.monitoring import monitor_service_call, record_business_metric
from homsolve.dependencies.error_code import (
    ErrorCode,
    RegimeMismatchError,
    SingularJacobianError,
    ValidationError,
)
from homsolve.models.scalar import Regime, Scalar
from homsolve.models.system import HomogeneousSystem, MultiIndex, ensure_valid
from homsolve.services.constraints import RatioVector, SolveMode, SolveSpec, Unknown, UnknownKind

logger = logging.getLogger(__name__)


@dataclass
class NewtonResult:
    Z: Scalar
    ratios: RatioVector
    system: HomogeneousSystem
    iterations: int
    residual_norm: float
    converged: bool
    history: List[float] = field(default_factory=list)
    condition: Optional[float] = None


class _Problem:
    """Residual and Jacobian of the constraints over a chosen set of N unknowns."""

    def __init__(
        self,
        system: HomogeneousSystem,
        Z: complex,
        ratios: Sequence[complex],
        unknowns: Sequence[Unknown],
    ):
        self.n_vars = system.n_vars
        self.degree = system.degree
        self.unknowns = list(unknowns)
        self.base_z = complex(Z)
        self.base_ratios = np.array(list(ratios), dtype=complex)

        moving = {(u.equation, u.exponents) for u in self.unknowns if u.kind is UnknownKind.COEFFICIENT}
        self.exponents: List[np.ndarray] = []
        self.coefficients: List[np.ndarray] = []
        for n in range(1, self.n_vars + 1):
            terms = [(mi, c) for mi, c in system.terms(n) if (n, mi) not in moving]
            self.exponents.append(np.array([list(mi) for mi, _ in terms], dtype=int).reshape(-1, self.n_vars))
            self.coefficients.append(np.array([c.to_complex() for _, c in terms], dtype=complex))
        self.base_coefficients = {
            (u.equation, u.exponents): system.coefficient(u.equation, u.exponents).to_complex()
            for u in self.unknowns if u.kind is UnknownKind.COEFFICIENT
        }

    def initial_vector(self) -> np.ndarray:
        x = np.empty(len(self.unknowns), dtype=complex)
        for j, u in enumerate(self.unknowns):
            if u.kind is UnknownKind.Z:
                x[j] = self.base_z
            elif u.kind is UnknownKind.RATIO:
                x[j] = self.base_ratios[u.index - 1]
            else:
                x[j] = self.base_coefficients[(u.equation, u.exponents)]
        return x

    def unpack(self, x: np.ndarray) -> Tuple[complex, np.ndarray, Dict[Tuple[int, MultiIndex], complex]]:
        Z = self.base_z
        r = np.append(self.base_ratios, 1.0 + 0.0j)
        coefficients: Dict[Tuple[int, MultiIndex], complex] = {}
        for j, u in enumerate(self.unknowns):
            if u.kind is UnknownKind.Z:
                Z = x[j]
            elif u.kind is UnknownKind.RATIO:
                r[u.index - 1] = x[j]
            else:
                coefficients[(u.equation, u.exponents)] = x[j]
        return Z, r, coefficients

    def _table(self, r: np.ndarray) -> np.ndarray:
        table = np.ones((self.n_vars, self.degree + 1), dtype=complex)
        for k in range(1, self.degree + 1):
            table[:, k] = table[:, k - 1] * r
        return table

    def _monomials(self, table: np.ndarray, exponents: np.ndarray) -> np.ndarray:
        if exponents.size == 0:
            return np.zeros(0, dtype=complex)
        return np.prod(table[np.arange(self.n_vars), exponents], axis=1)

    def residual(self, x: np.ndarray) -> np.ndarray:
        Z, r, moving = self.unpack(x)
        table = self._table(r)
        F = np.empty(self.n_vars, dtype=complex)
        for n in range(self.n_vars):
            total = np.sum(self.coefficients[n] * self._monomials(table, self.exponents[n]))
            for (eq, mi), c in moving.items():
                if eq == n + 1:
                    total += c * self._monomials(table, np.array([mi]))[0]
            F[n] = Z * r[n] - total
        return F

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        Z, r, moving = self.unpack(x)
        table = self._table(r)
        J = np.zeros((self.n_vars, len(self.unknowns)), dtype=complex)
        for j, u in enumerate(self.unknowns):
            if u.kind is UnknownKind.Z:
                J[:, j] = r
            elif u.kind is UnknownKind.RATIO:
                l = u.index - 1
                for n in range(self.n_vars):
                    J[n, j] = (Z if n == l else 0.0) - self._ratio_partial(table, n, l, moving)
            else:
                J[u.equation - 1, j] = -self._monomials(table, np.array([u.exponents]))[0]
        return J

    def _ratio_partial(self, table: np.ndarray, n: int, l: int, moving) -> complex:
        """d/dr_l of sum_t c_t prod r**m_t, without dividing by r_l."""
        exponents = self.exponents[n]
        coefficients = self.coefficients[n]
        extra = [(c, mi) for (eq, mi), c in moving.items() if eq == n + 1]
        if extra:
            exponents = np.vstack([exponents, np.array([list(mi) for _, mi in extra], dtype=int)])
            coefficients = np.concatenate([coefficients, np.array([c for c, _ in extra], dtype=complex)])
        if exponents.size == 0:
            return 0.0j
        m_l = exponents[:, l]
        lowered = exponents.copy()
        lowered[:, l] = np.maximum(m_l - 1, 0)
        return complex(np.sum(coefficients * m_l * self._monomials(table, lowered)))


def _stack_real(J: np.ndarray) -> np.ndarray:
    return np.block([[J.real, -J.imag], [J.imag, J.real]])


def _inf_norm(F: np.ndarray) -> float:
    if not np.all(np.isfinite(F)):
        return float("inf")
    return float(np.max(np.abs(F))) if F.size else 0.0


def _build(problem: _Problem, system: HomogeneousSystem, x: np.ndarray) -> Tuple[Scalar, RatioVector, HomogeneousSystem]:
    Z, r, moving = problem.unpack(x)
    ratios = RatioVector.from_free([Scalar.from_complex(complex(v)) for v in r[:-1]], Regime.FLOAT)
    updates = {key: Scalar.from_complex(complex(c)) for key, c in moving.items()}
    solved = system.with_coefficients(updates) if updates else system
    return Scalar.from_complex(complex(Z)), ratios, solved


def _problem_for(system: HomogeneousSystem, spec: SolveSpec) -> _Problem:
    if system.regime is not Regime.FLOAT:
        raise RegimeMismatchError("newton_solve needs a float-regime system")
    ensure_valid(system)
    if spec.mode is not SolveMode.NEWTON:
        raise ValidationError(f"expected a newton spec, got {spec.mode.value}", code=ErrorCode.INVALID_SOLVE_SPEC)
    spec.validate(system)
    return _Problem(
        system,
        spec.guess_z.to_complex(),
        [g.to_complex() for g in spec.guess_ratios],
        spec.resolved_unknowns(system.n_vars),
    )


@monitor_service_call("newton_solve")
def newton_solve(system: HomogeneousSystem, spec: SolveSpec) -> NewtonResult:
    """Solve the constraints for the spec's unknowns starting from its guess."""
    problem = _problem_for(system, spec)
    singular_cond = settings.NEWTON_SINGULAR_COND
    z_slot = next((j for j, u in enumerate(problem.unknowns) if u.kind is UnknownKind.Z), None)

    def z_of(x: np.ndarray) -> complex:
        return x[z_slot] if z_slot is not None else problem.base_z

    x = problem.initial_vector()
    F = problem.residual(x)
    norm = _inf_norm(F)
    history = [norm]
    best_x, best_norm = x.copy(), norm
    converged = False
    iterations = 0
    condition: Optional[float] = None

    for iterations in range(spec.max_iter + 1):
        if norm <= spec.tol * (1.0 + abs(z_of(x))):
            converged = True
            break
        if iterations == spec.max_iter:
            break

        A = _stack_real(problem.jacobian(x))
        condition = float(np.linalg.cond(A))
        if not np.isfinite(condition) or condition > singular_cond:
            raise SingularJacobianError(condition, iterations)
        b = -np.concatenate([F.real, F.imag])
        try:
            delta = np.linalg.solve(A, b)
        except np.linalg.LinAlgError:
            raise SingularJacobianError(float("inf"), iterations)
        step = delta[: problem.n_vars] + 1j * delta[problem.n_vars:]

        t = 1.0
        for _ in range(spec.max_halvings + 1):
            x_new = x + t * step
            F_new = problem.residual(x_new)
            norm_new = _inf_norm(F_new)
            if norm_new < norm:
                break
            t /= 2.0
        else:
            logger.debug(f"Newton stalled at iteration {iterations}: no decrease after {spec.max_halvings} halvings")
            break

        x, F, norm = x_new, F_new, norm_new
        history.append(norm)
        if norm < best_norm:
            best_x, best_norm = x.copy(), norm
        logger.debug(f"Newton iteration {iterations + 1}: |F|inf = {norm:.3e}, step scale {t}")

    if not converged:
        x, norm = best_x, best_norm
        logger.warning(f"Newton did not converge after {iterations} iteration(s); best residual {norm:.3e}")
    else:
        logger.info(f"Newton converged in {iterations} iteration(s); residual {norm:.3e}")
    record_business_metric("newton_runs", tags={"converged": str(converged).lower()})

    Z, ratios, solved = _build(problem, system, x)
    return NewtonResult(
        Z=Z,
        ratios=ratios,
        system=solved,
        iterations=iterations,
        residual_norm=norm,
        converged=converged,
        history=history,
        condition=condition,
    )


def residual_jacobian(
    system: HomogeneousSystem,
    Z: Scalar,
    r: RatioVector,
    unknowns: Optional[Sequence[Unknown]] = None,
) -> np.ndarray:
    """Analytic complex Jacobian of the residuals with respect to ``unknowns``."""
    chosen = list(unknowns) if unknowns else [Unknown.z()] + [Unknown.ratio(k) for k in range(1, system.n_vars)]
    problem = _Problem(system, Z.to_complex(), [v.to_complex() for v in r.free], chosen)
    return problem.jacobian(problem.initial_vector())


def finite_difference_jacobian(
    system: HomogeneousSystem,
    Z: Scalar,
    r: RatioVector,
    unknowns: Optional[Sequence[Unknown]] = None,
    step: float = 1e-6,
) -> np.ndarray:
    """Central differences along the real axis of each unknown."""
    chosen = list(unknowns) if unknowns else [Unknown.z()] + [Unknown.ratio(k) for k in range(1, system.n_vars)]
    problem = _Problem(system, Z.to_complex(), [v.to_complex() for v in r.free], chosen)
    x0 = problem.initial_vector()
    J = np.empty((problem.n_vars, len(chosen)), dtype=complex)
    for j in range(len(chosen)):
        e = np.zeros_like(x0)
        e[j] = step
        J[:, j] = (problem.residual(x0 + e) - problem.residual(x0 - e)) / (2.0 * step)
    return J


def jacobian_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(analytic))) if analytic.size else 1.0)
    return float(np.max(np.abs(analytic - numeric))) / scale if analytic.size else 0.0
