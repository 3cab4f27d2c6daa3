"""Forward iteration of z~_n = sum c * prod z_l**m_l and its closed-form solution."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

from homsolve.dependencies.error_code import RegimeMismatchError, ScalarOverflowError, ValidationError
from homsolve.models.scalar import BigExponent, Regime, Scalar, pow_int
from homsolve.models.system import HomogeneousSystem, StateVector, ensure_valid, monomial_from_table, power_table

logger = logging.getLogger(__name__)


class TruncationReason(str, Enum):
    OVERFLOW = "overflow"
    SIZE_BUDGET = "size-budget"


@dataclass
class Trajectory:
    states: List[StateVector]
    horizon: int
    truncated_at: Optional[int] = None
    truncation_reason: Optional[TruncationReason] = None

    @property
    def achieved_horizon(self) -> int:
        return len(self.states) - 1

    @property
    def truncated(self) -> bool:
        return self.truncated_at is not None

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, s: int) -> StateVector:
        return self.states[s]


def eval_rhs(system: HomogeneousSystem, z: StateVector) -> StateVector:
    """One application of the map: the state at step s+1."""
    if len(z) != system.n_vars:
        raise ValidationError(f"state has {len(z)} components, system has {system.n_vars} variables")
    if z.regime is not system.regime:
        raise RegimeMismatchError(f"{z.regime.value} state used with a {system.regime.value} system")

    table = power_table(z.components, system.monomials)
    zero = Scalar.zero(system.regime)
    components = []
    for n in range(1, system.n_vars + 1):
        total = zero
        for mi, c in system.terms(n):
            total = total + c * monomial_from_table(mi, table)
        components.append(total)
    return StateVector(tuple(components), z.step + 1)


def iterate(
    system: HomogeneousSystem,
    z0: StateVector,
    horizon: int,
    max_bits: Optional[int] = None,
) -> Trajectory:
    """States for s = 0..horizon; overflow and the exact size budget truncate in-band."""
    if horizon < 0:
        raise ValidationError(f"horizon must be nonnegative, got {horizon}")
    ensure_valid(system)

    states = [z0.with_step(0)]
    coefficient_bits = system.max_coefficient_bits() if system.regime is Regime.EXACT else 0
    for s in range(1, horizon + 1):
        current = states[-1]
        if max_bits is not None and current.regime is Regime.EXACT:
            predicted = system.degree * current.bit_size() + coefficient_bits + system.n_terms.bit_length()
            if predicted > max_bits:
                logger.debug(f"Iteration stopped at step {s}: predicted {predicted} bits > budget {max_bits}")
                return Trajectory(states, horizon, s, TruncationReason.SIZE_BUDGET)
        try:
            states.append(eval_rhs(system, current))
        except ScalarOverflowError as e:
            logger.debug(f"Iteration overflowed at step {s}: {e}")
            return Trajectory(states, horizon, s, TruncationReason.OVERFLOW)
    return Trajectory(states, horizon)


def geometric_exponent(degree: int, s: int) -> BigExponent:
    """1 + M + ... + M**(s-1) == (M**s - 1)/(M - 1)."""
    if degree < 2:
        raise ValidationError(f"degree must be >= 2, got {degree}")
    if s < 0:
        raise ValidationError(f"step must be nonnegative, got {s}")
    return BigExponent((degree ** s - 1) // (degree - 1))


def power_exponent(degree: int, s: int) -> BigExponent:
    """M**s - 1, the exponent of z_N(0)."""
    if degree < 2:
        raise ValidationError(f"degree must be >= 2, got {degree}")
    if s < 0:
        raise ValidationError(f"step must be nonnegative, got {s}")
    return BigExponent(degree ** s - 1)


def closed_form_state(z0: StateVector, Z: Scalar, degree: int, s: int) -> StateVector:
    """z_n(s) = z_n(0) * z_N(0)**(M**s - 1) * Z**((M**s - 1)/(M - 1))."""
    if Z.regime is not z0.regime:
        raise RegimeMismatchError(f"{Z.regime.value} Z used with a {z0.regime.value} initial state")
    factor = pow_int(z0.last, power_exponent(degree, s)) * pow_int(Z, geometric_exponent(degree, s))
    return StateVector(tuple(zn * factor for zn in z0), s)


def predicted_closed_form_bits(z0: StateVector, Z: Scalar, degree: int, s: int) -> int:
    """Upper estimate of the bit size of closed_form_state(z0, Z, degree, s)."""
    e1 = int(power_exponent(degree, s))
    e2 = int(geometric_exponent(degree, s))
    return (
        z0.bit_size()
        + e1 * (z0.last.bit_size() + 1)
        + e2 * (Z.bit_size() + 1)
    )


def closed_form_trajectory(
    z0: StateVector,
    Z: Scalar,
    degree: int,
    horizon: int,
    max_bits: Optional[int] = None,
) -> Trajectory:
    if horizon < 0:
        raise ValidationError(f"horizon must be nonnegative, got {horizon}")
    states: List[StateVector] = []
    for s in range(horizon + 1):
        if max_bits is not None and z0.regime is Regime.EXACT and s > 0:
            predicted = predicted_closed_form_bits(z0, Z, degree, s)
            if predicted > max_bits:
                logger.debug(f"Closed form stopped at step {s}: predicted {predicted} bits > budget {max_bits}")
                return Trajectory(states, horizon, s, TruncationReason.SIZE_BUDGET)
        try:
            states.append(closed_form_state(z0, Z, degree, s))
        except ScalarOverflowError as e:
            logger.debug(f"Closed form overflowed at step {s}: {e}")
            return Trajectory(states, horizon, s, TruncationReason.OVERFLOW)
    return Trajectory(states, horizon)


def is_degenerate(Z: Scalar) -> bool:
    """Z = 0 collapses the closed form to zero from s = 1 on."""
    return Z.is_zero
