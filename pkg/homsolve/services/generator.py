import logging
from fractions import Fraction
from typing import Dict, Sequence

import numpy as np

from homsolve.core.config import settings
from homsolve.core.monitoring import monitor_service_call
from homsolve.dependencies.error_code import ValidationError
from homsolve.models.scalar import Regime, Scalar
from homsolve.models.system import CoefficientKey, HomogeneousSystem, MultiIndex, enumerate_multi_indices
from homsolve.services.constraints import (
    RatioVector,
    SolvableInstance,
    SolveMode,
    SolveSpec,
    certify,
    solve_designated_coefficients,
    solve_z_pivot,
)

logger = logging.getLogger(__name__)


class ScalarPool:
    """Complex draws with real and imaginary parts in [-1, 1]."""

    def __init__(self, rng: np.random.Generator, regime: Regime, denominator_bits: int):
        self.rng = rng
        self.regime = regime
        self.denominator = 2 ** denominator_bits

    def _part(self):
        if self.regime is Regime.EXACT:
            k = int(self.rng.integers(-self.denominator, self.denominator + 1))
            return Fraction(k, self.denominator)
        return float(self.rng.uniform(-1.0, 1.0))

    def draw(self) -> Scalar:
        return Scalar(self.regime, self._part(), self._part())

    def draw_nonzero(self) -> Scalar:
        while True:
            value = self.draw()
            if not value.is_zero:
                return value


@monitor_service_call("random_solvable_instance")
def random_solvable_instance(
    n_vars: int,
    degree: int,
    seed: int,
    regime: Regime = Regime.EXACT,
    density: float = 1.0,
    denominator_bits: int = None,
    mode: SolveMode = SolveMode.COEFFICIENTS,
) -> SolvableInstance:
    """A certified instance: random coefficients, ratios and Z, then one z_N**M coefficient per equation solved.

    In z-pivot mode equation N determines Z and only equations 1..N-1 get a solved coefficient.
    """
    if n_vars < 1:
        raise ValidationError(f"n_vars must be >= 1, got {n_vars}")
    if degree < 2:
        raise ValidationError(f"degree must be >= 2, got {degree}")
    if not 0.0 < density <= 1.0:
        raise ValidationError(f"density must lie in (0, 1], got {density}")
    mode = SolveMode(mode)
    if mode is SolveMode.NEWTON:
        raise ValidationError("the generator solves linearly; use coefficients or z-pivot mode")
    regime = Regime(regime)
    bits = settings.GENERATOR_DENOMINATOR_BITS if denominator_bits is None else denominator_bits

    rng = np.random.default_rng(seed)
    pool = ScalarPool(rng, regime, bits)

    coeffs: Dict[CoefficientKey, Scalar] = {}
    for n in range(1, n_vars + 1):
        for mi in enumerate_multi_indices(n_vars, degree):
            if rng.random() < density:
                coeffs[(n, mi)] = pool.draw()
    system = HomogeneousSystem(n_vars, degree, coeffs, regime)

    r = RatioVector.from_free([pool.draw_nonzero() for _ in range(n_vars - 1)], regime)
    if mode is SolveMode.Z_PIVOT:
        spec = SolveSpec.pure_power(n_vars, degree, mode, pivot_equation=n_vars)
        Z, system = solve_z_pivot(system, r, spec)
    else:
        Z = pool.draw_nonzero()
        system = solve_designated_coefficients(system, Z, r, SolveSpec.pure_power(n_vars, degree))

    scale = pool.draw_nonzero()
    z0 = r.initial_state(scale)
    instance = certify(system, z0, Z, mode=f"generator-{mode.value}")
    logger.debug(
        f"Generated instance seed={seed} N={n_vars} M={degree} regime={regime.value} "
        f"terms={system.n_terms} residual={instance.certificate.max_residual:.3e}"
    )
    return instance


def perturb_coefficient(
    system: HomogeneousSystem,
    equation: int,
    exponents: Sequence[int],
    delta: Scalar,
) -> HomogeneousSystem:
    """Copy of ``system`` with c[equation, exponents] shifted by ``delta``."""
    mi = MultiIndex(exponents)
    return system.with_coefficient(equation, mi, system.coefficient(equation, mi) + delta)
