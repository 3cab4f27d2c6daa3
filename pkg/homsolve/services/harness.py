"""Trajectory-level verification of the closed form, the built-in N=2, M=4 example and batch runs."""
from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from homsolve.core.config import settings
from homsolve.core.monitoring import monitor_service_call, record_business_metric
from homsolve.dependencies.error_code import ErrorCode, NonConvergenceError, ValidationError
from homsolve.models.scalar import Regime, Scalar, to_float
from homsolve.models.system import HomogeneousSystem, MultiIndex, StateVector, enumerate_multi_indices
from homsolve.services.constraints import (
    RatioVector,
    SolvableInstance,
    SolveMode,
    SolveSpec,
    certify,
    ratios_from_init,
    solve_designated_coefficients,
    solve_z_pivot,
)
from homsolve.services.dynamics import TruncationReason, closed_form_trajectory, iterate
from homsolve.services.generator import ScalarPool, random_solvable_instance
from homsolve.services.newton import newton_solve

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    EXACT_MATCH = "ExactMatch"
    WITHIN_TOLERANCE = "WithinTolerance"
    MISMATCH = "Mismatch"
    TRUNCATED = "Truncated"


@dataclass(frozen=True)
class StepDeviation:
    step: int
    max_abs: float
    max_rel: float


@dataclass
class VerificationReport:
    horizon_requested: int
    horizon_achieved: int
    regime: Regime
    verdict: Verdict
    steps: List[StepDeviation] = field(default_factory=list)
    truncated_at: Optional[int] = None
    truncation_reason: Optional[TruncationReason] = None
    first_mismatch: Optional[Tuple[int, int]] = None
    degenerate: bool = False

    @property
    def max_rel(self) -> float:
        return max((d.max_rel for d in self.steps), default=0.0)

    @property
    def max_abs(self) -> float:
        return max((d.max_abs for d in self.steps), default=0.0)

    @property
    def ok(self) -> bool:
        return self.verdict is not Verdict.MISMATCH


def deviation(a: Scalar, b: Scalar) -> Tuple[float, float]:
    """(|a-b|, |a-b| / max(1, |a|, |b|)) as floats."""
    if a.regime is Regime.EXACT:
        if a == b:
            return 0.0, 0.0
        diff = a - b
        scale = max(Fraction(1), a.abs_squared(), b.abs_squared())
        try:
            rel = math.sqrt(float(diff.abs_squared() / scale))
        except OverflowError:
            rel = math.inf
        return diff.magnitude(), rel
    diff = abs(a.to_complex() - b.to_complex())
    return diff, diff / max(1.0, a.magnitude(), b.magnitude())


@monitor_service_call("verify_instance")
def verify_instance(
    instance: SolvableInstance,
    horizon: int,
    tol: Optional[float] = None,
    max_bits: Optional[int] = None,
) -> VerificationReport:
    """Compare direct iteration with the closed form at every step up to ``horizon``."""
    tol = settings.VERIFY_TOL if tol is None else tol
    max_bits = settings.EXACT_MAX_BITS if max_bits is None else max_bits
    regime = instance.regime
    system, z0 = instance.system, instance.z0

    iterated = iterate(system, z0, horizon, max_bits=max_bits)
    closed = closed_form_trajectory(z0, instance.Z, system.degree, horizon, max_bits=max_bits)
    achieved = min(iterated.achieved_horizon, closed.achieved_horizon)

    steps: List[StepDeviation] = []
    first_mismatch: Optional[Tuple[int, int]] = None
    for s in range(achieved + 1):
        worst_abs = worst_rel = 0.0
        for n, (a, b) in enumerate(zip(iterated[s], closed[s]), start=1):
            abs_dev, rel_dev = deviation(a, b)
            worst_abs, worst_rel = max(worst_abs, abs_dev), max(worst_rel, rel_dev)
            failed = (a != b) if regime is Regime.EXACT else not rel_dev <= tol
            if failed and first_mismatch is None:
                first_mismatch = (s, n)
        steps.append(StepDeviation(s, worst_abs, worst_rel))
        if first_mismatch is not None:
            achieved = s
            break

    truncated_at: Optional[int] = None
    reason: Optional[TruncationReason] = None
    for trajectory in (iterated, closed):
        if trajectory.truncated and (truncated_at is None or trajectory.truncated_at < truncated_at):
            truncated_at, reason = trajectory.truncated_at, trajectory.truncation_reason

    if first_mismatch is not None:
        verdict = Verdict.MISMATCH
    elif truncated_at is not None:
        verdict = Verdict.TRUNCATED
    elif regime is Regime.EXACT:
        verdict = Verdict.EXACT_MATCH
    else:
        verdict = Verdict.WITHIN_TOLERANCE

    report = VerificationReport(
        horizon_requested=horizon,
        horizon_achieved=achieved,
        regime=regime,
        verdict=verdict,
        steps=steps,
        truncated_at=truncated_at if first_mismatch is None else None,
        truncation_reason=reason if first_mismatch is None else None,
        first_mismatch=first_mismatch,
        degenerate=instance.degenerate,
    )
    record_business_metric("verdicts", tags={"verdict": verdict.value})
    if verdict is Verdict.MISMATCH:
        logger.info(f"Verification mismatch at step {first_mismatch[0]}, component {first_mismatch[1]}")
    else:
        logger.info(f"Verification verdict {verdict.value} to horizon {achieved}/{horizon}")
    return report


def solve_instance(
    system: HomogeneousSystem,
    spec: SolveSpec,
    z0: Optional[StateVector] = None,
    Z: Optional[Scalar] = None,
) -> SolvableInstance:
    """Run ``spec`` against ``system`` and certify the outcome."""
    if spec.mode is SolveMode.COEFFICIENTS:
        if z0 is None or Z is None:
            raise ValidationError("coefficients mode needs initial data and Z", code=ErrorCode.INVALID_SOLVE_SPEC)
        solved = solve_designated_coefficients(system, Z, ratios_from_init(z0), spec)
        return certify(solved, z0, Z, mode=spec.mode.value, tol=spec.tol)

    if spec.mode is SolveMode.Z_PIVOT:
        if z0 is None:
            raise ValidationError("z-pivot mode needs initial data", code=ErrorCode.INVALID_SOLVE_SPEC)
        Z_solved, solved = solve_z_pivot(system, ratios_from_init(z0), spec)
        return certify(solved, z0, Z_solved, mode=spec.mode.value, tol=spec.tol)

    if system.regime is Regime.EXACT:
        logger.info("Newton mode runs in the float regime; converting the exact system")
        system = system.to_float()
    result = newton_solve(system, spec)
    if not result.converged:
        raise NonConvergenceError(
            f"Newton did not converge in {result.iterations} iteration(s); best residual {result.residual_norm:.3e}",
            details={"iterations": result.iterations, "residual_norm": result.residual_norm},
        )
    scale = to_float(z0.last) if z0 is not None else None
    z_init = result.ratios.initial_state(scale)
    return certify(result.system, z_init, result.Z, mode=spec.mode.value, tol=spec.tol * 10)


@dataclass
class ExampleResult:
    coefficients_instance: SolvableInstance
    coefficients_report: VerificationReport
    pivot_instance: SolvableInstance
    pivot_report: VerificationReport

    @property
    def ok(self) -> bool:
        return (
            self.coefficients_report.verdict is Verdict.EXACT_MATCH
            and self.pivot_report.verdict is Verdict.EXACT_MATCH
        )


EXAMPLE_N = 2
EXAMPLE_M = 4
EXAMPLE_DESIGNATED = {1: MultiIndex((2, 2)), 2: MultiIndex((0, 4))}


@monitor_service_call("run_example")
def run_example(seed: Optional[int] = None, horizon: Optional[int] = None) -> ExampleResult:
    """N=2, M=4: solve 2 of the 10 coefficients, and separately Z plus 1 coefficient, then verify."""
    seed = settings.EXAMPLE_SEED if seed is None else seed
    horizon = settings.EXAMPLE_HORIZON if horizon is None else horizon
    pool = ScalarPool(np.random.default_rng(seed), Regime.EXACT, settings.GENERATOR_DENOMINATOR_BITS)

    basis = enumerate_multi_indices(EXAMPLE_N, EXAMPLE_M)
    coeffs = {(n, mi): pool.draw() for n in (1, 2) for mi in basis}
    system = HomogeneousSystem(EXAMPLE_N, EXAMPLE_M, coeffs, Regime.EXACT)
    r = RatioVector.from_free([pool.draw_nonzero()], Regime.EXACT)
    Z = pool.draw_nonzero()
    z0 = r.initial_state(pool.draw_nonzero())

    coefficient_spec = SolveSpec(SolveMode.COEFFICIENTS, designated=dict(EXAMPLE_DESIGNATED))
    coefficients_instance = solve_instance(system, coefficient_spec, z0=z0, Z=Z)
    coefficients_report = verify_instance(coefficients_instance, horizon)

    pivot_spec = SolveSpec(SolveMode.Z_PIVOT, designated={1: EXAMPLE_DESIGNATED[1]}, pivot_equation=2)
    pivot_instance = solve_instance(system, pivot_spec, z0=z0)
    pivot_report = verify_instance(pivot_instance, horizon)

    logger.info(
        f"Example seed={seed}: coefficients mode {coefficients_report.verdict.value}, "
        f"z-pivot mode {pivot_report.verdict.value}"
    )
    return ExampleResult(coefficients_instance, coefficients_report, pivot_instance, pivot_report)


def sweep_shape(i: int) -> Tuple[int, int]:
    """(N, M) for the i-th instance of a sweep over N in 1..4 and M in 2..4."""
    return 1 + i % 4, 2 + (i // 4) % 3


def generator_sweep(count: int, seed: int, regime: Regime = Regime.EXACT, density: float = 1.0) -> List[SolvableInstance]:
    instances = []
    for i in range(count):
        n_vars, degree = sweep_shape(i)
        instances.append(random_solvable_instance(n_vars, degree, seed + i, regime=regime, density=density))
    return instances


def verify_batch(
    instances: Sequence[SolvableInstance],
    horizon: int,
    tol: Optional[float] = None,
    workers: Optional[int] = None,
    max_bits: Optional[int] = None,
) -> List[VerificationReport]:
    """Verify independent instances, in worker processes when ``workers`` > 1."""
    workers = settings.BATCH_WORKERS if workers is None else workers
    task = partial(verify_instance, horizon=horizon, tol=tol, max_bits=max_bits)
    if workers <= 1 or len(instances) <= 1:
        return [task(instance) for instance in instances]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        reports = list(executor.map(task, instances))
    # worker processes keep their own registries
    for report in reports:
        record_business_metric("verdicts", tags={"verdict": report.verdict.value})
    return reports


def summarize(reports: Sequence[VerificationReport]) -> Dict[str, int]:
    counts = Counter(report.verdict.value for report in reports)
    return {verdict.value: counts.get(verdict.value, 0) for verdict in Verdict}
