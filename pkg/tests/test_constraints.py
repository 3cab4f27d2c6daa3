import logging

import numpy as np
import pytest

from homsolve.dependencies.error_code import (
    ErrorCode,
    RegimeMismatchError,
    SolverError,
    ValidationError,
    ZeroMonomialError,
    ZeroRatioError,
)
from homsolve.models.scalar import Regime, Scalar
from homsolve.models.system import HomogeneousSystem, MultiIndex, StateVector
from homsolve.services.constraints import (
    RatioVector,
    SolveMode,
    SolveSpec,
    Unknown,
    certify,
    constraint_residuals,
    max_residual,
    ratios_from_init,
    solve_designated_coefficients,
    solve_z_pivot,
)
from homsolve.services.generator import random_solvable_instance
from homsolve.services.harness import sweep_shape

from tests.conftest import random_system


def test_ratios_from_init():
    r = ratios_from_init(StateVector.of([3, -6, 3]))
    assert list(r) == [1, -2, 1]
    assert r.free == (Scalar.exact(1), Scalar.exact(-2))


def test_zero_last_component_is_rejected():
    with pytest.raises(ZeroRatioError) as exc:
        ratios_from_init(StateVector.of([1, 0]))
    assert str(exc.value) == "z_N(0) must be nonzero"


def test_ratio_vector_ends_in_one():
    with pytest.raises(ValidationError):
        RatioVector((Scalar.exact(2), Scalar.exact(2)))


def test_hand_instance_residuals(hand_system, hand_z0):
    r = ratios_from_init(hand_z0)
    assert all(res.is_zero for res in constraint_residuals(hand_system, Scalar.exact(3), r))
    residuals = constraint_residuals(hand_system, Scalar.exact(2), r)
    assert residuals == [Scalar.exact(-1), Scalar.exact(-1)]
    assert max_residual(residuals) == 1.0


def test_hand_instance_certifies(hand_instance):
    assert hand_instance.certificate.max_residual == 0.0
    assert hand_instance.certificate.mode == "hand"
    assert not hand_instance.degenerate


def test_certify_rejects_wrong_z(hand_system, hand_z0):
    with pytest.raises(SolverError) as exc:
        certify(hand_system, hand_z0, Scalar.exact(2), mode="hand")
    assert exc.value.code is ErrorCode.CONSTRAINTS_VIOLATED
    assert exc.value.exit_code == 3


def test_solve_designated_coefficients_zeroes_every_residual():
    rng = np.random.default_rng(2)
    for case in range(12):
        n_vars, degree = sweep_shape(case)
        system, pool = random_system(rng, n_vars, degree)
        r = RatioVector.from_free([pool.draw_nonzero() for _ in range(n_vars - 1)], Regime.EXACT)
        Z = pool.draw_nonzero()
        solved = solve_designated_coefficients(system, Z, r, SolveSpec.pure_power(n_vars, degree))
        assert all(res.is_zero for res in constraint_residuals(solved, Z, r))
        changed = {key for key in solved.coeffs if solved.coeffs[key] != system.coefficient(*key)}
        assert {n for n, _ in changed} <= set(range(1, n_vars + 1))
        assert len(changed) <= n_vars


def test_designated_monomial_must_not_vanish(hand_system):
    spec = SolveSpec(SolveMode.COEFFICIENTS, designated={1: (1, 1), 2: (0, 2)})
    r = RatioVector.from_free([Scalar.exact(0)], Regime.EXACT)
    with pytest.raises(ZeroMonomialError) as exc:
        solve_designated_coefficients(hand_system, Scalar.exact(3), r, spec)
    assert exc.value.equation == 1
    assert exc.value.exponents == (1, 1)


def test_z_pivot_solves_z_from_the_pivot_equation(hand_system, hand_z0):
    spec = SolveSpec(SolveMode.Z_PIVOT, designated={1: (1, 1)}, pivot_equation=2)
    r = ratios_from_init(hand_z0)
    Z, solved = solve_z_pivot(hand_system, r, spec)
    # equation 2 at r = (1, 1): Z = 2 + 1
    assert Z == 3
    assert solved.coefficient(1, (1, 1)) == 1
    assert certify(solved, hand_z0, Z, mode="z-pivot").certificate.max_residual == 0.0


def test_z_pivot_rejects_zero_pivot_ratio(hand_system):
    spec = SolveSpec(SolveMode.Z_PIVOT, designated={2: (0, 2)}, pivot_equation=1)
    r = RatioVector.from_free([Scalar.exact(0)], Regime.EXACT)
    with pytest.raises(ZeroRatioError):
        solve_z_pivot(hand_system, r, spec)


@pytest.mark.parametrize(
    "spec",
    [
        SolveSpec(SolveMode.COEFFICIENTS, designated={1: (2, 0)}),
        SolveSpec(SolveMode.COEFFICIENTS, designated={1: (2, 0), 2: (1, 0)}),
        SolveSpec(SolveMode.Z_PIVOT, designated={1: (2, 0), 2: (0, 2)}, pivot_equation=2),
        SolveSpec(SolveMode.Z_PIVOT, designated={1: (2, 0)}, pivot_equation=3),
        SolveSpec(SolveMode.NEWTON, guess_z=Scalar.floating(1.0), guess_ratios=[]),
        SolveSpec(
            SolveMode.NEWTON,
            guess_z=Scalar.floating(1.0),
            guess_ratios=[Scalar.floating(0.5)],
            unknowns=[Unknown.z(), Unknown.z()],
        ),
    ],
)
def test_invalid_solve_specs(hand_system, spec):
    with pytest.raises(ValidationError) as exc:
        spec.validate(hand_system)
    assert exc.value.code is ErrorCode.INVALID_SOLVE_SPEC


def test_mixed_regimes_are_rejected(hand_system):
    r = RatioVector.from_free([Scalar.floating(1.0)], Regime.FLOAT)
    with pytest.raises(RegimeMismatchError):
        constraint_residuals(hand_system, Scalar.exact(3), r)


def test_residuals_are_invariant_under_scaling_of_initial_data():
    for seed in range(100):
        n_vars, degree = sweep_shape(seed)
        instance = random_solvable_instance(n_vars, degree, seed=seed)
        lam = Scalar.exact(seed + 1, -3) / 7
        scaled = instance.z0.scaled(lam)
        assert ratios_from_init(scaled) == instance.ratios
        assert constraint_residuals(instance.system, instance.Z, ratios_from_init(scaled)) == constraint_residuals(
            instance.system, instance.Z, instance.ratios
        )


def test_zero_z_is_certified_but_flagged(caplog):
    system = HomogeneousSystem.zero(2, 3)
    with caplog.at_level(logging.WARNING):
        instance = certify(system, StateVector.of([1, 2]), Scalar.exact(0), mode="manual")
    assert instance.degenerate
    assert "Z = 0" in caplog.text


def test_pure_power_spec_skips_the_pivot():
    spec = SolveSpec.pure_power(3, 4, SolveMode.Z_PIVOT, pivot_equation=3)
    assert spec.designated == {1: MultiIndex((0, 0, 4)), 2: MultiIndex((0, 0, 4))}


def test_residuals_only_raise_the_powers_in_use():
    system = HomogeneousSystem(
        2, 2, {(1, (1, 1)): Scalar.floating(1.0), (2, (0, 2)): Scalar.floating(1.0)}, Regime.FLOAT
    )
    r = RatioVector.from_free([Scalar.floating(1e60)], Regime.FLOAT)
    assert all(res.is_zero for res in constraint_residuals(system, Scalar.floating(1.0), r))
