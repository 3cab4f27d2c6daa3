import numpy as np
import numpy.testing as npt
import pytest

from homsolve.dependencies.error_code import NonConvergenceError, RegimeMismatchError, SingularJacobianError
from homsolve.models.scalar import Regime, Scalar
from homsolve.models.system import HomogeneousSystem
from homsolve.services.constraints import SolveMode, SolveSpec, Unknown, constraint_residuals
from homsolve.services.generator import perturb_coefficient, random_solvable_instance
from homsolve.services.harness import solve_instance, sweep_shape
from homsolve.services.newton import (
    finite_difference_jacobian,
    jacobian_relative_error,
    newton_solve,
    residual_jacobian,
)

PERTURBATION = 1e-3


def _guess_spec(instance, delta=PERTURBATION, **controls):
    return SolveSpec(
        SolveMode.NEWTON,
        guess_z=instance.Z + delta,
        guess_ratios=[r + delta for r in instance.ratios.free],
        **controls,
    )


def test_jacobian_matches_hand_derivatives(hand_instance):
    flt = hand_instance.to_float()
    J = residual_jacobian(flt.system, flt.Z, flt.ratios)
    # res_1 = Z r1 - (r1^2 + r1 + 1), res_2 = Z - (2 r1^2 + 1) at Z = 3, r1 = 1
    npt.assert_allclose(J, np.array([[1.0, 0.0], [1.0, -4.0]]), atol=1e-14)


def test_newton_recovers_perturbed_instances():
    converged = 0
    for seed in range(50):
        n_vars, degree = sweep_shape(seed)
        truth = random_solvable_instance(n_vars, degree, seed=seed, regime=Regime.FLOAT)

        analytic = residual_jacobian(truth.system, truth.Z, truth.ratios)
        numeric = finite_difference_jacobian(truth.system, truth.Z, truth.ratios)
        assert jacobian_relative_error(analytic, numeric) <= 1e-5

        try:
            result = newton_solve(truth.system, _guess_spec(truth, max_iter=25))
        except SingularJacobianError:
            continue
        if result.converged and result.residual_norm <= 1e-12 * (1.0 + result.Z.magnitude()):
            converged += 1
    assert converged >= 45


def test_newton_solves_for_a_coefficient_unknown(float_instance):
    target = (1, (1, 2))
    truth = float_instance.system.coefficient(*target)
    shifted = perturb_coefficient(float_instance.system, *target, Scalar.floating(PERTURBATION))
    spec = SolveSpec(
        SolveMode.NEWTON,
        guess_z=float_instance.Z + PERTURBATION,
        guess_ratios=list(float_instance.ratios.free),
        unknowns=[Unknown.z(), Unknown.coefficient(*target)],
    )
    result = newton_solve(shifted, spec)
    assert result.converged
    assert abs(result.system.coefficient(*target).to_complex() - truth.to_complex()) < 1e-9
    assert abs(result.Z.to_complex() - float_instance.Z.to_complex()) < 1e-9
    assert result.ratios == float_instance.ratios


def test_coefficient_jacobian_matches_finite_differences(float_instance):
    unknowns = [Unknown.ratio(1), Unknown.coefficient(2, (0, 3))]
    analytic = residual_jacobian(float_instance.system, float_instance.Z, float_instance.ratios, unknowns)
    numeric = finite_difference_jacobian(float_instance.system, float_instance.Z, float_instance.ratios, unknowns)
    assert analytic.shape == (2, 2)
    assert jacobian_relative_error(analytic, numeric) <= 1e-5
    npt.assert_allclose(analytic[:, 1], [0.0, -1.0], atol=1e-14)


def test_starting_at_a_solution_takes_no_iterations(float_instance):
    result = newton_solve(float_instance.system, _guess_spec(float_instance, delta=0.0))
    assert result.converged
    assert result.iterations == 0
    assert result.history == [result.residual_norm]


def test_history_decreases(float_instance):
    result = newton_solve(float_instance.system, _guess_spec(float_instance))
    assert result.converged
    assert all(b < a for a, b in zip(result.history, result.history[1:]))
    residuals = constraint_residuals(result.system, result.Z, result.ratios)
    assert max(res.magnitude() for res in residuals) <= 1e-12 * (1.0 + result.Z.magnitude())


def test_iteration_limit_returns_best_iterate(float_instance):
    result = newton_solve(float_instance.system, _guess_spec(float_instance, delta=0.1, max_iter=0))
    assert not result.converged
    assert result.iterations == 0
    assert result.residual_norm > 0.0


def test_singular_jacobian():
    system = HomogeneousSystem(2, 2, {(1, (0, 2)): Scalar.floating(1.0)}, Regime.FLOAT)
    spec = SolveSpec(SolveMode.NEWTON, guess_z=Scalar.floating(0.0), guess_ratios=[Scalar.floating(0.3)])
    with pytest.raises(SingularJacobianError) as exc:
        newton_solve(system, spec)
    assert exc.value.exit_code == 3


def test_newton_needs_float_regime(hand_system):
    spec = SolveSpec(SolveMode.NEWTON, guess_z=Scalar.floating(3.0), guess_ratios=[Scalar.floating(1.0)])
    with pytest.raises(RegimeMismatchError):
        newton_solve(hand_system, spec)


def test_solve_instance_converts_exact_systems(hand_system):
    spec = SolveSpec(SolveMode.NEWTON, guess_z=Scalar.floating(2.9), guess_ratios=[Scalar.floating(1.05)])
    instance = solve_instance(hand_system, spec)
    assert instance.regime is Regime.FLOAT
    assert instance.certificate.mode == "newton"
    assert abs(instance.Z.to_complex() - 3.0) < 1e-9


def test_solve_instance_reports_non_convergence(hand_system):
    spec = SolveSpec(SolveMode.NEWTON, guess_z=Scalar.floating(2.0), guess_ratios=[Scalar.floating(2.0)], max_iter=0)
    with pytest.raises(NonConvergenceError) as exc:
        solve_instance(hand_system, spec)
    assert exc.value.exit_code == 3
