from fractions import Fraction

import pytest

from homsolve.dependencies.error_code import ValidationError
from homsolve.models.scalar import Regime, Scalar
from homsolve.models.system import MultiIndex, enumerate_multi_indices
from homsolve.services.constraints import SolveMode, constraint_residuals
from homsolve.services.generator import perturb_coefficient, random_solvable_instance


def test_same_seed_same_instance():
    a = random_solvable_instance(3, 2, seed=42)
    b = random_solvable_instance(3, 2, seed=42)
    assert a.system.coeffs == b.system.coeffs
    assert a.Z == b.Z
    assert a.z0 == b.z0


def test_different_seeds_differ():
    a = random_solvable_instance(2, 3, seed=1)
    b = random_solvable_instance(2, 3, seed=2)
    assert (a.system.coeffs, a.Z, a.z0) != (b.system.coeffs, b.Z, b.z0)


@pytest.mark.parametrize("n_vars, degree", [(1, 2), (2, 4), (4, 3)])
def test_exact_instances_are_certified(n_vars, degree):
    instance = random_solvable_instance(n_vars, degree, seed=9)
    assert instance.certificate.max_residual == 0.0
    assert instance.certificate.mode == "generator-coefficients"
    assert all(res.is_zero for res in constraint_residuals(instance.system, instance.Z, instance.ratios))
    assert all(not z.is_zero for z in instance.z0)


def test_exact_draws_are_dyadic():
    instance = random_solvable_instance(2, 2, seed=3, denominator_bits=4)
    for z in instance.z0:
        assert (z.re.denominator & (z.re.denominator - 1)) == 0
    assert max(abs(instance.Z.re), abs(instance.Z.im)) <= 1


def test_z_pivot_mode():
    instance = random_solvable_instance(3, 3, seed=4, mode=SolveMode.Z_PIVOT)
    assert instance.certificate.mode == "generator-z-pivot"
    assert instance.certificate.max_residual == 0.0


def test_float_instances():
    instance = random_solvable_instance(3, 2, seed=4, regime=Regime.FLOAT)
    assert instance.regime is Regime.FLOAT
    assert instance.certificate.max_residual <= 1e-12 * (1.0 + instance.Z.magnitude())


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_vars": 0, "degree": 2},
        {"n_vars": 2, "degree": 1},
        {"n_vars": 2, "degree": 2, "density": 0.0},
        {"n_vars": 2, "degree": 2, "density": 1.5},
        {"n_vars": 2, "degree": 2, "mode": SolveMode.NEWTON},
    ],
)
def test_invalid_generator_arguments(kwargs):
    with pytest.raises(ValidationError):
        random_solvable_instance(seed=0, **kwargs)


def test_density_thins_the_basis():
    pure = MultiIndex((0, 0, 3))
    others = [mi for mi in enumerate_multi_indices(3, 3) if mi != pure]
    populated = 0
    trials = 40
    for seed in range(trials):
        instance = random_solvable_instance(3, 3, seed=seed, density=0.5)
        populated += sum((n, mi) in instance.system.coeffs for n in (1, 2, 3) for mi in others)
    fraction = populated / (trials * 3 * len(others))
    assert 0.4 <= fraction <= 0.6


def test_perturb_coefficient_changes_one_entry(exact_instance):
    delta = Scalar.exact(Fraction(1, 1000))
    shifted = perturb_coefficient(exact_instance.system, 2, (1, 1, 1), delta)
    assert shifted.coefficient(2, (1, 1, 1)) == exact_instance.system.coefficient(2, (1, 1, 1)) + delta
    changed = [key for key in shifted.coeffs if shifted.coeffs[key] != exact_instance.system.coefficient(*key)]
    assert changed == [(2, MultiIndex((1, 1, 1)))]
