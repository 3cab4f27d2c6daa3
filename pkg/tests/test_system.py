import math
from collections import Counter
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np
import pytest

from homsolve.dependencies.error_code import ErrorCode, ValidationError
from homsolve.models.scalar import Regime, Scalar, pow_int
from homsolve.models.system import (
    HomogeneousSystem,
    MultiIndex,
    StateVector,
    enumerate_multi_indices,
    ensure_valid,
    monomial_eval,
    multi_index_count,
    validate_system,
)


def test_descending_lex_order():
    assert enumerate_multi_indices(2, 2) == [(2, 0), (1, 1), (0, 2)]
    assert enumerate_multi_indices(3, 2) == [
        (2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2),
    ]
    assert enumerate_multi_indices(1, 4) == [(4,)]
    assert enumerate_multi_indices(3, 0) == [(0, 0, 0)]


def _brute_force(n_vars, degree):
    found = set()
    for combo in combinations_with_replacement(range(n_vars), degree):
        counts = Counter(combo)
        found.add(tuple(counts.get(l, 0) for l in range(n_vars)))
    return sorted(found, reverse=True)


@pytest.mark.parametrize("n_vars", range(1, 9))
def test_enumeration_agrees_with_brute_force_and_binomial(n_vars):
    for degree in range(0, 9):
        indices = enumerate_multi_indices(n_vars, degree)
        assert [tuple(mi) for mi in indices] == _brute_force(n_vars, degree)
        assert len(indices) == multi_index_count(n_vars, degree) == math.comb(degree + n_vars - 1, n_vars - 1)
        assert all(mi.degree == degree for mi in indices)


def test_enumeration_rejects_bad_shapes():
    with pytest.raises(ValidationError):
        enumerate_multi_indices(0, 2)
    with pytest.raises(ValidationError):
        multi_index_count(2, -1)


def test_multi_index_rejects_non_integers():
    with pytest.raises(ValidationError) as exc:
        MultiIndex([1.5, 0])
    assert exc.value.code is ErrorCode.INVALID_MULTI_INDEX


def test_monomial_zero_to_the_zero():
    z = StateVector.of([0, 3])
    assert monomial_eval((0, 2), z) == 9
    assert monomial_eval((1, 1), z).is_zero


def test_monomial_examples():
    assert monomial_eval((2, 1), StateVector.of([3, 2])) == 18
    assert monomial_eval((1, 3), StateVector.of([2, Scalar.exact(1, 1)])) == Scalar.exact(-4, 4)


def test_monomials_are_homogeneous():
    rng = np.random.default_rng(31)
    for _ in range(20):
        parts = [Fraction(int(p), int(q)) for p, q in zip(rng.integers(-50, 50, size=6), rng.integers(1, 20, size=6))]
        z = StateVector.of([Scalar.exact(parts[0], parts[1]), Scalar.exact(parts[2], parts[3]), Scalar.exact(parts[4])])
        lam = Scalar.exact(parts[5], 1)
        for mi in enumerate_multi_indices(3, 4):
            assert monomial_eval(mi, z.scaled(lam)) == pow_int(lam, 4) * monomial_eval(mi, z)


def test_system_monomials_lists_stored_indices(hand_system):
    assert hand_system.monomials == [MultiIndex((2, 0)), MultiIndex((1, 1)), MultiIndex((0, 2))]
    assert HomogeneousSystem.zero(2, 3).monomials == []


def test_from_flat_drops_zeros_and_keeps_order(hand_system):
    assert hand_system.n_terms == 5
    assert hand_system.terms(2) == [(MultiIndex((2, 0)), Scalar.exact(2)), (MultiIndex((0, 2)), Scalar.exact(1))]
    assert hand_system.coefficient(2, (1, 1)).is_zero


def test_from_flat_checks_row_shapes():
    with pytest.raises(ValidationError):
        HomogeneousSystem.from_flat(2, 2, [[1, 1, 1]])
    with pytest.raises(ValidationError):
        HomogeneousSystem.from_flat(2, 2, [[1, 1], [1, 1, 1]])


def test_with_coefficient_copies(hand_system):
    updated = hand_system.with_coefficient(2, (1, 1), Scalar.exact(5))
    assert updated.coefficient(2, (1, 1)) == 5
    assert hand_system.coefficient(2, (1, 1)).is_zero


def test_to_float(hand_system):
    flt = hand_system.to_float()
    assert flt.regime is Regime.FLOAT
    assert flt.coefficient(2, (2, 0)) == Scalar.floating(2.0)


def test_valid_system_has_no_violations(hand_system):
    assert validate_system(hand_system) == []
    assert ensure_valid(hand_system) is hand_system


@pytest.mark.parametrize(
    "system, kind",
    [
        (HomogeneousSystem(2, 2, {(1, (1, 0)): Scalar.exact(1)}), "degree mismatch"),
        (HomogeneousSystem(2, 2, {(3, (2, 0)): Scalar.exact(1)}), "equation out of range"),
        (HomogeneousSystem(2, 2, {(1, (2, 0, 0)): Scalar.exact(1)}), "length mismatch"),
        (HomogeneousSystem(2, 2, {(1, (3, -1)): Scalar.exact(1)}), "negative exponent"),
        (HomogeneousSystem(2, 2, {(1, (2, 0)): Scalar.floating(1.0)}), "regime mismatch"),
        (HomogeneousSystem(2, 1, {}), "degree must be ≥ 2"),
        (HomogeneousSystem(0, 2, {}), "n_vars must be ≥ 1"),
    ],
)
def test_violations_are_reported(system, kind):
    violations = validate_system(system)
    assert kind in [v.kind for v in violations]
    with pytest.raises(ValidationError) as exc:
        ensure_valid(system)
    assert exc.value.code is ErrorCode.INVALID_SYSTEM


def test_state_vector_is_one_based():
    z = StateVector.of([Fraction(1, 2), 3])
    assert z.component(1) == Scalar.exact("1/2")
    assert z.last == 3
    assert z.scaled(2) == StateVector.of([1, 6])
