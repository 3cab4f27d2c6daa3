from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from homsolve.dependencies.error_code import ErrorCode, RegimeMismatchError, ValidationError
from homsolve.models.scalar import Operand, Regime, Scalar, pow_int, to_float

logger = logging.getLogger(__name__)


class MultiIndex(tuple):
    """Exponent vector (m_1, ..., m_N) of a monomial."""

    def __new__(cls, exponents: Iterable[int]):
        values = tuple(exponents)
        for m in values:
            if isinstance(m, bool) or not isinstance(m, int):
                raise ValidationError(
                    f"exponents must be integers, got {m!r}", code=ErrorCode.INVALID_MULTI_INDEX
                )
        return super().__new__(cls, values)

    @property
    def degree(self) -> int:
        return sum(self)

    @property
    def n_vars(self) -> int:
        return len(self)

    def __repr__(self) -> str:
        return f"MultiIndex{tuple(self)!r}"


CoefficientKey = Tuple[int, MultiIndex]


def _compositions(n: int, total: int) -> Iterator[Tuple[int, ...]]:
    if n == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(n - 1, total - first):
            yield (first,) + rest


def enumerate_multi_indices(n_vars: int, degree: int) -> List[MultiIndex]:
    """All exponent vectors summing to ``degree``, in descending lexicographic order."""
    if n_vars < 1:
        raise ValidationError(f"n_vars must be >= 1, got {n_vars}")
    if degree < 0:
        raise ValidationError(f"degree must be >= 0, got {degree}")
    return [MultiIndex(c) for c in _compositions(n_vars, degree)]


def multi_index_count(n_vars: int, degree: int) -> int:
    if n_vars < 1:
        raise ValidationError(f"n_vars must be >= 1, got {n_vars}")
    if degree < 0:
        raise ValidationError(f"degree must be >= 0, got {degree}")
    return math.comb(degree + n_vars - 1, n_vars - 1)


@dataclass(frozen=True)
class StateVector:
    components: Tuple[Scalar, ...]
    step: int = 0

    def __post_init__(self):
        components = tuple(self.components)
        if not components:
            raise ValidationError("state vector must have at least one component")
        regime = components[0].regime
        for c in components:
            if not isinstance(c, Scalar):
                raise ValidationError(f"state components must be Scalars, got {c!r}")
            if c.regime is not regime:
                raise RegimeMismatchError("state vector mixes exact and float components")
        if self.step < 0:
            raise ValidationError(f"step label must be nonnegative, got {self.step}")
        object.__setattr__(self, "components", components)

    @classmethod
    def of(cls, values: Sequence[Operand], regime: Regime = Regime.EXACT, step: int = 0) -> "StateVector":
        return cls(tuple(Scalar.lift(v, regime) for v in values), step)

    @property
    def n_vars(self) -> int:
        return len(self.components)

    @property
    def regime(self) -> Regime:
        return self.components[0].regime

    def component(self, n: int) -> Scalar:
        """1-based access, z_n."""
        return self.components[n - 1]

    @property
    def last(self) -> Scalar:
        return self.components[-1]

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self) -> Iterator[Scalar]:
        return iter(self.components)

    def __getitem__(self, i: int) -> Scalar:
        return self.components[i]

    def scaled(self, factor: Operand) -> "StateVector":
        return StateVector(tuple(c * factor for c in self.components), self.step)

    def with_step(self, step: int) -> "StateVector":
        return StateVector(self.components, step)

    def to_float(self) -> "StateVector":
        return StateVector(tuple(to_float(c) for c in self.components), self.step)

    def bit_size(self) -> int:
        return max(c.bit_size() for c in self.components)


def monomial_eval(mi: Sequence[int], z: Union[StateVector, Sequence[Scalar]]) -> Scalar:
    """prod_l z_l ** m_l, with 0**0 == 1."""
    components = tuple(z)
    if len(mi) != len(components):
        raise ValidationError(
            f"multi-index has {len(mi)} exponents but the state has {len(components)} components",
            code=ErrorCode.INVALID_MULTI_INDEX,
        )
    result = Scalar.one(components[0].regime)
    for zl, ml in zip(components, mi):
        if ml:
            result = result * pow_int(zl, ml)
    return result


@dataclass(frozen=True)
class HomogeneousSystem:
    """Sparse coefficients c[n, (m_1..m_N)] of z~_n = sum c * prod z_l**m_l; absent entries are zero."""

    n_vars: int
    degree: int
    coeffs: Mapping[CoefficientKey, Scalar] = field(default_factory=dict)
    regime: Regime = Regime.EXACT

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        normalized: Dict[CoefficientKey, Scalar] = {}
        for (n, mi), value in dict(self.coeffs).items():
            key = (int(n), mi if isinstance(mi, MultiIndex) else MultiIndex(mi))
            if key in normalized:
                raise ValidationError(
                    f"duplicate coefficient for equation {n}, exponents {tuple(mi)}",
                    code=ErrorCode.DUPLICATE_COEFFICIENT,
                )
            normalized[key] = value
        object.__setattr__(self, "coeffs", normalized)

    @classmethod
    def from_flat(
        cls,
        n_vars: int,
        degree: int,
        rows: Sequence[Sequence[Operand]],
        regime: Regime = Regime.EXACT,
    ) -> "HomogeneousSystem":
        """One row per equation, entries in descending-lex multi-index order; zeros are dropped."""
        basis = enumerate_multi_indices(n_vars, degree)
        if len(rows) != n_vars:
            raise ValidationError(f"expected {n_vars} coefficient rows, got {len(rows)}")
        coeffs: Dict[CoefficientKey, Scalar] = {}
        for n, row in enumerate(rows, start=1):
            if len(row) != len(basis):
                raise ValidationError(f"equation {n}: expected {len(basis)} coefficients, got {len(row)}")
            for mi, value in zip(basis, row):
                scalar = Scalar.lift(value, regime)
                if not scalar.is_zero:
                    coeffs[(n, mi)] = scalar
        return cls(n_vars, degree, coeffs, regime)

    @classmethod
    def zero(cls, n_vars: int, degree: int, regime: Regime = Regime.EXACT) -> "HomogeneousSystem":
        return cls(n_vars, degree, {}, regime)

    @cached_property
    def _by_equation(self) -> Dict[int, List[Tuple[MultiIndex, Scalar]]]:
        grouped: Dict[int, List[Tuple[MultiIndex, Scalar]]] = {n: [] for n in range(1, self.n_vars + 1)}
        for (n, mi), value in sorted(self.coeffs.items(), key=lambda kv: (kv[0][0], tuple(-m for m in kv[0][1]))):
            grouped.setdefault(n, []).append((mi, value))
        return grouped

    def terms(self, n: int) -> List[Tuple[MultiIndex, Scalar]]:
        """Stored (multi-index, coefficient) pairs of equation ``n`` in descending-lex order."""
        return self._by_equation.get(n, [])

    def coefficient(self, n: int, mi: Sequence[int]) -> Scalar:
        return self.coeffs.get((n, MultiIndex(mi)), Scalar.zero(self.regime))

    def with_coefficient(self, n: int, mi: Sequence[int], value: Scalar) -> "HomogeneousSystem":
        return self.with_coefficients({(n, MultiIndex(mi)): value})

    def with_coefficients(self, updates: Mapping[CoefficientKey, Scalar]) -> "HomogeneousSystem":
        merged = dict(self.coeffs)
        for (n, mi), value in updates.items():
            merged[(n, MultiIndex(mi))] = Scalar.lift(value, self.regime)
        return HomogeneousSystem(self.n_vars, self.degree, merged, self.regime)

    def to_float(self) -> "HomogeneousSystem":
        return HomogeneousSystem(
            self.n_vars,
            self.degree,
            {key: to_float(value) for key, value in self.coeffs.items()},
            Regime.FLOAT,
        )

    @property
    def monomials(self) -> List[MultiIndex]:
        """Distinct multi-indices with a stored coefficient."""
        return sorted({mi for _, mi in self.coeffs}, reverse=True)

    @property
    def n_terms(self) -> int:
        return len(self.coeffs)

    def max_coefficient_bits(self) -> int:
        return max((c.bit_size() for c in self.coeffs.values()), default=1)


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    equation: Optional[int] = None
    exponents: Optional[Tuple[int, ...]] = None

    def __str__(self) -> str:
        where = ""
        if self.equation is not None:
            where = f" [equation {self.equation}"
            if self.exponents is not None:
                where += f", exponents {self.exponents}"
            where += "]"
        return f"{self.kind}: {self.message}{where}"


def validate_system(system: HomogeneousSystem) -> List[Violation]:
    """Every invariant breach of ``system``; an empty list means the system is valid."""
    violations: List[Violation] = []
    if system.n_vars < 1:
        violations.append(Violation("n_vars must be ≥ 1", f"n_vars is {system.n_vars}"))
    if system.degree < 2:
        violations.append(
            Violation("degree must be ≥ 2", f"degree is {system.degree}; linear and constant maps are not supported")
        )

    for (n, mi), value in system.coeffs.items():
        exponents = tuple(mi)
        if not 1 <= n <= max(system.n_vars, 0):
            violations.append(Violation("equation out of range", f"equation must lie in 1..{system.n_vars}", n, exponents))
        if len(mi) != system.n_vars:
            violations.append(
                Violation("length mismatch", f"{len(mi)} exponents for {system.n_vars} variables", n, exponents)
            )
        if any(m < 0 for m in mi):
            violations.append(Violation("negative exponent", "exponents must be nonnegative", n, exponents))
        if mi.degree != system.degree:
            violations.append(
                Violation("degree mismatch", f"exponents sum to {mi.degree}, expected {system.degree}", n, exponents)
            )
        if not isinstance(value, Scalar) or value.regime is not system.regime:
            violations.append(
                Violation("regime mismatch", f"coefficient is not a {system.regime.value} scalar", n, exponents)
            )
    return violations


def ensure_valid(system: HomogeneousSystem) -> HomogeneousSystem:
    violations = validate_system(system)
    if violations:
        logger.debug(f"System rejected with {len(violations)} violation(s)")
        raise ValidationError(
            "; ".join(str(v) for v in violations),
            code=ErrorCode.INVALID_SYSTEM,
            details={"violations": [str(v) for v in violations]},
        )
    return system


def power_table(values: Sequence[Scalar], monomials: Iterable[Sequence[int]]) -> List[List[Scalar]]:
    """table[l][k] == values[l] ** k for k up to the largest exponent of variable l in ``monomials``."""
    top = [0] * len(values)
    for mi in monomials:
        for l, ml in enumerate(mi):
            top[l] = max(top[l], ml)
    table = []
    for v, highest in zip(values, top):
        powers = [Scalar.one(v.regime)]
        for _ in range(highest):
            powers.append(powers[-1] * v)
        table.append(powers)
    return table


def monomial_from_table(mi: Sequence[int], table: Sequence[Sequence[Scalar]]) -> Scalar:
    result = table[0][0]
    for l, ml in enumerate(mi):
        if ml:
            result = result * table[l][ml]
    return result
