"""Complex scalars in two precision regimes.

Exact scalars are Gaussian rationals (``Fraction`` real and imaginary parts)
and never round. Float scalars are pairs of doubles guarded by an overflow
threshold, so that a verification run never continues on ``inf``/``nan``.
"""
from __future__ import annotations

import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Iterator, Tuple, Union

from homsolve.core.config import settings
from homsolve.dependencies.error_code import (
    ErrorCode,
    RegimeMismatchError,
    ScalarOverflowError,
    ValidationError,
    ZeroDivisionScalarError,
)


class Regime(str, Enum):
    EXACT = "exact"
    FLOAT = "float"


Part = Union[Fraction, float]
Operand = Union["Scalar", int, Fraction, float, complex]


def _check_float(re: float, im: float) -> None:
    magnitude = math.hypot(re, im)
    if not math.isfinite(magnitude) or magnitude > settings.FLOAT_OVERFLOW_THRESHOLD:
        raise ScalarOverflowError(magnitude)


@dataclass(frozen=True)
class BigExponent:
    """Nonnegative arbitrary-precision integer exponent."""

    value: int

    def __post_init__(self):
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise ValidationError(f"exponent must be an integer, got {self.value!r}")
        if self.value < 0:
            raise ValidationError(f"exponent must be nonnegative, got {self.value}")

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def __add__(self, other: Union["BigExponent", int]) -> "BigExponent":
        return BigExponent(self.value + int(other))

    __radd__ = __add__

    def __mul__(self, other: Union["BigExponent", int]) -> "BigExponent":
        return BigExponent(self.value * int(other))

    __rmul__ = __mul__

    def __lt__(self, other: Union["BigExponent", int]) -> bool:
        return self.value < int(other)

    def __le__(self, other: Union["BigExponent", int]) -> bool:
        return self.value <= int(other)

    def __gt__(self, other: Union["BigExponent", int]) -> bool:
        return self.value > int(other)

    def __ge__(self, other: Union["BigExponent", int]) -> bool:
        return self.value >= int(other)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, BigExponent):
            return self.value == other.value
        if isinstance(other, int) and not isinstance(other, bool):
            return self.value == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)

    def bit_length(self) -> int:
        return self.value.bit_length()


@dataclass(frozen=True, eq=False)
class Scalar:
    regime: Regime
    re: Part
    im: Part

    def __post_init__(self):
        try:
            object.__setattr__(self, "regime", Regime(self.regime))
        except ValueError:
            raise ValidationError(f"unknown regime {self.regime!r}")
        if self.regime is Regime.EXACT:
            for part in (self.re, self.im):
                if not isinstance(part, Fraction):
                    raise RegimeMismatchError(f"exact scalar parts must be Fractions, got {type(part).__name__}")
        elif self.regime is Regime.FLOAT:
            for part in (self.re, self.im):
                if not isinstance(part, float):
                    raise RegimeMismatchError(f"float scalar parts must be floats, got {type(part).__name__}")
            _check_float(self.re, self.im)
        else:
            raise ValidationError(f"unknown regime {self.regime!r}")

    @classmethod
    def exact(cls, re: Union[int, Fraction, str] = 0, im: Union[int, Fraction, str] = 0) -> "Scalar":
        return cls(Regime.EXACT, _to_fraction(re), _to_fraction(im))

    @classmethod
    def floating(cls, re: Union[int, float] = 0.0, im: Union[int, float] = 0.0) -> "Scalar":
        return cls(Regime.FLOAT, float(re), float(im))

    @classmethod
    def from_complex(cls, value: complex) -> "Scalar":
        return cls(Regime.FLOAT, float(value.real), float(value.imag))

    @classmethod
    def zero(cls, regime: Regime) -> "Scalar":
        return cls.exact(0) if regime is Regime.EXACT else cls.floating(0.0)

    @classmethod
    def one(cls, regime: Regime) -> "Scalar":
        return cls.exact(1) if regime is Regime.EXACT else cls.floating(1.0)

    @classmethod
    def lift(cls, value: Operand, regime: Regime) -> "Scalar":
        """Bring a Python number into ``regime``; Scalars must already match."""
        if isinstance(value, Scalar):
            if value.regime is not regime:
                raise RegimeMismatchError(f"cannot combine {value.regime.value} and {regime.value} scalars")
            return value
        if isinstance(value, bool):
            raise ValidationError("booleans are not scalars")
        if isinstance(value, (int, Rational)):
            if regime is Regime.EXACT:
                return cls.exact(Fraction(value))
            return cls.floating(float(value))
        if isinstance(value, float):
            if regime is Regime.EXACT:
                raise RegimeMismatchError("float literal used in exact arithmetic")
            return cls.floating(value)
        if isinstance(value, complex):
            if regime is Regime.EXACT:
                raise RegimeMismatchError("complex literal used in exact arithmetic")
            return cls.from_complex(value)
        raise ValidationError(f"unsupported scalar operand {value!r}")

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def to_complex(self) -> complex:
        try:
            return complex(float(self.re), float(self.im))
        except OverflowError:
            raise ScalarOverflowError(math.inf)

    def abs_squared(self) -> Part:
        return self.re * self.re + self.im * self.im

    def magnitude(self) -> float:
        """|x| as a float; ``inf`` when an exact value exceeds the double range."""
        if self.regime is Regime.FLOAT:
            return math.hypot(self.re, self.im)
        try:
            return math.hypot(float(self.re), float(self.im))
        except OverflowError:
            return math.inf

    def bit_size(self) -> int:
        """Largest numerator or denominator bit length (53 for floats)."""
        if self.regime is Regime.FLOAT:
            return 53
        return max(
            self.re.numerator.bit_length(),
            self.re.denominator.bit_length(),
            self.im.numerator.bit_length(),
            self.im.denominator.bit_length(),
        )

    def _binary(self, other: Operand) -> "Scalar":
        return Scalar.lift(other, self.regime)

    def __neg__(self) -> "Scalar":
        return Scalar(self.regime, -self.re, -self.im)

    def __pos__(self) -> "Scalar":
        return self

    def __add__(self, other: Operand) -> "Scalar":
        o = self._binary(other)
        if self.regime is Regime.FLOAT:
            return Scalar.from_complex(complex(self.re, self.im) + complex(o.re, o.im))
        return Scalar(Regime.EXACT, self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: Operand) -> "Scalar":
        return self + (-self._binary(other))

    def __rsub__(self, other: Operand) -> "Scalar":
        return self._binary(other) - self

    def __mul__(self, other: Operand) -> "Scalar":
        o = self._binary(other)
        if self.regime is Regime.FLOAT:
            return Scalar.from_complex(complex(self.re, self.im) * complex(o.re, o.im))
        if self.im == 0 and o.im == 0:
            return Scalar(Regime.EXACT, self.re * o.re, Fraction(0))
        return Scalar(
            Regime.EXACT,
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: Operand) -> "Scalar":
        o = self._binary(other)
        if o.is_zero:
            raise ZeroDivisionScalarError("division by the zero scalar")
        if self.regime is Regime.FLOAT:
            return Scalar.from_complex(complex(self.re, self.im) / complex(o.re, o.im))
        if o.im == 0:
            return Scalar(Regime.EXACT, self.re / o.re, self.im / o.re)
        denominator = o.re * o.re + o.im * o.im
        return Scalar(
            Regime.EXACT,
            (self.re * o.re + self.im * o.im) / denominator,
            (self.im * o.re - self.re * o.im) / denominator,
        )

    def __rtruediv__(self, other: Operand) -> "Scalar":
        return self._binary(other) / self

    def __pow__(self, exponent: Union[int, BigExponent]) -> "Scalar":
        return pow_int(self, exponent)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Scalar):
            return self.regime is other.regime and self.re == other.re and self.im == other.im
        if isinstance(other, bool):
            return NotImplemented
        if isinstance(other, (int, Fraction)):
            return self.re == other and self.im == 0
        if isinstance(other, (float, complex)) and self.regime is Regime.FLOAT:
            return complex(self.re, self.im) == complex(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.regime, self.re, self.im))

    def __repr__(self) -> str:
        return f"Scalar({self.regime.value}, {self.re}, {self.im})"

    def __str__(self) -> str:
        with unlimited_int_digits():
            if self.im == 0:
                return str(self.re)
            sign = "-" if self.im < 0 else "+"
            return f"{self.re}{sign}{abs(self.im)}i"


@contextmanager
def unlimited_int_digits() -> Iterator[None]:
    """Lift the interpreter's int/str conversion limit inside the block."""
    if not hasattr(sys, "get_int_max_str_digits"):
        yield
        return
    previous = sys.get_int_max_str_digits()
    sys.set_int_max_str_digits(0)
    try:
        yield
    finally:
        sys.set_int_max_str_digits(previous)


def _to_fraction(value: Union[int, Fraction, str]) -> Fraction:
    if isinstance(value, bool):
        raise ValidationError("booleans are not scalars", code=ErrorCode.INVALID_SCALAR)
    if isinstance(value, float):
        raise RegimeMismatchError("float value given for an exact scalar")
    try:
        with unlimited_int_digits():
            return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise ValidationError(f"invalid exact value {value!r}: {e}", code=ErrorCode.INVALID_SCALAR)


def _gaussian_int_pow(a: int, b: int, e: int) -> Tuple[int, int]:
    re, im = 1, 0
    while e:
        if e & 1:
            re, im = re * a - im * b, re * b + im * a
        e >>= 1
        if e:
            a, b = a * a - b * b, 2 * a * b
    return re, im


def pow_int(base: Scalar, e: Union[int, BigExponent]) -> Scalar:
    """``base**e`` by repeated squaring, with 0**0 == 1."""
    exponent = int(BigExponent(e) if not isinstance(e, BigExponent) else e)
    if exponent == 0:
        return Scalar.one(base.regime)
    if base.is_zero:
        return Scalar.zero(base.regime)

    if base.regime is Regime.EXACT:
        if base.im == 0:
            return Scalar(Regime.EXACT, base.re ** exponent, Fraction(0))
        # (a + bi)/d with integer a, b
        d = math.lcm(base.re.denominator, base.im.denominator)
        a = base.re.numerator * (d // base.re.denominator)
        b = base.im.numerator * (d // base.im.denominator)
        re, im = _gaussian_int_pow(a, b, exponent)
        scale = d ** exponent
        return Scalar(Regime.EXACT, Fraction(re, scale), Fraction(im, scale))

    result = Scalar.one(Regime.FLOAT)
    square = base
    while exponent:
        if exponent & 1:
            result = result * square
        exponent >>= 1
        if exponent:
            square = square * square
    return result


def to_float(x: Scalar) -> Scalar:
    """Nearest double-precision complex to an exact scalar."""
    if x.regime is Regime.FLOAT:
        return x
    try:
        re, im = float(x.re), float(x.im)
    except OverflowError:
        raise ScalarOverflowError(math.inf)
    return Scalar.floating(re, im)


def parse_scalar_part(value: Union[str, int, float], regime: Regime) -> Part:
    """Parse one real/imaginary part: ``"p/q"``/``"p"`` when exact, a number when float."""
    if isinstance(value, bool):
        raise ValidationError("booleans are not scalars", code=ErrorCode.INVALID_SCALAR)
    if regime is Regime.EXACT:
        if isinstance(value, float):
            raise ValidationError(
                f"exact values must be written as strings 'p/q', got {value!r}", code=ErrorCode.INVALID_SCALAR
            )
        return _to_fraction(value)
    try:
        return float(value)
    except (ValueError, TypeError) as e:
        raise ValidationError(f"invalid float value {value!r}: {e}", code=ErrorCode.INVALID_SCALAR)


def format_scalar_part(part: Part) -> Union[str, float]:
    if isinstance(part, Fraction):
        with unlimited_int_digits():
            return str(part)
    return float(part)


def parse_scalar(re: Union[str, int, float], im: Union[str, int, float], regime: Regime) -> Scalar:
    return Scalar(regime, parse_scalar_part(re, regime), parse_scalar_part(im, regime))
