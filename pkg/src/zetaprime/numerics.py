"""Arbitrary-precision reals and the working-precision budget.

All evaluation in the package runs on :mod:`mpmath` floats.  Precision is
counted in decimal digits; :func:`digits_to_bits` converts to the binary
precision mpmath actually uses, always rounding up.
"""

from __future__ import annotations

import math
import os
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

import mpmath
from mpmath import mpf

DEFAULT_GUARD_DIGITS = 30
GUARD_DIGITS_ENV = "ZETAPRIME_GUARD_DIGITS"

_LOG2_10 = math.log2(10)


class PrecisionError(ArithmeticError):
    """A quantity cancelled below what the working precision can resolve."""


def default_guard_digits() -> int:
    raw = os.environ.get(GUARD_DIGITS_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_GUARD_DIGITS
    value = int(raw)
    if value < 0:
        raise ValueError(f"{GUARD_DIGITS_ENV} must be non-negative, got {value}")
    return value


def digits_to_bits(digits: int) -> int:
    if digits < 1:
        raise ValueError(f"precision must be a positive digit count, got {digits}")
    return math.ceil(digits * _LOG2_10) + 1


@contextmanager
def working_digits(digits: int) -> Iterator[None]:
    """Run the enclosed mpmath arithmetic at ``digits`` decimal digits."""
    with mpmath.workprec(digits_to_bits(digits)):
        yield


RealLike = Union[int, float, str, Fraction, mpf, "BigReal"]


def to_mpf(x: RealLike) -> mpf:
    """Convert to an mpf rounded at the current mpmath precision."""
    if isinstance(x, BigReal):
        return +x.value
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


def to_fraction(x: RealLike) -> Fraction:
    """Exact rational value of ``x`` (decimal strings are read exactly)."""
    if isinstance(x, BigReal):
        x = x.value
    if isinstance(x, mpf):
        if not mpmath.isfinite(x):
            raise ValueError(f"{x} has no exact rational value")
        sign, man, exp, _ = x._mpf_
        return Fraction((-1) ** sign * int(man)) * Fraction(2) ** int(exp)
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def required_digits(s: RealLike, prime_upper_bound: int, guard: int = DEFAULT_GUARD_DIGITS) -> int:
    """Working digits needed to resolve ``prime_upper_bound ** -s`` against 1.

    Returns ``ceil(s * log10(prime_upper_bound)) + guard``.  The ceiling is
    exact: when the product is within rounding of an integer, the tie is
    settled with integer arithmetic.
    """
    s_exact = to_fraction(s)
    if s_exact <= 1:
        raise ValueError(f"s must exceed 1, got {s}")
    if prime_upper_bound < 2:
        raise ValueError(f"prime upper bound must be at least 2, got {prime_upper_bound}")
    if guard < 0:
        raise ValueError(f"guard digits must be non-negative, got {guard}")
    with mpmath.workdps(40 + len(str(s_exact.numerator))):
        x = to_mpf(s_exact) * mpmath.log10(prime_upper_bound)
        k = int(mpmath.nint(x))
        if abs(x - k) > mpmath.mpf(10) ** -20:
            return int(mpmath.ceil(x)) + guard
    # s*log10(b) == k exactly iff b**num == 10**(k*den)
    num, den = s_exact.numerator, s_exact.denominator
    if prime_upper_bound**num == 10 ** (k * den):
        return k + guard
    return (k + 1 if prime_upper_bound**num > 10 ** (k * den) else k) + guard


@dataclass(frozen=True)
class PrecisionPolicy:
    """Maps (s, prime bound, guard digits) to a working precision."""

    s: Fraction
    prime_upper_bound: int
    guard_digits: int = DEFAULT_GUARD_DIGITS

    def __post_init__(self) -> None:
        object.__setattr__(self, "s", to_fraction(self.s))
        # validates every field
        self.digits  # noqa: B018

    @property
    def digits(self) -> int:
        return required_digits(self.s, self.prime_upper_bound, self.guard_digits)

    def at(self, s: RealLike) -> "PrecisionPolicy":
        return PrecisionPolicy(to_fraction(s), self.prime_upper_bound, self.guard_digits)


def _round_scaled(value: mpf, places: int, mode: str) -> int:
    """Exact ``value * 10**places`` rounded to an integer."""
    sign, man, exp, _ = value._mpf_
    num = (-1) ** sign * int(man) * 10**places
    if exp >= 0:
        return num << exp
    den = 1 << -exp
    q, r = divmod(num, den)  # floor division, r >= 0
    if mode == "down":
        return q + 1 if (q < 0 and r) else q
    if mode != "half_even":
        raise ValueError(f"unknown rounding mode {mode!r}")
    twice = 2 * r
    if twice > den or (twice == den and q % 2 == 1):
        q += 1
    return q


def render_fixed(value: mpf, places: int, mode: str = "half_even") -> str:
    """Plain decimal string with exactly ``places`` fractional digits.

    ``mode`` is ``"half_even"`` (default) or ``"down"`` (truncate toward zero).
    """
    if places < 0:
        raise ValueError("places must be non-negative")
    if not mpmath.isfinite(value):
        raise ValueError(f"cannot render non-finite value {value}")
    if not isinstance(value, mpf):
        value = mpf(value)  # ints and floats convert exactly
    q = _round_scaled(value, places, mode)
    sign = "-" if q < 0 else ""
    digits = str(abs(q)).rjust(places + 1, "0")
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def render_significant(value: mpf, sig: int, mode: str = "half_even") -> str:
    """Plain decimal string carrying ``sig`` significant digits.

    Values with more than ``sig`` integer digits print all of them.
    """
    if sig < 1:
        raise ValueError("need at least one significant digit")
    if value == 0:
        return render_fixed(value, sig - 1)
    exact = abs(to_fraction(value))
    mag = int(mpmath.floor(mpmath.log10(abs(value)))) + 1
    # pin 10**(mag-1) <= |value| < 10**mag exactly
    while exact >= Fraction(10) ** mag:
        mag += 1
    while exact < Fraction(10) ** (mag - 1):
        mag -= 1
    places = max(sig - mag, 0)
    text = render_fixed(value, places, mode)
    if places and len(text.lstrip("-").replace(".", "").lstrip("0")) > sig:
        text = render_fixed(value, places - 1, mode)
    return text


@dataclass(frozen=True, eq=False)
class BigReal:
    """An immutable real carrying its working precision in decimal digits.

    Arithmetic between two values runs at the smaller of their precisions.
    Plain Python numbers are promoted at the other operand's precision.
    """

    value: mpf
    digits: int

    def __post_init__(self) -> None:
        if self.digits < 1:
            raise ValueError(f"precision must be positive, got {self.digits}")
        if not isinstance(self.value, mpf):
            with working_digits(self.digits):
                object.__setattr__(self, "value", to_mpf(self.value))

    @classmethod
    def parse(cls, text: str, digits: int) -> "BigReal":
        with working_digits(digits):
            return cls(mpf(text.strip()), digits)

    @classmethod
    def exact(cls, x: RealLike, digits: int) -> "BigReal":
        with working_digits(digits):
            return cls(to_mpf(x), digits)

    def render(self, places: int, mode: str = "half_even") -> str:
        return render_fixed(self.value, places, mode)

    def render_significant(self, sig: int, mode: str = "half_even") -> str:
        return render_significant(self.value, sig, mode)

    def __str__(self) -> str:
        return render_significant(self.value, max(self.digits - 5, 1))

    def __repr__(self) -> str:
        return f"BigReal({mpmath.nstr(self.value, 20)}, digits={self.digits})"

    def __float__(self) -> float:
        return float(self.value)

    def __int__(self) -> int:
        return int(self.value)

    # arithmetic

    def _binary(self, other: RealLike, op) -> "BigReal":
        if isinstance(other, BigReal):
            digits = min(self.digits, other.digits)
            rhs = other.value
        else:
            digits = self.digits
            rhs = other
        with working_digits(digits):
            if not isinstance(rhs, mpf):
                rhs = to_mpf(rhs)
            return BigReal(op(self.value, rhs), digits)

    def __add__(self, other: RealLike) -> "BigReal":
        return self._binary(other, lambda a, b: a + b)

    def __radd__(self, other: RealLike) -> "BigReal":
        return self._binary(other, lambda a, b: b + a)

    def __sub__(self, other: RealLike) -> "BigReal":
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other: RealLike) -> "BigReal":
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other: RealLike) -> "BigReal":
        return self._binary(other, lambda a, b: a * b)

    def __rmul__(self, other: RealLike) -> "BigReal":
        return self._binary(other, lambda a, b: b * a)

    def __truediv__(self, other: RealLike) -> "BigReal":
        return self._binary(other, lambda a, b: a / b)

    def __rtruediv__(self, other: RealLike) -> "BigReal":
        return self._binary(other, lambda a, b: b / a)

    def __pow__(self, other: RealLike) -> "BigReal":
        return self._binary(other, lambda a, b: mpmath.power(a, b))

    def __neg__(self) -> "BigReal":
        return BigReal(-self.value, self.digits)

    def __abs__(self) -> "BigReal":
        return BigReal(abs(self.value), self.digits)

    def ln(self) -> "BigReal":
        with working_digits(self.digits):
            return BigReal(mpmath.log(self.value), self.digits)

    def exp(self) -> "BigReal":
        with working_digits(self.digits):
            return BigReal(mpmath.exp(self.value), self.digits)

    def with_digits(self, digits: int) -> "BigReal":
        with working_digits(digits):
            return BigReal(+self.value, digits)

    # comparisons use the exact stored values

    def _cmp_value(self, other: RealLike) -> mpf:
        if isinstance(other, BigReal):
            return other.value
        if isinstance(other, (int, float, mpf)):
            return mpf(other) if isinstance(other, float) else other
        with working_digits(self.digits + 10):
            return to_mpf(other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, (BigReal, int, float, str, Fraction, mpf)):
            return NotImplemented
        return self.value == self._cmp_value(other)

    def __hash__(self) -> int:
        return hash(self.value)

    def __lt__(self, other: RealLike) -> bool:
        return self.value < self._cmp_value(other)

    def __le__(self, other: RealLike) -> bool:
        return self.value <= self._cmp_value(other)

    def __gt__(self, other: RealLike) -> bool:
        return self.value > self._cmp_value(other)

    def __ge__(self, other: RealLike) -> bool:
        return self.value >= self._cmp_value(other)
