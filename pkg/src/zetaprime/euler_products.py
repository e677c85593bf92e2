"""Partial Euler products, their s-derivatives, and truncated tail products."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import mpmath
from mpmath import mpf

from .numerics import BigReal, RealLike, to_fraction, to_mpf, working_digits
from .primes import PrimePrefix, primes_by_index


def _checked_s(s: RealLike) -> Fraction:
    exact = to_fraction(s)
    if exact <= 1:
        raise ValueError(f"Euler products need s > 1, got {float(exact)}")
    return exact


def _product(primes: Iterable[int], s: mpf) -> mpf:
    total = mpf(1)
    for p in primes:
        total /= 1 - mpmath.power(p, -s)
    return total


def _log_derivative(primes: Iterable[int], s: mpf) -> mpf:
    # d/ds ln (1 - p^-s)^-1 = -ln p * p^-s / (1 - p^-s)
    total = mpf(0)
    for p in primes:
        x = mpmath.power(p, -s)
        total -= mpmath.log(p) * x / (1 - x)
    return total


@dataclass(frozen=True)
class PartialProductEval:
    n: int
    s: Fraction
    q: BigReal
    q_prime: BigReal | None = None

    @property
    def log_derivative(self) -> BigReal | None:
        """``q_prime / q`` (zero for the empty product)."""
        if self.q_prime is None:
            return None
        return self.q_prime / self.q


def evaluate(prefix: PrimePrefix, s: RealLike, digits: int, *, derivative: bool = True) -> PartialProductEval:
    """``Q_n(s)`` and optionally ``Q_n'(s)`` sharing one pass over the primes."""
    s_exact = _checked_s(s)
    with working_digits(digits):
        s_mpf = to_mpf(s_exact)
        q_val = _product(prefix, s_mpf)
        q_prime_val = q_val * _log_derivative(prefix, s_mpf) if derivative else None
    return PartialProductEval(
        n=len(prefix),
        s=s_exact,
        q=BigReal(q_val, digits),
        q_prime=BigReal(q_prime_val, digits) if derivative else None,
    )


def q(prefix: PrimePrefix, s: RealLike, digits: int) -> BigReal:
    """``Q_n(s) = prod_{k<=n} (1 - p_k^-s)^-1``; exactly 1 for the empty prefix."""
    return evaluate(prefix, s, digits, derivative=False).q


def q_prime(prefix: PrimePrefix, s: RealLike, digits: int) -> BigReal:
    """``dQ_n/ds``, computed as ``Q_n`` times the logarithmic derivative."""
    return evaluate(prefix, s, digits).q_prime


def q_log_derivative(prefix: PrimePrefix, s: RealLike, digits: int) -> BigReal:
    """``Q_n'(s) / Q_n(s)`` without forming either factor."""
    s_exact = _checked_s(s)
    with working_digits(digits):
        return BigReal(_log_derivative(prefix, to_mpf(s_exact)), digits)


def epsilon_tail(start: int, s: RealLike, count: int, digits: int) -> BigReal:
    """Truncated tail product over ``p_start .. p_{start+count-1}``.

    The omitted factors contribute roughly ``p_{start+count} ** -s``.
    """
    if start < 1:
        raise ValueError(f"tail start index must be at least 1, got {start}")
    if count < 0:
        raise ValueError(f"term count must be non-negative, got {count}")
    s_exact = _checked_s(s)
    primes = primes_by_index(start, count) if count else ()
    with working_digits(digits):
        return BigReal(_product(primes, to_mpf(s_exact)), digits)
