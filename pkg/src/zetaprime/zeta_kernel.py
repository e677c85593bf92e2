"""Riemann zeta and its first derivative for real ``s > 1``.

Two summation regimes:

* ``direct`` -- plain Dirichlet series with an integral tail bound.  Cheap
  for large ``s``, hopeless near ``s = 1``.
* ``euler_maclaurin`` -- base sum plus integral and Bernoulli corrections,
  stopped once the first omitted correction falls below target.

``auto`` picks ``direct`` for ``s >= s_split``.  For ``zeta_prime`` the low-s
regime is a central difference of :func:`zeta` at triple precision.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath import libmp, mpf

from .numerics import BigReal, RealLike, digits_to_bits, to_fraction, to_mpf, working_digits

S_SPLIT = 20
TERM_BUDGET = 10**7
REGIMES = ("direct", "euler_maclaurin", "auto")

_RND = libmp.round_nearest
_LOG2_LN2 = math.log2(math.log(2))


class TermBudgetExceeded(ArithmeticError):
    """The series would need more summands than the configured budget."""


@dataclass(frozen=True)
class ZetaRequest:
    s: Fraction
    digits: int
    regime: str = "auto"
    s_split: Fraction = Fraction(S_SPLIT)

    def __post_init__(self) -> None:
        object.__setattr__(self, "s", to_fraction(self.s))
        object.__setattr__(self, "s_split", to_fraction(self.s_split))
        if self.s <= 1:
            raise ValueError(f"zeta needs s > 1, got {float(self.s)}")
        if self.digits < 1:
            raise ValueError(f"digits must be positive, got {self.digits}")
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")

    @property
    def resolved_regime(self) -> str:
        if self.regime != "auto":
            return self.regime
        return "direct" if self.s >= self.s_split else "euler_maclaurin"


# Bernoulli numbers -------------------------------------------------------

_bernoulli_lock = threading.Lock()
_bernoulli_scaled: list[Fraction] = []  # B_{2k} / (2k)!, k = 1, 2, ...


def bernoulli_over_factorial(k: int) -> Fraction:
    """Exact ``B_{2k} / (2k)!`` for ``k >= 1``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    cached = _bernoulli_scaled
    if k <= len(cached):
        return cached[k - 1]
    with _bernoulli_lock:
        while len(_bernoulli_scaled) < k:
            j = len(_bernoulli_scaled) + 1
            p, q = mpmath.bernfrac(2 * j)
            _bernoulli_scaled.append(Fraction(p, q * math.factorial(2 * j)))
        return _bernoulli_scaled[k - 1]


# direct regime -----------------------------------------------------------


def _direct_cutoff(s: float, digits: int, derivative: bool, budget: int) -> int:
    """Smallest N whose integral tail bound meets the target."""
    target = -(digits + 2)
    if derivative:
        # relative to |zeta'(s)| >= ln 2 * 2**-s
        target += math.log10(math.log(2)) - s * math.log10(2)

    def log10_tail(n: int) -> float:
        ln_n = math.log(n)
        if derivative:
            coeff = ln_n / (s - 1) + 1 / (s - 1) ** 2
        else:
            coeff = 1 / (s - 1)
        return math.log10(coeff) + (1 - s) * math.log10(n)

    exponent = (-target - math.log10(s - 1)) / (s - 1) if not derivative else -target / (s - 1)
    if exponent > math.log10(budget) + 1:
        raise TermBudgetExceeded(
            f"direct summation at s={s:g}, digits={digits} needs about 10^{exponent:.1f} terms "
            f"(budget {budget})"
        )
    n = max(2, math.ceil(10**exponent))
    while log10_tail(n) > target:
        n = math.ceil(n * 1.05) + 1
        if n > budget:
            break
    if n > budget:
        raise TermBudgetExceeded(
            f"direct summation at s={s:g}, digits={digits} needs {n} terms (budget {budget})"
        )
    return n


def _direct_sum(s: mpf, digits: int, derivative: bool, budget: int) -> mpf:
    s_float = float(s)
    n_max = _direct_cutoff(s_float, digits, derivative, budget)
    prec = digits_to_bits(digits + 2) + n_max.bit_length() + 10
    s_exact = to_fraction(s)
    s_int = s_exact.numerator if s_exact.denominator == 1 else None
    s_raw = s._mpf_
    # size of the result in bits, terms only need precision relative to it
    ref = _LOG2_LN2 - s_float if derivative else 0.0
    total = libmp.fzero if derivative else libmp.fone
    for n in range(2, n_max + 1):
        log2_n = math.log2(n)
        size = -s_float * log2_n + (math.log2(math.log(n)) if derivative else 0.0)
        tprec = max(prec - int(ref - size), 40)
        n_raw = libmp.from_int(n)
        if s_int is not None:
            term = libmp.mpf_pow_int(n_raw, -s_int, tprec + 10, _RND)
        else:
            wp = tprec + int(math.log2(s_float * log2_n + 1)) + 20
            ln_n = libmp.mpf_log(n_raw, wp, _RND)
            term = libmp.mpf_exp(libmp.mpf_neg(libmp.mpf_mul(s_raw, ln_n, wp, _RND)), tprec + 10, _RND)
        if derivative:
            term = libmp.mpf_mul(term, libmp.mpf_log(n_raw, tprec + 10, _RND), tprec + 10, _RND)
            total = libmp.mpf_sub(total, term, prec, _RND)
        else:
            total = libmp.mpf_add(total, term, prec, _RND)
    return mpmath.mp.make_mpf(total)


# Euler-Maclaurin regime -------------------------------------------------


def _euler_maclaurin(s: mpf, digits: int, budget: int) -> mpf:
    n_base = max(50, digits)
    while True:
        if n_base > budget:
            raise TermBudgetExceeded(
                f"Euler-Maclaurin at s={float(s):g}, digits={digits} exceeded {budget} terms"
            )
        result = _euler_maclaurin_at(s, digits, n_base)
        if result is not None:
            return result
        n_base *= 2


def _euler_maclaurin_at(s: mpf, digits: int, n_base: int) -> mpf | None:
    """EM sum with cut point ``n_base``; ``None`` if the corrections diverge first."""
    extra = len(str(n_base)) + 5
    with working_digits(digits + 2 + extra):
        s = +s
        target = mpf(10) ** -(digits + 2)
        total = mpf(0)
        for n in range(1, n_base):
            total += mpmath.power(n, -s)
        big_n = mpf(n_base)
        n_pow = mpmath.power(big_n, -s)
        total += big_n * n_pow / (s - 1) + n_pow / 2
        # rising = s (s+1) ... (s+2k-2) * N**(-s-2k+1)
        rising = s * n_pow / big_n
        inv_n2 = 1 / (big_n * big_n)
        k = 1
        prev = None
        while True:
            coeff = bernoulli_over_factorial(k)
            term = rising * coeff.numerator / coeff.denominator
            size = abs(term)
            if size <= target:
                # first omitted correction bounds the remainder for real s
                return total
            if prev is not None and size >= prev:
                return None
            total += term
            prev = size
            rising *= (s + 2 * k - 1) * (s + 2 * k) * inv_n2
            k += 1


# public API -----------------------------------------------------------------


def _prepare(s: RealLike, digits: int, regime: str, s_split: RealLike) -> tuple[ZetaRequest, mpf]:
    request = ZetaRequest(to_fraction(s), digits, regime, to_fraction(s_split))
    with working_digits(digits + 20):
        s_mpf = to_mpf(request.s)
    return request, s_mpf


def zeta(
    s: RealLike,
    digits: int,
    *,
    regime: str = "auto",
    s_split: RealLike = S_SPLIT,
    term_budget: int = TERM_BUDGET,
) -> BigReal:
    """``zeta(s)`` with relative error at most ``10**(2 - digits)``."""
    request, s_mpf = _prepare(s, digits, regime, s_split)
    if request.resolved_regime == "direct":
        value = _direct_sum(s_mpf, digits, False, term_budget)
    else:
        value = _euler_maclaurin(s_mpf, digits, term_budget)
    with working_digits(digits):
        return BigReal(+value, digits)


def zeta_prime(
    s: RealLike,
    digits: int,
    *,
    regime: str = "auto",
    s_split: RealLike = S_SPLIT,
    term_budget: int = TERM_BUDGET,
) -> BigReal:
    """``zeta'(s)`` with relative error at most ``10**(2 - digits)``.

    Below ``s_split`` (or with ``regime="euler_maclaurin"``) this is a
    central difference of :func:`zeta` with step ``10**-digits`` evaluated
    at ``3 * digits`` precision.
    """
    request, s_mpf = _prepare(s, digits, regime, s_split)
    if request.resolved_regime == "direct":
        value = _direct_sum(s_mpf, digits, True, term_budget)
    else:
        wide = 3 * digits
        step = Fraction(1, 10**digits)
        if request.s - step <= 1:
            raise ValueError(f"s={float(request.s)} is too close to 1 for a step of 1e-{digits}")
        upper = zeta(request.s + step, wide, regime="euler_maclaurin", term_budget=term_budget)
        lower = zeta(request.s - step, wide, regime="euler_maclaurin", term_budget=term_budget)
        with working_digits(wide):
            value = (upper.value - lower.value) * (mpf(10) ** digits / 2)
    with working_digits(digits):
        return BigReal(+value, digits)
