"""Limit formulas that pull the next prime out of zeta and a partial Euler product.

Every evaluator takes the known primes as a :class:`~zetaprime.primes.PrimePrefix`
and a finite ``s``; the limit ``s -> oo`` is approached by taking ``s`` large
and carrying enough working digits to resolve ``p_{n+1} ** -s`` against 1.
When ``digits`` is omitted it comes from :func:`required_digits` with the
Bertrand bound ``2 * max(prefix)``.

Formula kinds and what they converge to:

============  ==========================================  ===============
kind          expression                                  limit
============  ==========================================  ===============
main          (1 - Q_n(s)/zeta(s)) ** (-1/s)              p
power         (1 - Q_n(as)/zeta(as)) ** (-1/s)            p ** a
difference    (zeta(as) - Q_n(as)) ** (-1/s)              p ** a
logratio      -(Q_n' - zeta') / (Q_n - zeta)              ln p
logderiv      (Q_n'/Q_n - zeta'/zeta)(as) ** (-1/s)       p ** a
halfprime     2 * (1 - Q_n'(s)/zeta'(s)) ** (-1/s)        p
============  ==========================================  ===============
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
from mpmath import mpf

from . import euler_products
from .numerics import (
    BigReal,
    PrecisionError,
    PrecisionPolicy,
    RealLike,
    default_guard_digits,
    required_digits,
    to_fraction,
    to_mpf,
    working_digits,
)
from .primes import PrimePrefix, first_primes, is_prime, sieve_up_to
from .zeta_kernel import TermBudgetExceeded, zeta, zeta_prime

# Fewer surviving digits than this after cancellation is reported as failure.
MIN_SIGNIFICANT_DIGITS = 6

ADAPTIVE_S_INITIAL = 50
ADAPTIVE_MAX_DOUBLINGS = 8
ROUNDING_THRESHOLD = Fraction(1, 4)

KINDS = ("main", "power", "difference", "logratio", "logderiv", "halfprime")
_PARAMETERIZED = ("power", "difference", "logderiv")


class EscalationExhausted(ArithmeticError):
    """Adaptive extraction did not settle before the doubling cap."""

    def __init__(self, message: str, *, index: int | None = None, last_s: Fraction | None = None):
        super().__init__(message)
        self.index = index
        self.last_s = last_s


@dataclass(frozen=True)
class FormulaKind:
    name: str
    a: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.name not in KINDS:
            raise ValueError(f"unknown formula {self.name!r}; expected one of {KINDS}")
        a = to_fraction(self.a)
        if a <= 0:
            raise ValueError(f"exponent a must be positive, got {a}")
        if self.name not in _PARAMETERIZED and a != 1:
            raise ValueError(f"formula {self.name!r} takes no exponent")
        object.__setattr__(self, "a", a)

    @classmethod
    def main(cls) -> "FormulaKind":
        return cls("main")

    @classmethod
    def power(cls, a: RealLike) -> "FormulaKind":
        return cls("power", to_fraction(a))

    @classmethod
    def difference(cls, a: RealLike) -> "FormulaKind":
        return cls("difference", to_fraction(a))

    @classmethod
    def logratio(cls) -> "FormulaKind":
        return cls("logratio")

    @classmethod
    def logderiv(cls, a: RealLike) -> "FormulaKind":
        return cls("logderiv", to_fraction(a))

    @classmethod
    def halfprime(cls) -> "FormulaKind":
        return cls("halfprime")

    def __str__(self) -> str:
        if self.name in _PARAMETERIZED:
            return f"{self.name}(a={self.a})"
        return self.name


@dataclass(frozen=True)
class LimitEvaluation:
    n: int
    s: Fraction
    formula: FormulaKind
    digits_used: int
    value: BigReal
    raw: BigReal | None = None  # halfprime only: the undoubled limit value


@dataclass(frozen=True)
class SweepSample:
    s: Fraction
    value: BigReal | None
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class SweepTable:
    formula: FormulaKind
    n: int
    samples: tuple[SweepSample, ...] = field(default_factory=tuple)

    def values(self) -> list[tuple[Fraction, BigReal]]:
        return [(x.s, x.value) for x in self.samples if x.value is not None]


@dataclass(frozen=True)
class AdaptiveResult:
    prime: int
    s_final: Fraction
    digits_final: int
    iterations: int
    residual: BigReal


# helpers ---------------------------------------------------------------------


def _as_prefix(prefix: PrimePrefix | Iterable[int]) -> PrimePrefix:
    return prefix if isinstance(prefix, PrimePrefix) else PrimePrefix(prefix)


def _inner_argument(a: Fraction, s: Fraction) -> Fraction:
    inner = a * s
    if inner <= 1:
        raise ValueError(f"inner zeta argument a*s = {float(inner)} must exceed 1")
    return inner


def default_digits(
    prefix: PrimePrefix, s: RealLike, a: RealLike = 1, guard: int | None = None
) -> int:
    """Working digits for a formula whose zeta argument is ``a * s``."""
    guard = default_guard_digits() if guard is None else guard
    inner = _inner_argument(to_fraction(a), to_fraction(s))
    return required_digits(inner, prefix.prime_upper_bound, guard)


def _require_resolved(value: mpf, reference: mpf, digits: int, what: str) -> None:
    """Raise if ``value`` kept fewer than MIN_SIGNIFICANT_DIGITS after cancellation."""
    floor = abs(reference) * mpf(10) ** (MIN_SIGNIFICANT_DIGITS - digits)
    if abs(value) <= floor:
        raise PrecisionError(
            f"{what} cancelled below the {digits}-digit working precision; raise digits or lower s"
        )


def _root(base: mpf, s: Fraction) -> mpf:
    """``base ** (-1/s)`` at the current precision."""
    return mpmath.power(base, -1 / to_mpf(s))


# evaluators ------------------------------------------------------------------


def _ratio_bracket(prefix: PrimePrefix, inner: Fraction, digits: int) -> mpf:
    z = zeta(inner, digits).value
    qn = euler_products.q(prefix, inner, digits).value
    with working_digits(digits):
        bracket = 1 - qn / z
    _require_resolved(bracket, mpf(1), digits, "1 - Q_n/zeta")
    return bracket


def main_formula(prefix: PrimePrefix | Iterable[int], s: RealLike, digits: int | None = None) -> BigReal:
    """``(1 - Q_n(s)/zeta(s)) ** (-1/s)``, tending to ``p_{n+1}``."""
    return power_formula(prefix, 1, s, digits)


def power_formula(
    prefix: PrimePrefix | Iterable[int], a: RealLike, s: RealLike, digits: int | None = None
) -> BigReal:
    """``(1 - Q_n(as)/zeta(as)) ** (-1/s)``, tending to ``p_{n+1} ** a``."""
    prefix = _as_prefix(prefix)
    s, a = to_fraction(s), to_fraction(a)
    inner = _inner_argument(a, s)
    digits = digits or default_digits(prefix, s, a)
    bracket = _ratio_bracket(prefix, inner, digits)
    with working_digits(digits):
        return BigReal(_root(bracket, s), digits)


def difference_formula(
    prefix: PrimePrefix | Iterable[int], a: RealLike, s: RealLike, digits: int | None = None
) -> BigReal:
    """``(zeta(as) - Q_n(as)) ** (-1/s)``, tending to ``p_{n+1} ** a``."""
    prefix = _as_prefix(prefix)
    s, a = to_fraction(s), to_fraction(a)
    inner = _inner_argument(a, s)
    digits = digits or default_digits(prefix, s, a)
    z = zeta(inner, digits).value
    qn = euler_products.q(prefix, inner, digits).value
    with working_digits(digits):
        bracket = z - qn
        _require_resolved(bracket, z, digits, "zeta - Q_n")
        return BigReal(_root(bracket, s), digits)


def log_formula(prefix: PrimePrefix | Iterable[int], s: RealLike, digits: int | None = None) -> BigReal:
    """``-(Q_n' - zeta') / (Q_n - zeta)``, tending to ``ln p_{n+1}``."""
    prefix = _as_prefix(prefix)
    s = to_fraction(s)
    digits = digits or default_digits(prefix, s)
    z = zeta(s, digits).value
    zp = zeta_prime(s, digits).value
    products = euler_products.evaluate(prefix, s, digits)
    with working_digits(digits):
        denominator = products.q.value - z
        numerator = products.q_prime.value - zp
        _require_resolved(denominator, z, digits, "Q_n - zeta")
        _require_resolved(numerator, zp, digits, "Q_n' - zeta'")
        return BigReal(-numerator / denominator, digits)


def logderiv_formula(
    prefix: PrimePrefix | Iterable[int], a: RealLike, s: RealLike, digits: int | None = None
) -> BigReal:
    """``(Q_n'/Q_n - zeta'/zeta)(as) ** (-1/s)``, tending to ``p_{n+1} ** a``.

    Carries a spurious ``(ln p_{n+1}) ** (-1/s)`` factor that only fades as
    ``s`` grows, so convergence is slow.
    """
    prefix = _as_prefix(prefix)
    s, a = to_fraction(s), to_fraction(a)
    inner = _inner_argument(a, s)
    digits = digits or default_digits(prefix, s, a)
    z = zeta(inner, digits).value
    zp = zeta_prime(inner, digits).value
    q_log = euler_products.q_log_derivative(prefix, inner, digits).value
    with working_digits(digits):
        zeta_log = zp / z
        bracket = q_log - zeta_log
        _require_resolved(bracket, zeta_log, digits, "Q_n'/Q_n - zeta'/zeta")
        return BigReal(_root(bracket, s), digits)


def half_prime_evaluation(
    prefix: PrimePrefix | Iterable[int], s: RealLike, digits: int | None = None
) -> LimitEvaluation:
    prefix = _as_prefix(prefix)
    s = to_fraction(s)
    digits = digits or default_digits(prefix, s)
    qp = euler_products.q_prime(prefix, s, digits).value
    if prefix.n == 0:
        bracket = mpf(1)
    else:
        zp = zeta_prime(s, digits).value
        with working_digits(digits):
            bracket = 1 - qp / zp
        _require_resolved(bracket, mpf(1), digits, "1 - Q_n'/zeta'")
    with working_digits(digits):
        raw = _root(bracket, s)
        value = 2 * raw
    return LimitEvaluation(
        n=prefix.n,
        s=s,
        formula=FormulaKind.halfprime(),
        digits_used=digits,
        value=BigReal(value, digits),
        raw=BigReal(raw, digits),
    )


def half_prime_formula(prefix: PrimePrefix | Iterable[int], s: RealLike, digits: int | None = None) -> BigReal:
    """``2 * (1 - Q_n'(s)/zeta'(s)) ** (-1/s)``, tending to ``p_{n+1}``.

    The bracketed root itself tends to ``p_{n+1} / 2``; it is kept as ``raw``
    in :func:`half_prime_evaluation`.  Converges far more slowly than
    :func:`main_formula`.
    """
    return half_prime_evaluation(prefix, s, digits).value


def evaluate(
    formula: FormulaKind,
    prefix: PrimePrefix | Iterable[int],
    s: RealLike,
    digits: int | None = None,
    *,
    guard: int | None = None,
) -> LimitEvaluation:
    """Evaluate any formula kind and wrap the result in a record."""
    prefix = _as_prefix(prefix)
    s = to_fraction(s)
    if digits is None:
        digits = default_digits(prefix, s, formula.a, guard)
    if formula.name == "halfprime":
        return half_prime_evaluation(prefix, s, digits)
    if formula.name == "main":
        value = main_formula(prefix, s, digits)
    elif formula.name == "power":
        value = power_formula(prefix, formula.a, s, digits)
    elif formula.name == "difference":
        value = difference_formula(prefix, formula.a, s, digits)
    elif formula.name == "logratio":
        value = log_formula(prefix, s, digits)
    else:
        value = logderiv_formula(prefix, formula.a, s, digits)
    return LimitEvaluation(n=prefix.n, s=s, formula=formula, digits_used=digits, value=value)


# adaptive extraction ---------------------------------------------------------


def _nearest(value: BigReal) -> tuple[int, BigReal]:
    with working_digits(value.digits):
        k = int(mpmath.nint(value.value))
        return k, BigReal(abs(value.value - k), value.digits)


def next_prime_adaptive(
    prefix: PrimePrefix | Iterable[int],
    policy: PrecisionPolicy | None = None,
    *,
    max_doublings: int = ADAPTIVE_MAX_DOUBLINGS,
) -> AdaptiveResult:
    """Extract the next prime with the main formula, doubling ``s`` until it settles.

    A candidate ``q`` is accepted at ``s`` when the value rounds to ``q`` with
    residual below 1/4, the value at ``2s`` rounds to the same ``q``, ``q``
    passes the deterministic primality test, and (strict prefixes only) ``q``
    equals the true next prime.  ``policy`` seeds the starting ``s`` and the
    guard digits; the prime bound always comes from the prefix.
    """
    prefix = _as_prefix(prefix)
    if policy is None:
        policy = PrecisionPolicy(Fraction(ADAPTIVE_S_INITIAL), prefix.prime_upper_bound, default_guard_digits())
    bound = max(prefix.prime_upper_bound, policy.prime_upper_bound)
    guard = policy.guard_digits
    expected = prefix.target() if prefix.strict else None

    def at(s: Fraction) -> BigReal:
        return main_formula(prefix, s, required_digits(s, bound, guard))

    s = policy.s
    current = at(s)
    for iteration in range(1, max_doublings + 2):
        doubled = at(2 * s)
        candidate, residual = _nearest(current)
        settled = (
            residual < ROUNDING_THRESHOLD
            and _nearest(doubled)[0] == candidate
            and is_prime(candidate)
            and (expected is None or candidate == expected)
        )
        if settled:
            return AdaptiveResult(
                prime=candidate,
                s_final=s,
                digits_final=current.digits,
                iterations=iteration,
                residual=residual,
            )
        s, current = 2 * s, doubled
    raise EscalationExhausted(
        f"no stable prime after {max_doublings} doublings of s for a prefix of {prefix.n} primes "
        f"(last s = {s})",
        index=prefix.n + 1,
        last_s=s,
    )


def chain(count: int, policy: PrecisionPolicy | None = None, *, max_doublings: int = ADAPTIVE_MAX_DOUBLINGS) -> list[int]:
    """Generate the first ``count`` primes, each from the ones before it."""
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    primes: list[int] = []
    for index in range(1, count + 1):
        prefix = PrimePrefix(primes)
        seed = None
        if policy is not None:
            seed = PrecisionPolicy(policy.s, prefix.prime_upper_bound, policy.guard_digits)
        try:
            result = next_prime_adaptive(prefix, seed, max_doublings=max_doublings)
        except EscalationExhausted as exc:
            raise EscalationExhausted(
                f"chain stopped at prime #{index}: {exc}", index=index, last_s=exc.last_s
            ) from exc
        primes.append(result.prime)
    return primes


# sweeps ------------------------------------------------------------------------


def sweep(
    formula: FormulaKind,
    n: int | PrimePrefix,
    s_grid: Sequence[RealLike],
    digits_policy: int | str = "auto",
    *,
    guard: int | None = None,
) -> SweepTable:
    """Evaluate ``formula`` along an ascending grid of ``s``.

    ``digits_policy`` is ``"auto"`` (per-point :func:`default_digits`) or a
    fixed digit count.  Points that fail for lack of precision are kept in
    the table with the reason instead of a value.
    """
    prefix = n if isinstance(n, PrimePrefix) else PrimePrefix(first_primes(n))
    grid = [to_fraction(x) for x in s_grid]
    if not grid:
        raise ValueError("s grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("s grid must be strictly ascending")
    if grid[0] <= 1 or grid[0] * formula.a <= 1:
        raise ValueError(f"s grid must start above 1 (and a*s > 1); got {float(grid[0])}")
    if digits_policy != "auto" and (not isinstance(digits_policy, int) or digits_policy < 1):
        raise ValueError(f"digits policy must be 'auto' or a positive int, got {digits_policy!r}")

    samples = []
    for s in grid:
        digits = None if digits_policy == "auto" else digits_policy
        try:
            record = evaluate(formula, prefix, s, digits, guard=guard)
        except (PrecisionError, TermBudgetExceeded) as exc:
            samples.append(SweepSample(s, None, f"failed: {exc}"))
        else:
            samples.append(SweepSample(s, record.value))
    return SweepTable(formula=formula, n=prefix.n, samples=tuple(samples))


# identity checks ---------------------------------------------------------------


def asymptotic_check(s: RealLike, digits: int | None = None) -> BigReal:
    """``(-zeta'(s)/zeta(s)) ** (-1/s)``, which tends to 2.

    At finite ``s`` it sits near ``2 * (ln 2) ** (-1/s)``: the logarithmic
    factor in ``-zeta'/zeta ~ ln 2 * 2**-s`` only disappears under the root.
    """
    s = to_fraction(s)
    if s <= 1:
        raise ValueError(f"s must exceed 1, got {float(s)}")
    digits = digits or required_digits(s, 2, default_guard_digits())
    z = zeta(s, digits).value
    zp = zeta_prime(s, digits).value
    with working_digits(digits):
        return BigReal(_root(-zp / z, s), digits)


def asymptotic_model(s: RealLike, digits: int = 30) -> BigReal:
    """First-order model ``2 * (ln 2) ** (-1/s)`` for :func:`asymptotic_check`."""
    s = to_fraction(s)
    with working_digits(digits):
        return BigReal(2 * _root(mpmath.log(2), s), digits)


def mangoldt_partial_sum(s: RealLike, term_limit: int, digits: int) -> BigReal:
    """``sum_{m <= N} Lambda(m) m**-s`` over prime powers up to ``N``."""
    s = to_fraction(s)
    with working_digits(digits):
        s_mpf = to_mpf(s)
        total = mpf(0)
        for p in sieve_up_to(term_limit):
            log_p = mpmath.log(p)
            pk = p
            while pk <= term_limit:
                total += log_p * mpmath.power(pk, -s_mpf)
                pk *= p
        return BigReal(total, digits)


def mangoldt_tail_bound(s: RealLike, term_limit: int, digits: int = 30) -> BigReal:
    """``2 ln(N) N**(1-s) / (s-1)``, a bound on the omitted terms for ``s >= 2``."""
    s = to_fraction(s)
    with working_digits(digits):
        s_mpf = to_mpf(s)
        n = mpf(term_limit)
        return BigReal(2 * mpmath.log(n) * mpmath.power(n, 1 - s_mpf) / (s_mpf - 1), digits)


def mangoldt_identity_check(s: RealLike, term_limit: int, digits: int | None = None) -> BigReal:
    """``|-zeta'/zeta - sum_{m<=N} Lambda(m) m**-s|``."""
    s = to_fraction(s)
    if s <= 1:
        raise ValueError(f"s must exceed 1, got {float(s)}")
    if term_limit < 2:
        raise ValueError(f"term limit must be at least 2, got {term_limit}")
    digits = digits or required_digits(s, term_limit, default_guard_digits())
    z = zeta(s, digits).value
    zp = zeta_prime(s, digits).value
    partial = mangoldt_partial_sum(s, term_limit, digits).value
    with working_digits(digits):
        return BigReal(abs(-zp / z - partial), digits)


def log2_identity(s: RealLike, digits: int | None = None) -> BigReal:
    """``zeta'(s) / (1 - zeta(s))``, tending to ``ln 2``."""
    return log_formula(PrimePrefix(), s, digits)


def sqrt2_identity(s: RealLike, digits: int | None = None) -> BigReal:
    """``(zeta(s/2) - 1) ** (-1/s)``, tending to ``sqrt(2)``."""
    return difference_formula(PrimePrefix(), Fraction(1, 2), s, digits)


def cube27_identity(s: RealLike, digits: int | None = None) -> BigReal:
    """``(zeta(3s) - (1 - 2**(-3s))**-1) ** (-1/s)``, tending to 27."""
    return difference_formula(PrimePrefix([2]), 3, s, digits)

