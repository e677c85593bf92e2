"""Ground-truth prime machinery.

Sieve, deterministic Miller-Rabin, the nth-prime oracle, the von Mangoldt
function, and :class:`PrimePrefix`, the validated list of known primes every
limit formula consumes.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath

from .numerics import BigReal, working_digits

# The smallest strong pseudoprime to every base 2..37; below it those bases
# decide primality exactly, which covers all 64-bit inputs.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
MR_DETERMINISTIC_BOUND = 318_665_857_834_031_151_167_461
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class PrefixError(ValueError):
    """A list of integers is not an acceptable set of known primes."""


def sieve_up_to(limit: int) -> list[int]:
    """All primes ``<= limit`` in ascending order."""
    if limit < 2:
        raise ValueError(f"sieve limit must be at least 2, got {limit}")
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for i in range(2, math.isqrt(limit) + 1):
        if flags[i]:
            flags[i * i :: i] = bytes(len(range(i * i, limit + 1, i)))
    return [i for i, f in enumerate(flags) if f]


def is_prime(m: int) -> bool:
    """Deterministic primality test.

    Trial division by small primes, then strong-pseudoprime tests to the
    first twelve prime bases.  Exact for every ``m`` below
    :data:`MR_DETERMINISTIC_BOUND`; larger inputs raise ``ValueError``
    rather than return a probabilistic answer.
    """
    if m < 2:
        return False
    for p in _SMALL_PRIMES:
        if m % p == 0:
            return m == p
    if m < 41 * 41:
        return True
    if m >= MR_DETERMINISTIC_BOUND:
        raise ValueError(f"no deterministic primality guarantee for m >= {MR_DETERMINISTIC_BOUND}")
    d, r = m - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, m)
        if x == 1 or x == m - 1:
            continue
        for _ in range(r - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


def _nth_prime_upper_bound(n: int) -> int:
    # Rosser: p_n < n (ln n + ln ln n) for n >= 6
    if n < 6:
        return 13
    return int(n * (math.log(n) + math.log(math.log(n)))) + 1


@lru_cache(maxsize=8)
def _primes_table(limit: int) -> tuple[int, ...]:
    return tuple(sieve_up_to(limit))


def first_primes(n: int) -> tuple[int, ...]:
    """The first ``n`` primes (empty for ``n == 0``)."""
    if n < 0:
        raise ValueError(f"prime count must be non-negative, got {n}")
    if n == 0:
        return ()
    return _primes_table(_nth_prime_upper_bound(n))[:n]


def nth_prime(n: int) -> int:
    """The ``n``-th prime, counting ``p_1 = 2``."""
    if n < 1:
        raise ValueError(f"prime index must be at least 1, got {n}")
    return first_primes(n)[-1]


def primes_by_index(start: int, count: int) -> tuple[int, ...]:
    """Primes ``p_start, ..., p_{start+count-1}`` (1-based)."""
    if start < 1:
        raise ValueError(f"prime index must be at least 1, got {start}")
    return first_primes(start + count - 1)[start - 1 :]


def von_mangoldt(m: int, digits: int) -> BigReal:
    """``ln p`` when ``m`` is a power of the prime ``p``, otherwise 0."""
    if m < 1:
        raise ValueError(f"von Mangoldt function needs m >= 1, got {m}")
    base = _prime_power_base(m)
    with working_digits(digits):
        return BigReal(mpmath.log(base) if base else mpmath.mpf(0), digits)


def _prime_power_base(m: int) -> int:
    """``p`` if ``m == p**k`` for a prime ``p`` and ``k >= 1``, else 0."""
    if m < 2:
        return 0
    for p in range(2, math.isqrt(m) + 1):
        if m % p == 0:
            while m % p == 0:
                m //= p
            return p if m == 1 else 0
    return m


class PrimePrefix(Sequence[int]):
    """Known primes fed to the limit formulas.

    In strict mode (the default) the list must be exactly ``2, 3, 5, ...``,
    the first ``n`` primes.  With ``strict=False`` any finite set of distinct
    primes is accepted; the formulas then extract the smallest prime that is
    *absent* from the set rather than ``p_{n+1}``.
    """

    __slots__ = ("_primes", "strict")

    def __init__(self, primes: Iterable[int] = (), *, strict: bool = True):
        values = [int(p) for p in primes]
        if strict:
            expected = first_primes(len(values))
            if tuple(values) != expected:
                bad = next(i for i, (a, b) in enumerate(zip(values, expected)) if a != b)
                raise PrefixError(
                    f"position {bad + 1} holds {values[bad]}, expected {expected[bad]}; "
                    "strict mode requires the consecutive first primes"
                )
        else:
            for p in values:
                if not is_prime(p):
                    raise PrefixError(f"{p} is not prime")
            if len(set(values)) != len(values):
                raise PrefixError("duplicate primes in set")
            values.sort()
        self._primes = tuple(values)
        self.strict = strict

    @classmethod
    def first(cls, n: int) -> "PrimePrefix":
        return cls(first_primes(n))

    @property
    def primes(self) -> tuple[int, ...]:
        return self._primes

    @property
    def n(self) -> int:
        return len(self._primes)

    @property
    def largest(self) -> int | None:
        return self._primes[-1] if self._primes else None

    @property
    def prime_upper_bound(self) -> int:
        """Bertrand bound on the prime the formulas extract."""
        return 2 * self._primes[-1] if self._primes else 2

    def target(self) -> int:
        """The prime the limit formulas converge to for this prefix."""
        if self.strict:
            return nth_prime(self.n + 1)
        for p in _primes_table(max(2 * (self.largest or 1), 2)):
            i = bisect_left(self._primes, p)
            if i == len(self._primes) or self._primes[i] != p:
                return p
        raise AssertionError("Bertrand's postulate violated")  # pragma: no cover

    def __getitem__(self, index):
        return self._primes[index]

    def __len__(self) -> int:
        return len(self._primes)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, PrimePrefix):
            return self._primes == other._primes and self.strict == other.strict
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self._primes, self.strict))

    def __repr__(self) -> str:
        mode = "" if self.strict else ", strict=False"
        if len(self._primes) > 6:
            shown = ", ".join(map(str, self._primes[:3])) + ", ..., " + str(self._primes[-1])
        else:
            shown = ", ".join(map(str, self._primes))
        return f"PrimePrefix([{shown}]{mode})"

    def extend(self, p: int) -> "PrimePrefix":
        return PrimePrefix((*self._primes, p), strict=self.strict)
