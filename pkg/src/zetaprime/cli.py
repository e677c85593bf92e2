"""Command-line interface.

Exit codes: 0 success, 1 identity outside tolerance, 2 usage or validation
error, 3 computation did not settle (escalation exhausted or precision
failure).
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import mpmath

from . import golomb_formulas as gf
from .numerics import (
    GUARD_DIGITS_ENV,
    BigReal,
    PrecisionError,
    default_guard_digits,
    render_fixed,
    render_significant,
    to_fraction,
    working_digits,
)
from .primes import PrefixError, PrimePrefix, first_primes, is_prime, nth_prime
from .zeta_kernel import TermBudgetExceeded, zeta, zeta_prime

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2
EXIT_UNSETTLED = 3

CSV_HEADER = ("formula", "n", "s", "value", "status")

# Published reference values are truncated, not rounded; tables keep that convention.
TABLE1_S = (10, 100)
TABLE1_PLACES = 15
TABLE2_S = 1000
TABLE2_PLACES = {10: 15, 100: 14, 1000: 15, 10000: 15}


class UsageError(Exception):
    pass


def _parse_real(text: str, what: str) -> Fraction:
    try:
        return to_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{what} must be a real number, got {text!r}") from None


def _auto_or_int(text: str) -> int | None:
    if text == "auto":
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("digit counts must be positive")
    return value


def format_s(s: Fraction) -> str:
    """``s`` with at most six fractional digits and no trailing zeros."""
    scaled = round(s * 10**6)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**6)
    text = f"{sign}{whole}"
    if frac:
        text += "." + f"{frac:06d}".rstrip("0")
    return text


# table -------------------------------------------------------------------------


def table1_rows() -> list[tuple[int, list[str]]]:
    rows = []
    for n in range(10):
        prefix = PrimePrefix.first(n)
        cells = [gf.main_formula(prefix, s).render(TABLE1_PLACES, "down") for s in TABLE1_S]
        rows.append((n + 1, cells))
    return rows


def table2_rows(max_row: int = 1000) -> list[tuple[int, int, str]]:
    rows = []
    for n in sorted(TABLE2_PLACES):
        if n > max_row:
            break
        value = gf.main_formula(PrimePrefix.first(n - 1), TABLE2_S)
        rows.append((n, nth_prime(n), value.render(TABLE2_PLACES[n], "down")))
    return rows


def cmd_table(args: argparse.Namespace, out) -> int:
    if args.id == 1:
        out.write(f"{'n+1':<5}{'s=10':<22}{'s=100'}\n")
        for k, (c10, c100) in table1_rows():
            out.write(f"{k:<5}{c10:<22}{c100}\n")
    else:
        out.write(f"{'n':<7}{'expected':<10}p_n(s), s={TABLE2_S}\n")
        for n, expected, value in table2_rows(args.max_row):
            out.write(f"{n:<7}{expected:<10}{value}\n")
    return EXIT_OK


# next --------------------------------------------------------------------------


def _prefix_from_args(args: argparse.Namespace) -> PrimePrefix:
    strict = not args.any_set
    if args.count is not None:
        if args.count < 0:
            raise UsageError("--count must be non-negative")
        return PrimePrefix(first_primes(args.count), strict=strict)
    text = (args.known or "").strip()
    try:
        values = [int(x) for x in text.split(",") if x.strip()] if text else []
    except ValueError:
        raise UsageError(f"--known must be a comma-separated list of integers, got {text!r}") from None
    return PrimePrefix(values, strict=strict)


def cmd_next(args: argparse.Namespace, out) -> int:
    prefix = _prefix_from_args(args)
    if args.any_set:
        print(
            "warning: --any-set extracts the smallest prime absent from the given set",
            file=sys.stderr,
        )
    if args.s == "auto":
        if args.digits is not None:
            raise UsageError("--digits needs a fixed --s; adaptive mode sizes precision itself")
        result = gf.next_prime_adaptive(prefix)
        out.write(f"prime: {result.prime}\n")
        out.write(f"s: {format_s(result.s_final)}\n")
        out.write(f"digits: {result.digits_final}\n")
        out.write(f"iterations: {result.iterations}\n")
        out.write(f"residual: {render_significant(result.residual.value, 6)}\n")
        return EXIT_OK

    s = _parse_real(args.s, "--s")
    if s <= 1:
        raise UsageError("--s must exceed 1")
    value = gf.main_formula(prefix, s, args.digits)
    with working_digits(value.digits):
        candidate = int(mpmath.nint(value.value))
        residual = BigReal(abs(value.value - candidate), value.digits)
    out.write(f"prime: {candidate}\n")
    out.write(f"s: {format_s(s)}\n")
    out.write(f"digits: {value.digits}\n")
    out.write(f"value: {value.render(20)}\n")
    out.write(f"residual: {render_significant(residual.value, 6)}\n")
    if residual >= gf.ROUNDING_THRESHOLD or not is_prime(candidate):
        print(f"error: value at s={format_s(s)} does not round cleanly to a prime; raise s", file=sys.stderr)
        return EXIT_UNSETTLED
    if candidate != prefix.target():
        print(
            f"error: value at s={format_s(s)} rounds to {candidate}, not the next prime {prefix.target()}; raise s",
            file=sys.stderr,
        )
        return EXIT_UNSETTLED
    return EXIT_OK


# sweep -------------------------------------------------------------------------


def _grid(s_min: Fraction, s_max: Fraction, step: Fraction) -> list[Fraction]:
    if s_min <= 1:
        raise UsageError("--s-min must exceed 1")
    if step <= 0:
        raise UsageError("--step must be positive")
    if s_max < s_min:
        raise UsageError("--s-max must not be below --s-min")
    count = int((s_max - s_min) / step) + 1
    return [s_min + k * step for k in range(count)]


def _formula_from_args(args: argparse.Namespace) -> gf.FormulaKind:
    if args.formula in ("power", "difference", "logderiv"):
        return gf.FormulaKind(args.formula, _parse_real(args.a or "1", "--a"))
    if args.a is not None and _parse_real(args.a, "--a") != 1:
        raise UsageError(f"--a does not apply to formula {args.formula!r}")
    return gf.FormulaKind(args.formula)


def write_sweep_csv(table: gf.SweepTable, stream, places: int) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for sample in table.samples:
        value = sample.value.render(places) if sample.value is not None else ""
        writer.writerow((table.formula.name, table.n, format_s(sample.s), value, sample.status))


def cmd_sweep(args: argparse.Namespace, out) -> int:
    formula = _formula_from_args(args)
    grid = _grid(
        _parse_real(args.s_min, "--s-min"),
        _parse_real(args.s_max, "--s-max"),
        _parse_real(args.step, "--step"),
    )
    if args.n < 0:
        raise UsageError("--n must be non-negative")
    if grid[0] * formula.a <= 1:
        raise UsageError("a * s-min must exceed 1")
    table = gf.sweep(formula, args.n, grid, "auto" if args.digits is None else args.digits)
    buffer = io.StringIO()
    write_sweep_csv(table, buffer, args.places)
    if args.out in (None, "-"):
        out.write(buffer.getvalue())
    else:
        Path(args.out).write_text(buffer.getvalue(), encoding="utf-8")
    return EXIT_OK


# identity ----------------------------------------------------------------------


def _identity_spec(name: str, s: Fraction, digits: int | None, term_limit: int):
    """(measured, target, tolerance) for a named identity."""
    if name == "sqrt2":
        measured = gf.sqrt2_identity(s, digits)
        with working_digits(measured.digits):
            target = mpmath.sqrt(2)
        return measured, target, Fraction(1, 10**9)
    if name == "cube27":
        return gf.cube27_identity(s, digits), mpmath.mpf(27), Fraction(1, 10**6)
    if name == "log2":
        measured = gf.log2_identity(s, digits)
        with working_digits(measured.digits):
            target = mpmath.log(2)
        return measured, target, Fraction(1, 10**9)
    if name == "asymptotic":
        measured = gf.asymptotic_check(s, digits)
        return measured, gf.asymptotic_model(s, measured.digits).value, Fraction(1, 10**3)
    if name == "mangoldt":
        if s < 2:
            raise UsageError("the von Mangoldt tail bound needs s >= 2")
        measured = gf.mangoldt_identity_check(s, term_limit, digits)
        bound = gf.mangoldt_tail_bound(s, term_limit, measured.digits)
        return measured, mpmath.mpf(0), to_fraction(bound.value)
    raise UsageError(f"unknown identity {name!r}")  # pragma: no cover - argparse choices


IDENTITY_DEFAULT_S = {"sqrt2": 400, "cube27": 100, "log2": 100, "asymptotic": 100, "mangoldt": 10}


def cmd_identity(args: argparse.Namespace, out) -> int:
    s = _parse_real(args.s, "--s") if args.s is not None else Fraction(IDENTITY_DEFAULT_S[args.name])
    if s <= 1:
        raise UsageError("--s must exceed 1")
    if args.term_limit < 2:
        raise UsageError("--term-limit must be at least 2")
    measured, target, tolerance = _identity_spec(args.name, s, args.digits, args.term_limit)
    with working_digits(measured.digits):
        error = abs(measured.value - target)
        tol = mpmath.mpf(tolerance.numerator) / tolerance.denominator
        passed = error <= tol
        out.write(f"identity: {args.name}\n")
        out.write(f"s: {format_s(s)}\n")
        out.write(f"digits: {measured.digits}\n")
        out.write(f"measured: {measured.render(args.places, 'down')}\n")
        out.write(f"target: {render_fixed(target, args.places, 'down')}\n")
        out.write(f"abs_error: {render_significant(error, 6)}\n")
        out.write(f"tolerance: {render_significant(tol, 6)}\n")
        out.write(f"result: {'pass' if passed else 'fail'}\n")
    return EXIT_OK if passed else EXIT_TOLERANCE


# zeta --------------------------------------------------------------------------


def cmd_zeta(args: argparse.Namespace, out) -> int:
    s = _parse_real(args.s, "--s")
    if s <= 1:
        raise UsageError("--s must exceed 1")
    if args.digits < 1:
        raise UsageError("--digits must be positive")
    fn = zeta_prime if args.derivative else zeta
    value = fn(s, args.digits + 10)
    out.write(render_significant(value.value, args.digits) + "\n")
    return EXIT_OK


# wiring ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zetaprime",
        description="Extract the next prime from the Riemann zeta function by limit formulas.",
        epilog=f"Set {GUARD_DIGITS_ENV} to override the default 30 guard digits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table", help="reproduce the published evaluation tables")
    p.add_argument("id", type=int, choices=(1, 2))
    p.add_argument("--max-row", type=int, choices=(1000, 10000), default=1000,
                   help="last row of table 2 (default 1000)")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("next", help="extract the prime following a known prefix")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--known", help="comma-separated known primes, e.g. 2,3,5")
    src.add_argument("--count", type=int, help="use the first COUNT primes as the prefix")
    p.add_argument("--s", default="auto", help="'auto' (adaptive doubling) or a fixed s")
    p.add_argument("--digits", type=_auto_or_int, default=None, help="'auto' or working digits (fixed s only)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="any_set", action="store_false", help="prefix must be 2, 3, 5, ... (default)")
    mode.add_argument("--any-set", dest="any_set", action="store_true", help="accept any finite set of primes")
    p.set_defaults(func=cmd_next, any_set=False)

    p = sub.add_parser("sweep", help="write (s, value) samples of a formula as CSV")
    p.add_argument("--formula", required=True, choices=gf.KINDS)
    p.add_argument("--n", type=int, required=True, help="number of known primes")
    p.add_argument("--a", default=None, help="exponent for power, difference, logderiv (default 1)")
    p.add_argument("--s-min", required=True)
    p.add_argument("--s-max", required=True)
    p.add_argument("--step", required=True)
    p.add_argument("--digits", type=_auto_or_int, default=None, help="'auto' or a fixed working precision")
    p.add_argument("--places", type=int, default=20, help="fractional digits printed per value")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("identity", help="check a closed-form limit identity")
    p.add_argument("--name", required=True, choices=tuple(IDENTITY_DEFAULT_S))
    p.add_argument("--s", default=None, help="evaluation point (default depends on identity)")
    p.add_argument("--digits", type=_auto_or_int, default=None)
    p.add_argument("--term-limit", type=int, default=1000, help="von Mangoldt partial sum cutoff N")
    p.add_argument("--places", type=int, default=9, help="fractional digits printed (truncated)")
    p.set_defaults(func=cmd_identity)

    p = sub.add_parser("zeta", help="evaluate zeta(s) or zeta'(s)")
    p.add_argument("--s", required=True)
    p.add_argument("--digits", type=int, required=True, help="significant digits printed")
    p.add_argument("--derivative", action="store_true")
    p.set_defaults(func=cmd_zeta)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    handler: Callable[[argparse.Namespace, object], int] = args.func
    try:
        default_guard_digits()
        return handler(args, out)
    except (UsageError, PrefixError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except gf.EscalationExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSETTLED
    except (PrecisionError, TermBudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSETTLED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
