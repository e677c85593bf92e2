from fractions import Fraction

import mpmath
import pytest

from zetaprime import golomb_formulas as gf
from zetaprime.golomb_formulas import EscalationExhausted, FormulaKind
from zetaprime.numerics import PrecisionError, PrecisionPolicy, to_fraction, working_digits
from zetaprime.primes import PrimePrefix, first_primes, is_prime, nth_prime, sieve_up_to
from zetaprime.zeta_kernel import zeta, zeta_prime

P = PrimePrefix.first
GUARD = 30


def frac(x):
    return to_fraction(x.value)


def near(value, target, tol):
    with mpmath.workdps(60):
        return abs(mpmath.mpf(value.value if hasattr(value, "value") else value) - target) < tol


# printed table values --------------------------------------------------------------


@pytest.mark.parametrize(
    "n, s, expected",
    [(0, 10, "1.996546424130332"), (4, 100, "10.999999993885992"), (9, 100, "28.999632082761238")],
)
def test_main_formula_examples(n, s, expected):
    assert gf.main_formula(P(n), s).render(15, "down") == expected


def test_main_accepts_plain_lists():
    assert gf.main_formula([2, 3], 50).render(9) == gf.main_formula(P(2), 50).render(9)


@pytest.mark.parametrize("n", range(10))
def test_main_bounded_and_rounds_to_next_prime(n):
    target = nth_prime(n + 1)
    for s in (10, 20, 40, 100):
        value = gf.main_formula(P(n), s)
        assert value > 1
        assert target - Fraction(3, 2) < frac(value) < target + Fraction(1, 10)
    assert round(frac(gf.main_formula(P(n), 100))) == target
    if n == 9:
        assert gf.main_formula(P(n), 100) < 29


@pytest.mark.parametrize("n", range(10))
def test_main_converges_monotonically(n):
    target = nth_prime(n + 1)
    errors = [abs(frac(gf.main_formula(P(n), s)) - target) for s in (10, 20, 40, 80)]
    assert all(a > b for a, b in zip(errors, errors[1:]))


# variants --------------------------------------------------------------------------


def test_power_one_is_main():
    assert gf.power_formula(P(2), 1, 50).value == gf.main_formula(P(2), 50).value


def test_power_sqrt2():
    assert near(gf.power_formula(P(0), Fraction(1, 2), 400), mpmath.sqrt(2), 1e-9)


def test_power_square_of_two():
    value = gf.power_formula(P(0), 2, 100)
    assert near(value, 4, 1e-6)
    # the error shrinks when s doubles, so the tolerance is not luck
    assert abs(frac(gf.power_formula(P(0), 2, 200)) - 4) < abs(frac(value) - 4)


def test_power_rejects_small_inner_argument():
    with pytest.raises(ValueError):
        gf.power_formula(P(0), Fraction(1, 2), 2)


def test_scale_identity():
    # substituting s -> a s: power(a, s) == main(a s) ** a
    a, s = 3, 20
    digits = gf.default_digits(P(2), s, a)
    power = gf.power_formula(P(2), a, s, digits)
    main = gf.main_formula(P(2), a * s, digits)
    with working_digits(digits):
        rearranged = main.value**a
        assert abs(power.value / rearranged - 1) <= mpmath.mpf(10) ** (3 - digits)


def test_difference_sqrt2():
    assert near(gf.difference_formula(P(0), Fraction(1, 2), 400), mpmath.sqrt(2), 1e-9)


def test_difference_cube27():
    assert near(gf.difference_formula(P(1), 3, 100), 27, 1e-6)


@pytest.mark.parametrize("n, s", [(0, 100), (2, 60), (5, 30)])
def test_difference_is_main_rescaled(n, s):
    digits = gf.default_digits(P(n), s)
    diff = gf.difference_formula(P(n), 1, s, digits)
    main = gf.main_formula(P(n), s, digits)
    z = zeta(s, digits).value
    with working_digits(digits):
        # zeta - Q = zeta (1 - Q/zeta); both brackets cancel about s*log10(p)
        # digits, leaving the guard digits as the resolvable precision
        rearranged = main.value * mpmath.power(z, -mpmath.mpf(1) / s)
        assert abs(diff.value / rearranged - 1) <= mpmath.mpf(10) ** -GUARD


def test_log_formula_first_prime():
    assert gf.log_formula(P(0), 100).render(9, "down") == "0.693147180"


def test_log_formula_reduces_for_empty_prefix():
    digits = gf.default_digits(P(0), 100)
    z = zeta(100, digits).value
    zp = zeta_prime(100, digits).value
    with working_digits(digits):
        reduced = zp / (1 - z)
        assert abs(gf.log_formula(P(0), 100).value / reduced - 1) <= mpmath.mpf(10) ** (3 - digits)


def test_log_formula_recovers_five():
    at_200 = gf.log_formula(P(2), 200).value
    at_400 = gf.log_formula(P(2), 400).value
    with mpmath.workdps(400):
        err_200 = abs(mpmath.exp(at_200) - 5)
        err_400 = abs(mpmath.exp(at_400) - 5)
    assert err_200 < 1e-3
    assert err_400 < err_200


def test_logderiv_examples():
    with mpmath.workdps(30):
        model_200 = 4 * mpmath.power(mpmath.log(2), -mpmath.mpf(1) / 200)
    assert near(gf.logderiv_formula(P(0), 1, 100), mpmath.mpf("2.0073"), 0.01)
    assert near(gf.logderiv_formula(P(1), 1, 300), 3, 1e-2)
    assert near(gf.logderiv_formula(P(0), 2, 200), model_200, 0.05)
    assert abs(frac(gf.logderiv_formula(P(1), 1, 600)) - 3) < abs(frac(gf.logderiv_formula(P(1), 1, 300)) - 3)


def test_variants_agree_at_moderate_s():
    prefix, s = P(2), 60
    z_root = mpmath.power(zeta(s, 60).value, mpmath.mpf(1) / s)
    ln_estimate = gf.log_formula(prefix, s).value
    logderiv = gf.logderiv_formula(prefix, 1, s).value
    with mpmath.workdps(60):
        estimates = [
            gf.main_formula(prefix, s).value,
            gf.power_formula(prefix, 1, s).value,
            gf.difference_formula(prefix, 1, s).value * z_root,
            mpmath.exp(ln_estimate),
            logderiv * mpmath.power(ln_estimate, mpmath.mpf(1) / s),
        ]
        assert [int(mpmath.nint(v)) for v in estimates] == [5] * 5


# half-prime ------------------------------------------------------------------------


def test_half_prime_worked_example():
    assert gf.half_prime_formula(P(3), 100).render(9, "down") == "6.928114662"


@pytest.mark.parametrize("s", [Fraction(3, 2), 10, 100, 777])
def test_half_prime_empty_prefix_is_two(s):
    record = gf.half_prime_evaluation(P(0), s)
    assert record.value.value == 2
    assert record.raw.value == 1


def test_half_prime_second_prime_settles_slowly():
    assert Fraction(29, 10) < frac(gf.half_prime_formula(P(1), 100)) < 3


# records and dispatch --------------------------------------------------------------


@pytest.mark.parametrize("kind", gf.KINDS)
def test_evaluate_dispatch(kind):
    formula = FormulaKind(kind, 1) if kind in ("power", "difference", "logderiv") else FormulaKind(kind)
    record = gf.evaluate(formula, P(1), 40)
    assert record.n == 1 and record.s == 40 and record.formula == formula
    assert record.digits_used == gf.default_digits(P(1), 40)


def test_formula_kind_validation():
    with pytest.raises(ValueError):
        FormulaKind("cubic")
    with pytest.raises(ValueError):
        FormulaKind.power(0)
    assert str(FormulaKind.power(Fraction(1, 2))) == "power(a=1/2)"
    assert str(FormulaKind.main()) == "main"


def test_insufficient_precision_is_reported():
    with pytest.raises(PrecisionError):
        gf.main_formula(P(3), 300, 40)


# adaptive extraction ---------------------------------------------------------------


@pytest.mark.parametrize("primes, expected", [([], 2), ([2, 3, 5], 7), (first_primes(9), 29)])
def test_adaptive_examples(primes, expected):
    result = gf.next_prime_adaptive(PrimePrefix(primes))
    assert result.prime == expected
    assert result.residual < Fraction(1, 4)
    assert result.iterations >= 1
    assert result.s_final >= gf.ADAPTIVE_S_INITIAL


@pytest.mark.parametrize("n", range(25))
def test_adaptive_never_returns_composite(n):
    result = gf.next_prime_adaptive(P(n))
    assert is_prime(result.prime)
    assert result.prime == nth_prime(n + 1)


def test_adaptive_any_set_finds_smallest_missing():
    assert gf.next_prime_adaptive(PrimePrefix([2, 5, 7], strict=False)).prime == 3
    assert gf.next_prime_adaptive(PrimePrefix([3], strict=False)).prime == 2


def test_adaptive_exhaustion():
    seed = PrecisionPolicy(2, 58)
    with pytest.raises(EscalationExhausted) as info:
        gf.next_prime_adaptive(P(9), seed, max_doublings=0)
    assert info.value.index == 10


@pytest.mark.parametrize("count", [4, 10, 25])
def test_chain_matches_sieve(count):
    assert gf.chain(count) == sieve_up_to(100)[:count]


def test_chain_rejects_zero():
    with pytest.raises(ValueError):
        gf.chain(0)


def test_chain_reports_index_on_failure():
    with pytest.raises(EscalationExhausted) as info:
        gf.chain(10, PrecisionPolicy(2, 2), max_doublings=0)
    assert info.value.index is not None and info.value.index <= 10


# sweeps ----------------------------------------------------------------------------


def test_sweep_main_matches_table():
    table = gf.sweep(FormulaKind.main(), 0, [10, 100])
    assert [v.render(15, "down") for _, v in table.values()] == ["1.996546424130332", "1.999999999999999"]


def test_sweep_half_prime_constant_for_empty_prefix():
    table = gf.sweep(FormulaKind.halfprime(), 0, [Fraction(3, 2), 7, 50])
    assert all(v.value == 2 for _, v in table.values())


@pytest.mark.parametrize(
    "grid", [[], [10, 5], [3, 3], [1, 2], [Fraction(1, 2), 5]]
)
def test_sweep_rejects_bad_grids(grid):
    with pytest.raises(ValueError):
        gf.sweep(FormulaKind.main(), 1, grid)


def test_sweep_rejects_small_inner_argument():
    with pytest.raises(ValueError):
        gf.sweep(FormulaKind.power(Fraction(1, 2)), 0, [2, 4])


def test_sweep_records_failures_in_order():
    table = gf.sweep(FormulaKind.main(), 3, [10, 30, 300], digits_policy=40)
    assert [x.s for x in table.samples] == [10, 30, 300]
    assert table.samples[0].ok and table.samples[1].ok
    assert not table.samples[2].ok
    assert table.samples[2].value is None
    assert table.samples[2].status.startswith("failed")


def test_half_prime_curve_shape():
    table = gf.sweep(FormulaKind.halfprime(), 1, range(2, 101))
    values = [frac(v) for _, v in table.values()]
    assert len(values) == 99
    # the lowest point sits inside [2, 2.5] and the last is within 1% of 3
    assert 2 <= min(values) <= Fraction(5, 2)
    assert abs(values[-1] - 3) <= Fraction(3, 100)
    # near s = 1 the curve comes down to 2
    assert abs(frac(gf.half_prime_formula(P(1), Fraction(11, 10))) - 2) < Fraction(1, 20)


# identities ------------------------------------------------------------------------


def test_asymptotic_examples():
    assert near(gf.asymptotic_check(100), mpmath.mpf("2.0073"), 1e-3)
    assert near(gf.asymptotic_check(400), gf.asymptotic_model(400).value, 2e-3)


def test_asymptotic_log_factor():
    z = zeta(200, 80).value
    zp = zeta_prime(200, 80).value
    with mpmath.workdps(80):
        scaled = -zp / z * mpmath.mpf(2) ** 200
        assert abs(scaled - mpmath.log(2)) < mpmath.mpf(10) ** -30


def test_mangoldt_within_tail_bound():
    residual = gf.mangoldt_identity_check(10, 1000)
    assert residual < gf.mangoldt_tail_bound(10, 1000)


def test_mangoldt_first_omitted_term_dominates():
    residual = gf.mangoldt_identity_check(50, 2).value
    with mpmath.workdps(60):
        leading = mpmath.log(3) * mpmath.mpf(3) ** -50
        assert abs(residual / leading - 1) < 1e-5


def test_mangoldt_single_term():
    with working_digits(40):
        expected = mpmath.log(2) * mpmath.mpf(2) ** -17
    assert gf.mangoldt_partial_sum(17, 2, 40).value == expected


def test_mangoldt_rejects_bad_arguments():
    with pytest.raises(ValueError):
        gf.mangoldt_identity_check(1, 10)
    with pytest.raises(ValueError):
        gf.mangoldt_identity_check(5, 1)


def test_named_identities():
    assert gf.log2_identity(100).render(9, "down") == "0.693147180"
    assert near(gf.sqrt2_identity(400), mpmath.sqrt(2), 1e-9)
    assert near(gf.cube27_identity(100), 27, 1e-6)
