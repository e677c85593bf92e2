"""Next-prime limit formulas built on the Riemann zeta function."""

from .euler_products import epsilon_tail, q, q_prime
from .golomb_formulas import (
    AdaptiveResult,
    EscalationExhausted,
    FormulaKind,
    LimitEvaluation,
    SweepTable,
    asymptotic_check,
    chain,
    difference_formula,
    evaluate,
    half_prime_formula,
    log_formula,
    logderiv_formula,
    main_formula,
    mangoldt_identity_check,
    next_prime_adaptive,
    power_formula,
    sweep,
)
from .numerics import BigReal, PrecisionError, PrecisionPolicy, required_digits
from .primes import PrimePrefix, is_prime, nth_prime, sieve_up_to, von_mangoldt
from .zeta_kernel import TermBudgetExceeded, zeta, zeta_prime

__version__ = "0.1.0"

__all__ = [
    "AdaptiveResult",
    "BigReal",
    "EscalationExhausted",
    "FormulaKind",
    "LimitEvaluation",
    "PrecisionError",
    "PrecisionPolicy",
    "PrimePrefix",
    "SweepTable",
    "TermBudgetExceeded",
    "asymptotic_check",
    "chain",
    "difference_formula",
    "epsilon_tail",
    "evaluate",
    "half_prime_formula",
    "is_prime",
    "log_formula",
    "logderiv_formula",
    "main_formula",
    "mangoldt_identity_check",
    "next_prime_adaptive",
    "nth_prime",
    "power_formula",
    "q",
    "q_prime",
    "required_digits",
    "sieve_up_to",
    "sweep",
    "von_mangoldt",
    "zeta",
    "zeta_prime",
]
