"""Exact values of quantum measurement games, derived from decision axioms.

Every derived value comes with a proof trace that the independent checker in
:mod:`qgame.checker` re-validates without consulting the expected-payoff rule.
"""

from .ancilla import MAX_EXPANSION, ExpansionTooLarge, check_plan, expand_to_equal, plan_blocks
from .axioms import ValueFunctional, ViolationReport, audit, generate_suite
from .checker import Verdict, verify
from .core import (
    Q,
    Branch,
    DuplicatePayoff,
    EmptyState,
    ExactState,
    GameError,
    Interval,
    InvalidWeight,
    NotNormalized,
    NumericState,
    PayoffCollision,
    PhaseError,
    UnknownPayoff,
    apply_phases,
    born_value,
    compose,
    eigenstate,
    equal_weight_state,
    make_numeric_state,
    make_state,
    mix,
    negate_payoffs,
    shift_payoffs,
    strip_phases,
    to_rational,
)
from .dominance import EnclosureTooWide, bracket, squeeze
from .engine import derive_equal_set, derive_interval, derive_value
from .trace import AncillaPlan, Claim, MalformedTrace, ProofTrace, RuleStep

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
