"""Exact representation of finite measurement games.

A game is a list of branches ``(payoff, weight, phase)``: the payoff is the
measured eigenvalue (numerically equal to the utility received), the weight is
the squared amplitude and the phase is a fraction of a full turn. Everything
is an exact ``gmpy2.mpq`` rational (aliased ``Q``); floats are refused at the
boundary.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping, NamedTuple, Sequence, Union

from gmpy2 import mpq

Q = mpq
Rational = mpq
RationalLike = Union[int, str, Fraction, mpq]

__all__ = [
    "Q",
    "Rational",
    "GameError",
    "DuplicatePayoff",
    "NotNormalized",
    "EmptyState",
    "InvalidWeight",
    "UnknownPayoff",
    "PayoffCollision",
    "PhaseError",
    "Branch",
    "ExactState",
    "NumericBranch",
    "NumericState",
    "Interval",
    "to_rational",
    "make_state",
    "eigenstate",
    "equal_weight_state",
    "equal_weight_sorted",
    "make_numeric_state",
    "degenerate_enclosure",
    "born_value",
    "born_probability",
    "support",
    "shift_payoffs",
    "negate_payoffs",
    "apply_phases",
    "strip_phases",
    "compose",
    "mix",
    "top_cumulatives",
    "fraction_str",
    "state_to_json",
    "state_from_json",
    "numeric_to_json",
    "numeric_from_json",
]


class GameError(ValueError):
    """Base class for invalid game constructions."""


class DuplicatePayoff(GameError):
    pass


class NotNormalized(GameError):
    pass


class EmptyState(GameError):
    pass


class InvalidWeight(GameError):
    pass


class UnknownPayoff(GameError):
    pass


class PayoffCollision(GameError):
    pass


class PhaseError(GameError):
    pass


_FRACTION_RE = re.compile(r"^-?\d+(/\d+)?$")


def to_rational(value: RationalLike) -> Q:
    """Coerce ``value`` to a Q without ever going through a float.

    Strings must be integer or ``m/n`` fraction literals; decimal points are
    rejected so that every number on the wire is exact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Fraction)) or type(value) is mpq:
        return Q(value)
    if isinstance(value, str):
        text = value.strip()
        if not _FRACTION_RE.match(text):
            raise GameError(f"not an exact fraction string: {value!r}")
        if text.endswith("/0"):
            raise GameError(f"zero denominator: {value!r}")
        return Q(text)
    raise TypeError(f"expected int, str or rational, got {type(value).__name__}")


def fraction_str(q: Q) -> str:
    return str(q)


class Branch(NamedTuple):
    payoff: Q
    weight: Q
    phase: Q = Q(0)


@dataclass(frozen=True)
class ExactState:
    """A validated game: distinct payoffs, ascending, weights summing to 1."""

    branches: tuple[Branch, ...]

    def __hash__(self) -> int:
        # Q.__hash__ does a modular inverse; hashing integer parts is far cheaper
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = hash(tuple(
                (b.payoff.numerator, b.payoff.denominator, b.weight.numerator,
                 b.weight.denominator, b.phase.numerator, b.phase.denominator)
                for b in self.branches
            ))
            object.__setattr__(self, "_hash", h)
            return h

    @property
    def payoffs(self) -> tuple[Q, ...]:
        return tuple(b.payoff for b in self.branches)

    @property
    def weights(self) -> tuple[Q, ...]:
        return tuple(b.weight for b in self.branches)

    def __len__(self) -> int:
        return len(self.branches)

    def is_phase_free(self) -> bool:
        return all(b.phase == 0 for b in self.branches)

    def is_equal_weight(self) -> bool:
        first = self.branches[0].weight
        return all(b.weight == first for b in self.branches)

    def __repr__(self) -> str:
        parts = []
        for b in self.branches:
            item = f"{b.payoff}:{b.weight}"
            if b.phase:
                item += f"@{b.phase}"
            parts.append(item)
        return "ExactState(" + ", ".join(parts) + ")"


def make_state(branches: Iterable[Sequence[RationalLike]]) -> ExactState:
    """Build a validated :class:`ExactState` from ``(payoff, weight[, phase])`` rows.

    Zero-weight rows are dropped, so the branch set is exactly the support.

    Raises:
        DuplicatePayoff: two rows share a payoff.
        NotNormalized: the weights do not sum to exactly one.
        EmptyState: nothing is left after dropping zero weights.
        InvalidWeight: a weight is negative or exceeds one.
    """
    rows = []
    for row in branches:
        if len(row) not in (2, 3):
            raise GameError(f"branch must be (payoff, weight[, phase]), got {row!r}")
        payoff = to_rational(row[0])
        weight = to_rational(row[1])
        phase = to_rational(row[2]) if len(row) == 3 else Q(0)
        if weight < 0 or weight > 1:
            raise InvalidWeight(f"weight {weight} outside [0, 1]")
        if weight == 0:
            continue
        rows.append(Branch(payoff, weight, phase % 1))
    if not rows:
        raise EmptyState("a game needs at least one branch of nonzero weight")
    rows.sort(key=lambda b: b.payoff)
    for prev, cur in zip(rows, rows[1:]):
        if prev.payoff == cur.payoff:
            raise DuplicatePayoff(f"payoff {cur.payoff} appears twice")
    total = sum((b.weight for b in rows), Q(0))
    if total != 1:
        raise NotNormalized(f"weights sum to {total}, not 1")
    return ExactState(tuple(rows))


def eigenstate(payoff: RationalLike) -> ExactState:
    return ExactState((Branch(to_rational(payoff), Q(1)),))


def equal_weight_sorted(payoffs: Sequence[Q]) -> ExactState:
    """Unchecked equal-weight state; ``payoffs`` must be ascending and distinct rationals."""
    w = Q(1, len(payoffs))
    return ExactState(tuple(Branch(x, w) for x in payoffs))


def equal_weight_state(payoffs: Iterable[RationalLike]) -> ExactState:
    values = [to_rational(x) for x in payoffs]
    if not values:
        raise EmptyState("equal-weight state needs at least one payoff")
    w = Q(1, len(values))
    return make_state([(x, w) for x in values])


def born_value(state: ExactState) -> Q:
    """Reference expected payoff: sum of weight times payoff."""
    return sum((b.weight * b.payoff for b in state.branches), Q(0))


def born_probability(state: ExactState, payoff: RationalLike) -> Q:
    x = to_rational(payoff)
    for b in state.branches:
        if b.payoff == x:
            return b.weight
    return Q(0)


def support(state: ExactState) -> frozenset[Q]:
    return frozenset(b.payoff for b in state.branches)


def shift_payoffs(state: ExactState, k: RationalLike) -> ExactState:
    k = to_rational(k)
    return ExactState(tuple(Branch(b.payoff + k, b.weight, b.phase) for b in state.branches))


def negate_payoffs(state: ExactState) -> ExactState:
    return ExactState(
        tuple(Branch(-b.payoff, b.weight, b.phase) for b in reversed(state.branches))
    )


def apply_phases(state: ExactState, phases: Mapping[RationalLike, RationalLike]) -> ExactState:
    """Add per-payoff phases (fractions of a turn, taken mod 1)."""
    delta = {to_rational(x): to_rational(p) for x, p in phases.items()}
    known = support(state)
    for x in delta:
        if x not in known:
            raise UnknownPayoff(f"no branch with payoff {x}")
    return ExactState(
        tuple(
            Branch(b.payoff, b.weight, (b.phase + delta.get(b.payoff, 0)) % 1)
            for b in state.branches
        )
    )


def strip_phases(state: ExactState) -> ExactState:
    if state.is_phase_free():
        return state
    return ExactState(tuple(Branch(b.payoff, b.weight) for b in state.branches))


def _flatten(rows: list[Branch]) -> ExactState:
    rows.sort(key=lambda b: b.payoff)
    for prev, cur in zip(rows, rows[1:]):
        if prev.payoff == cur.payoff:
            raise PayoffCollision(f"payoff {cur.payoff} produced twice")
    return ExactState(tuple(rows))


def compose(state: ExactState, subgames: Mapping[RationalLike, ExactState]) -> ExactState:
    """Replace the branches keyed in ``subgames`` by those sub-games, flattened.

    Sub-game weights are scaled by the parent weight, so the result is
    normalized whenever the inputs are.
    """
    subs = {to_rational(x): g for x, g in subgames.items()}
    if not state.is_phase_free() or not all(g.is_phase_free() for g in subs.values()):
        raise PhaseError("compose is defined on phase-free games only")
    known = support(state)
    for x in subs:
        if x not in known:
            raise UnknownPayoff(f"no branch with payoff {x}")
    rows: list[Branch] = []
    for b in state.branches:
        sub = subs.get(b.payoff)
        if sub is None:
            rows.append(b)
        else:
            rows.extend(Branch(c.payoff, c.weight * b.weight) for c in sub.branches)
    return _flatten(rows)


def mix(parts: Sequence[tuple[Q, ExactState]]) -> ExactState:
    """Weighted disjoint union of phase-free games; part weights must sum to 1.

    This is the composite ``(a|psi1> + b|psi2>)/norm`` over non-intersecting
    supports, with ``|a|^2`` and ``|b|^2`` given as part weights.
    """
    total = sum((w for w, _ in parts), Q(0))
    if total != 1:
        raise NotNormalized(f"part weights sum to {total}, not 1")
    rows: list[Branch] = []
    for w, g in parts:
        if w <= 0:
            raise InvalidWeight(f"part weight {w} must be positive")
        if not g.is_phase_free():
            raise PhaseError("mix is defined on phase-free games only")
        rows.extend(Branch(b.payoff, b.weight * w) for b in g.branches)
    return _flatten(rows)


# -- enclosures ---------------------------------------------------------------


@dataclass(frozen=True)
class NumericBranch:
    payoff: Q
    weight_lo: Q
    weight_hi: Q


@dataclass(frozen=True)
class NumericState:
    """A game whose weights are only known to lie in rational enclosures."""

    branches: tuple[NumericBranch, ...]

    @property
    def payoffs(self) -> tuple[Q, ...]:
        return tuple(b.payoff for b in self.branches)

    def slack(self) -> Q:
        return sum((b.weight_hi - b.weight_lo for b in self.branches), Q(0))

    def is_degenerate(self) -> bool:
        return all(b.weight_lo == b.weight_hi for b in self.branches)

    def top_cumulative_bounds(self) -> list[tuple[Q, Q]]:
        """Tight bounds on ``sum(w[i] for i >= j)`` over all consistent weight vectors.

        Entry ``j`` is ``(lo, hi)``. The bottom entry is always ``(1, 1)``.
        """
        lo = [b.weight_lo for b in self.branches]
        hi = [b.weight_hi for b in self.branches]
        k = len(lo)
        out = []
        below_lo = below_hi = Q(0)
        above_lo = sum(lo, Q(0))
        above_hi = sum(hi, Q(0))
        for j in range(k):
            t_hi = min(Q(1), above_hi, 1 - below_lo)
            t_lo = max(Q(0), above_lo, 1 - below_hi)
            out.append((t_lo, t_hi))
            below_lo += lo[j]
            below_hi += hi[j]
            above_lo -= lo[j]
            above_hi -= hi[j]
        return out

    def contains(self, state: ExactState) -> bool:
        weights = {b.payoff: b.weight for b in state.branches}
        if not set(weights) <= set(self.payoffs):
            return False
        return all(
            b.weight_lo <= weights.get(b.payoff, Q(0)) <= b.weight_hi
            for b in self.branches
        )


def make_numeric_state(branches: Iterable[Sequence[RationalLike]]) -> NumericState:
    """Build a :class:`NumericState` from ``(payoff, weight_lo, weight_hi)`` rows."""
    rows = []
    for row in branches:
        if len(row) != 3:
            raise GameError(f"numeric branch must be (payoff, lo, hi), got {row!r}")
        x, lo, hi = (to_rational(v) for v in row)
        if not 0 <= lo <= hi <= 1:
            raise InvalidWeight(f"enclosure [{lo}, {hi}] not inside [0, 1]")
        rows.append(NumericBranch(x, lo, hi))
    if not rows:
        raise EmptyState("a game needs at least one branch")
    rows.sort(key=lambda b: b.payoff)
    for prev, cur in zip(rows, rows[1:]):
        if prev.payoff == cur.payoff:
            raise DuplicatePayoff(f"payoff {cur.payoff} appears twice")
    if sum(b.weight_lo for b in rows) > 1 or sum(b.weight_hi for b in rows) < 1:
        raise NotNormalized("enclosures admit no normalized weight vector")
    return NumericState(tuple(rows))


def degenerate_enclosure(state: ExactState) -> NumericState:
    return NumericState(tuple(NumericBranch(b.payoff, b.weight, b.weight) for b in state.branches))


def top_cumulatives(state: ExactState, payoffs: Sequence[Q]) -> list[Q]:
    """``sum(weight of payoffs >= payoffs[j])`` for each grid payoff ``j``."""
    out = []
    for x in payoffs:
        out.append(sum((b.weight for b in state.branches if b.payoff >= x), Q(0)))
    return out


@dataclass(frozen=True)
class Interval:
    lo: Q
    hi: Q

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Q:
        return self.hi - self.lo

    def __contains__(self, value: Any) -> bool:
        return self.lo <= value <= self.hi

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


# -- JSON ---------------------------------------------------------------------


def state_to_json(state: ExactState) -> dict:
    return {
        "branches": [
            {"payoff": str(b.payoff), "weight": str(b.weight), "phase": str(b.phase)}
            for b in state.branches
        ]
    }


def _require(obj: Any, key: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise GameError(f"missing field {key!r}")
    return obj[key]


def state_from_json(obj: Any) -> ExactState:
    rows = _require(obj, "branches")
    if not isinstance(rows, list):
        raise GameError("'branches' must be a list")
    return make_state(
        (_require(r, "payoff"), _require(r, "weight"), r.get("phase", "0")) for r in rows
    )


def numeric_to_json(state: NumericState) -> dict:
    return {
        "branches": [
            {"payoff": str(b.payoff), "weight_lo": str(b.weight_lo), "weight_hi": str(b.weight_hi)}
            for b in state.branches
        ]
    }


def numeric_from_json(obj: Any) -> NumericState:
    rows = _require(obj, "branches")
    if not isinstance(rows, list):
        raise GameError("'branches' must be a list")
    return make_numeric_state(
        (_require(r, "payoff"), _require(r, "weight_lo"), _require(r, "weight_hi")) for r in rows
    )
