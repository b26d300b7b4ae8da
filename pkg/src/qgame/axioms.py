"""Audit candidate value functionals against the game axioms.

The candidates form the power family

    V_beta(s) = sum_a p_a**beta * x_a / sum_b p_b**beta

which keeps the eigenstate rule for every ``beta`` and reduces to the
expected payoff at ``beta == 1``. Non-integer powers are evaluated as rational
enclosures (integer ``q``-th roots at a fixed decimal scale), so every reported
violation carries an exact error bound and is never a rounding artifact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import gmpy2

from .core import (
    Q,
    ExactState,
    apply_phases,
    compose,
    make_state,
    mix,
    negate_payoffs,
    shift_payoffs,
    state_to_json,
    strip_phases,
    support,
    to_rational,
)

AXIOMS = ("PHASE", "SHIFT", "SUBSTITUTION", "ZERO_SUM")
SHIFTS = (Q(1), Q(-2), Q(1, 3))

_MASK = (1 << 64) - 1


class SplitMix64:
    """Steele, Lea and Flood's SplitMix64; fixed-output across platforms."""

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next()
            if r < limit:
                return r % n

    def sample(self, population: Sequence, k: int) -> list:
        pool = list(population)
        for i in range(k):
            j = i + self.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


def generate_suite(
    seed: int, count: int, max_branches: int, *, max_denominator: int = 60, phases: bool = True
) -> list[ExactState]:
    """Deterministic list of rational-weight games.

    Each game has between 2 and ``max_branches`` branches, distinct integer
    payoffs in ``[-10, 10]`` (wider when more branches are requested), weights
    ``c_a / D`` with one common ``D <= max_denominator`` and, when ``phases``
    is set, phases in twelfths of a turn.
    """
    if count < 1 or max_branches < 2:
        raise ValueError("need count >= 1 and max_branches >= 2")
    if max_denominator < max_branches:
        raise ValueError("max_denominator must allow max_branches positive weights")
    rng = SplitMix64(seed)
    radius = max(10, max_branches)
    suite = []
    for _ in range(count):
        b = 2 + rng.below(max_branches - 1)
        payoffs = rng.sample(range(-radius, radius + 1), b)
        denom = b + rng.below(max_denominator - b + 1)
        cuts = sorted(rng.sample(range(1, denom), b - 1))
        edges = [0, *cuts, denom]
        rows = []
        for a, x in enumerate(payoffs):
            phase = Q(rng.below(12), 12) if phases else Q(0)
            rows.append((x, Q(edges[a + 1] - edges[a], denom), phase))
        suite.append(make_state(rows))
    return suite


# -- functionals ----------------------------------------------------------------


def power_enclosure(p: Q, beta: Q, digits: int) -> tuple[Q, Q]:
    """Rational ``[lo, hi]`` containing ``p**beta`` for ``p > 0`` and ``beta > 0``."""
    m, q = beta.numerator, beta.denominator
    a, b = p.numerator ** m, p.denominator ** m
    if q == 1:
        exact = Q(a, b)
        return exact, exact
    scale = 10**digits
    radicand = a * b ** (q - 1) * scale**q
    r, exact = gmpy2.iroot(radicand, q)
    lo = Q(r, b * scale)
    if exact:
        return lo, lo
    return lo, Q(r + 1, b * scale)


@dataclass(frozen=True)
class ValueFunctional:
    tag: str
    beta: Q
    digits: int = 60

    @classmethod
    def power(cls, beta) -> "ValueFunctional":
        beta = to_rational(beta)
        if beta <= 0:
            raise ValueError("beta must be positive")
        return cls(f"V_{beta}", beta)

    def evaluate(self, state: ExactState) -> tuple[Q, Q]:
        """Return ``(value, error_bound)``; the true value is within the bound."""
        num_lo = num_hi = den_lo = den_hi = Q(0)
        for br in state.branches:
            lo, hi = power_enclosure(br.weight, self.beta, self.digits)
            den_lo += lo
            den_hi += hi
            if br.payoff >= 0:
                num_lo += br.payoff * lo
                num_hi += br.payoff * hi
            else:
                num_lo += br.payoff * hi
                num_hi += br.payoff * lo
        v_lo = num_lo / den_hi if num_lo >= 0 else num_lo / den_lo
        v_hi = num_hi / den_lo if num_hi >= 0 else num_hi / den_hi
        return (v_lo + v_hi) / 2, (v_hi - v_lo) / 2

    def __call__(self, state: ExactState) -> Q:
        return self.evaluate(state)[0]


@dataclass(frozen=True)
class ViolationReport:
    axiom: str
    game_index: int
    witness: tuple[ExactState, ...]
    transformation: str
    lhs: Q
    rhs: Q
    lhs_err: Q
    rhs_err: Q

    @property
    def discrepancy(self) -> Q:
        return abs(self.lhs - self.rhs)

    @property
    def error_bound(self) -> Q:
        return self.lhs_err + self.rhs_err

    def to_json(self) -> dict:
        return {
            "axiom": self.axiom,
            "game_index": self.game_index,
            "witness": [state_to_json(g) for g in self.witness],
            "transformation": self.transformation,
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "lhs_err": str(self.lhs_err),
            "rhs_err": str(self.rhs_err),
        }


def _pair_substitute(state: ExactState) -> tuple[Q, ExactState]:
    """Heaviest branch's payoff and a two-point game centred on it that fits between neighbours."""
    target = max(state.branches, key=lambda b: (b.weight, b.payoff)).payoff
    others = support(state) - {target}
    t = 1
    while True:
        d = Q(1, 2 * t)
        if not others & {target - d, target + d}:
            return target, make_state([(target - d, Q(1, 2)), (target + d, Q(1, 2))])
        t += 1


def audit(functional: ValueFunctional, suite: Sequence[ExactState]) -> list[ViolationReport]:
    """Check ``functional`` on every game of ``suite``; return all violations.

    Per game: the banker game (zero-sum), shifts by 1, -2 and 1/3, substitution
    of the heaviest payoff by an equal-weight pair worth that payoff, an
    equal-value disjoint mixture with the next game of the suite (when both
    values are exact), and a phase map.
    """
    evaluate = functional.evaluate
    reports: list[ViolationReport] = []

    def record(axiom, index, witness, transformation, lhs, rhs):
        (lv, le), (rv, re) = lhs, rhs
        if abs(lv - rv) > le + re:
            reports.append(ViolationReport(axiom, index, witness, transformation, lv, rv, le, re))

    for i, game in enumerate(suite):
        s = strip_phases(game)
        v, err = evaluate(s)

        record("ZERO_SUM", i, (s,), "negate", evaluate(negate_payoffs(s)), (-v, err))

        for k in SHIFTS:
            record("SHIFT", i, (s,), f"shift {k}", evaluate(shift_payoffs(s, k)), (v + k, err))

        x, pair = _pair_substitute(s)
        composite = compose(s, {x: pair})
        record("SUBSTITUTION", i, (s, pair), f"substitute payoff {x}", evaluate(composite), (v, err))

        if len(suite) > 1:
            other = strip_phases(suite[(i + 1) % len(suite)])
            w, w_err = evaluate(other)
            if err == 0 and w_err == 0:
                moved = shift_payoffs(other, v - w)
                if support(s).isdisjoint(support(moved)):
                    mixed = mix(((Q(1, 2), s), (Q(1, 2), moved)))
                    record("SUBSTITUTION", i, (s, moved), "mix 1/2 : 1/2", evaluate(mixed), (v, err))

        phases = {b.payoff: Q(j + 1, len(game) + 1) for j, b in enumerate(game.branches)}
        record("PHASE", i, (game,), "phases j/(n+1)", evaluate(apply_phases(game, phases)), evaluate(game))

    reports.sort(key=lambda r: (r.game_index, r.axiom))
    return reports
