"""Derive game values from the decision-theoretic rules alone.

Nothing here evaluates a weighted sum of payoffs. Values come out of the rule
chain (eigenstate rule, shift additivity, zero-sum rule, substitution,
constant-game lemma, ancilla expansion, dominance) and every application is
recorded as a :class:`~qgame.trace.RuleStep` so :mod:`qgame.checker` can
re-validate it.

Equal-weight games are handled as follows:

* one branch: eigenstate rule;
* two branches: the pair argument. Negating the game and shifting it by
  ``-(x1 + x2)`` give the same game, so ``-u = u - x1 - x2``;
* ``2**m`` branches: split into lower and upper halves, derive each, and
  substitute them into the pair game over the two half values;
* otherwise, with ``u`` the mean: if ``u`` is a payoff, split the set into
  ``{u}`` and the rest (both worth ``u``); if not, pad the set up to the next
  power of two with a block whose mean is ``u`` and solve the fixpoint
  ``u = (sum + pad_size * u) / P``.

The fixpoint step presupposes that the game has a value at all. That is taken
as an axiom, as is the restriction of substitution to disjoint supports.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .ancilla import MAX_EXPANSION, expand_to_equal, symmetric_offsets
from .core import (
    Q,
    DuplicatePayoff,
    ExactState,
    NumericState,
    Interval,
    compose,
    eigenstate,
    equal_weight_sorted,
    make_state,
    negate_payoffs,
    shift_payoffs,
    strip_phases,
    to_rational,
)
from .dominance import bracket
from .trace import Claim, DomSubject, ProofTrace, RuleStep


class _Builder:
    def __init__(self, max_branches: int = MAX_EXPANSION) -> None:
        self.steps: list[RuleStep] = []
        self.memo: dict[ExactState, int] = {}
        self.equal_memo: dict[tuple, int] = {}
        self.max_branches = max_branches

    def add(self, rule, premises, subject, claim, params=None, memo=True) -> int:
        sid = len(self.steps)
        self.steps.append(RuleStep(sid, rule, tuple(premises), subject, claim, params or {}))
        if memo and isinstance(subject, ExactState) and claim.is_concrete:
            self.memo.setdefault(subject, sid)
        return sid

    def value(self, sid: int) -> Q:
        return self.steps[sid].claim.value

    def trace(self, conclusion: int) -> ProofTrace:
        return ProofTrace(tuple(self.steps), conclusion)

    # -- games ---------------------------------------------------------------

    def game(self, state: ExactState) -> int:
        if state in self.memo:
            return self.memo[state]
        if not state.is_phase_free():
            base = self.game(strip_phases(state))
            return self.add("R_PHASE", [base], state, Claim.exact(self.value(base)))
        if len(state) == 1:
            return self.eig(state.branches[0].payoff)
        if state.is_equal_weight():
            return self.equal_set(state.payoffs)
        return self.expand(state)

    def eig(self, x: Q) -> int:
        state = eigenstate(x)
        if state in self.memo:
            return self.memo[state]
        return self.add("R_EIG", [], state, Claim.exact(x))

    def expand(self, state: ExactState) -> int:
        expanded, template = expand_to_equal(state, self.max_branches)
        plan = template.params["plan"]
        top = self.equal_set(expanded.payoffs)
        blocks = [self.equal_set(block) for block in plan.offsets]
        return self.add(
            "R_EXPAND", [top, *blocks], state, Claim.exact(self.value(top)), template.params
        )

    # -- equal-weight games --------------------------------------------------

    def equal_set(self, payoffs: Iterable[Q]) -> int:
        xs = sorted(payoffs)
        key = tuple((x.numerator, x.denominator) for x in xs)
        if key in self.equal_memo:
            return self.equal_memo[key]
        state = equal_weight_sorted(xs)
        if state in self.memo:
            sid = self.memo[state]
        else:
            sid = self._equal_set(state, xs)
        self.equal_memo[key] = sid
        return sid

    def _equal_set(self, state: ExactState, xs: list[Q]) -> int:
        n = len(xs)
        if n == 1:
            return self.eig(xs[0])
        if n == 2:
            return self.pair(state)
        if n & (n - 1) == 0:
            return self.halves(state, xs)
        total = sum(xs, Q(0))
        u = total / n
        if u in xs:
            return self.split(state, xs, u)
        return self.pad(state, xs, u, total)

    def pair(self, state: ExactState) -> int:
        x1, x2 = state.payoffs
        k = -x1 - x2
        zero = self.add(
            "R_ZERO", [], negate_payoffs(state), Claim.affine(Q(-1), Q(0), state),
            {"base": state}, memo=False,
        )
        shifted = self.add(
            "R_SHIFT", [], shift_payoffs(state, k), Claim.affine(Q(1), k, state),
            {"k": k, "base": state}, memo=False,
        )
        a, b, c, d = Q(-1), Q(0), Q(1), k
        return self.add(
            "R_EQN", [zero, shifted], state, Claim.exact((d - b) / (a - c)),
            {"a": a, "b": b, "c": c, "d": d},
        )

    def halves(self, state: ExactState, xs: list[Q]) -> int:
        mid = len(xs) // 2
        lower, upper = xs[:mid], xs[mid:]
        lo_id = self.equal_set(lower)
        hi_id = self.equal_set(upper)
        a, b = self.value(lo_id), self.value(hi_id)
        # a < b: every lower payoff is below every upper payoff
        outer = make_state([(a, Q(1, 2)), (b, Q(1, 2))])
        outer_id = self.equal_set([a, b])
        subject = compose(outer, {a: self.steps[lo_id].subject, b: self.steps[hi_id].subject})
        return self.add(
            "R_SUBST", [outer_id, lo_id, hi_id], subject, Claim.exact(self.value(outer_id)),
            {"outer": outer, "map": ((a, lo_id), (b, hi_id))},
        )

    def split(self, state: ExactState, xs: list[Q], u: Q) -> int:
        n = len(xs)
        rest_id = self.equal_set([x for x in xs if x != u])
        eig_id = self.eig(u)
        parts = (
            (Q(n - 1, n), self.steps[rest_id].subject, rest_id),
            (Q(1, n), self.steps[eig_id].subject, eig_id),
        )
        return self.add("R_CONST", [rest_id, eig_id], state, Claim.exact(u), {"parts": parts})

    def pad(self, state: ExactState, xs: list[Q], u: Q, total: Q) -> int:
        n = len(xs)
        size = 1 << (n - 1).bit_length()
        s = size - n
        taken = set(xs)
        t = 1
        while True:
            block = [u + y for y in symmetric_offsets(s, Q(1, t))]
            if taken.isdisjoint(block):
                break
            t += 1
        block_id = self.equal_set(block)
        full_id = self.equal_set(xs + block)
        witness = self.steps[full_id].subject
        parts = (
            (Q(n, size), state, None),
            (Q(s, size), self.steps[block_id].subject, block_id),
        )
        hyp = self.add(
            "R_CONST", [block_id], witness, Claim.affine(Q(1), Q(0), state),
            {"parts": parts, "assume": u}, memo=False,
        )
        a, b, c, d = Q(1), Q(0), Q(s, size), total / size
        return self.add(
            "R_EQN", [hyp, full_id], state, Claim.exact((d - b) / (a - c)),
            {"a": a, "b": b, "c": c, "d": d},
        )


def derive_value(state: ExactState, max_branches: int = MAX_EXPANSION) -> tuple[Q, ProofTrace]:
    """Value of a rational-weight game together with a proof trace.

    Raises:
        ExpansionTooLarge: the common weight denominator exceeds ``max_branches``.
    """
    builder = _Builder(max_branches)
    sid = builder.game(state)
    return builder.value(sid), builder.trace(sid)


def derive_equal_set(payoffs: Iterable) -> tuple[Q, ProofTrace]:
    xs = [to_rational(x) for x in payoffs]
    if len(set(xs)) != len(xs):
        raise DuplicatePayoff("equal-set payoffs must be distinct")
    builder = _Builder()
    sid = builder.equal_set(xs)
    return builder.value(sid), builder.trace(sid)


def derive_interval(
    state: NumericState, eps, max_branches: int = MAX_EXPANSION
) -> tuple[Interval, ProofTrace]:
    """Enclose the value of an irrational-weight game to width ``eps``.

    The enclosure is bracketed by a dominated and a dominating rational game;
    both are derived exactly and the trace ends in two ``R_DOM`` steps.

    Raises:
        EnclosureTooWide: the weight enclosures are too loose for ``eps``.
        ExpansionTooLarge: the rounding grid needs more branches than allowed.
    """
    low_state, high_state, _ = bracket(state, to_rational(eps))
    builder = _Builder(max_branches)
    low_id = builder.game(low_state)
    high_id = builder.game(high_state)
    lo, hi = builder.value(low_id), builder.value(high_id)
    builder.add("R_DOM", [low_id], DomSubject(state, low_state), Claim.bound("lower", lo), {}, memo=False)
    last = builder.add(
        "R_DOM", [high_id], DomSubject(state, high_state), Claim.bound("upper", hi), {}, memo=False
    )
    return Interval(lo, hi), builder.trace(last)


def interval_of(trace: ProofTrace) -> Optional[Interval]:
    """Read the bracket claimed by the trailing ``R_DOM`` steps, if any."""
    bounds = {s.claim.kind: s.claim.value for s in trace.steps[-2:] if s.rule == "R_DOM"}
    if set(bounds) != {"lower", "upper"}:
        return None
    return Interval(bounds["lower"], bounds["upper"])


__all__ = ["derive_value", "derive_equal_set", "derive_interval", "interval_of"]
