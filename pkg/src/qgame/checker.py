"""Step-by-step validation of proof traces.

The checker only knows the nine rule schemas and the state transformations in
:mod:`qgame.core`. It never evaluates a game's value from scratch: each step
is checked locally against its premises and the premise graph.

Claims that are affine in an unknown value, and fixpoint hypotheses
(``R_CONST`` with an ``assume`` parameter), may only be consumed by
``R_EQN``, which is where an unknown gets solved for and a hypothesis gets
confirmed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .core import (
    Q,
    Branch,
    ExactState,
    GameError,
    compose,
    equal_weight_state,
    mix,
    negate_payoffs,
    shift_payoffs,
    strip_phases,
    support,
    top_cumulatives,
)
from .trace import Claim, DomSubject, MalformedTrace, ProofTrace, RuleStep


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    failing_step: Optional[int] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


class _Reject(Exception):
    pass


def _require(cond: bool, reason: str) -> None:
    if not cond:
        raise _Reject(reason)


def _keys(step: RuleStep, *allowed: frozenset) -> None:
    _require(frozenset(step.params) in allowed, f"{step.rule} parameters do not match its schema")


def _arity(step: RuleStep, *counts: int) -> None:
    _require(len(step.premises) in counts, f"{step.rule} takes {counts} premises, got {len(step.premises)}")


def _game(step: RuleStep) -> ExactState:
    _require(isinstance(step.subject, ExactState), f"{step.rule} subject must be a single game")
    return step.subject


def _value_claim(step: RuleStep) -> Claim:
    _require(step.claim is not None and step.claim.kind == "value", f"{step.rule} must claim a value")
    return step.claim


def _settled(step: RuleStep) -> bool:
    """Concrete value claim with no open hypothesis."""
    return step.claim is not None and step.claim.is_concrete and "assume" not in step.params


class Checker:
    def __init__(self, trace: ProofTrace) -> None:
        self.trace = trace
        self.steps = trace.steps

    def premise(self, step: RuleStep, index: int) -> RuleStep:
        return self.steps[step.premises[index]]

    def concrete_premise(self, step: RuleStep, index: int) -> tuple[RuleStep, Q]:
        p = self.premise(step, index)
        _require(_settled(p), f"premise {p.id} is not a settled value")
        return p, p.claim.value

    # -- rules ----------------------------------------------------------------

    def r_eig(self, step: RuleStep) -> None:
        _keys(step, frozenset())
        _arity(step, 0)
        g = _game(step)
        _require(len(g) == 1, "eigenstate rule needs a single-branch game")
        _require(step.claim == Claim.exact(g.branches[0].payoff), "claim differs from the payoff")

    def r_phase(self, step: RuleStep) -> None:
        _keys(step, frozenset())
        _arity(step, 1)
        g = _game(step)
        p, v = self.concrete_premise(step, 0)
        _require(isinstance(p.subject, ExactState), "premise subject must be a game")
        _require(strip_phases(g) == strip_phases(p.subject), "games differ beyond phases")
        _require(step.claim == Claim.exact(v), "phase change altered the value")

    def r_shift(self, step: RuleStep) -> None:
        _keys(step, frozenset({"k", "base"}))
        _arity(step, 0, 1)
        g = _game(step)
        k, base = step.params["k"], step.params["base"]
        _require(g == shift_payoffs(base, k), "subject is not the shifted base game")
        if step.premises:
            p, v = self.concrete_premise(step, 0)
            _require(p.subject == base, "premise is not about the base game")
            expected = Claim.exact(v + k)
        else:
            expected = Claim.affine(Q(1), k, base)
        _require(step.claim == expected, "shift claim mismatch")

    def r_zero(self, step: RuleStep) -> None:
        _keys(step, frozenset({"base"}))
        _arity(step, 0, 1)
        g = _game(step)
        base = step.params["base"]
        _require(g == negate_payoffs(base), "subject is not the banker game of the base")
        if step.premises:
            p, v = self.concrete_premise(step, 0)
            _require(p.subject == base, "premise is not about the base game")
            expected = Claim.exact(-v)
        else:
            expected = Claim.affine(Q(-1), Q(0), base)
        _require(step.claim == expected, "zero-sum claim mismatch")

    def r_subst(self, step: RuleStep) -> None:
        _keys(step, frozenset({"outer", "map"}))
        _require(len(step.premises) >= 2, "substitution needs the outer game and a sub-game")
        g = _game(step)
        outer, mapping = step.params["outer"], step.params["map"]
        p_outer, v_outer = self.concrete_premise(step, 0)
        _require(p_outer.subject == outer, "first premise is not about the outer game")
        sub_ids = list(step.premises[1:])
        _require(sorted(pid for _, pid in mapping) == sorted(sub_ids), "map does not match premises")
        _require(len({x for x, _ in mapping}) == len(mapping), "payoff substituted twice")
        outer_support = support(outer)
        subs: dict[Q, ExactState] = {}
        for x, pid in mapping:
            _require(x in outer_support, f"payoff {x} not in outer game")
            p = self.steps[pid]
            _require(_settled(p), f"premise {pid} is not a settled value")
            _require(isinstance(p.subject, ExactState), "sub-game must be a game")
            _require(p.claim.value == x, f"sub-game value {p.claim.value} differs from payoff {x}")
            subs[x] = p.subject
        kept = outer_support - set(subs)
        seen = set(kept)
        for sub in subs.values():
            s = support(sub)
            _require(seen.isdisjoint(s), "supports not disjoint")
            seen |= s
        try:
            composite = compose(outer, subs)
        except GameError as exc:
            raise _Reject(f"composition failed: {exc}") from exc
        _require(g == composite, "subject is not the composite game")
        _require(step.claim == Claim.exact(v_outer), "substitution changed the value")

    def r_const(self, step: RuleStep) -> None:
        _keys(step, frozenset({"parts"}), frozenset({"parts", "assume"}))
        g = _game(step)
        parts = step.params["parts"]
        _require(len(parts) >= 1, "no parts")
        referenced = [pid for _, _, pid in parts if pid is not None]
        _require(sorted(referenced) == sorted(step.premises), "parts do not match premises")
        seen: set = set()
        for _, part, _ in parts:
            s = support(part)
            _require(seen.isdisjoint(s), "supports not disjoint")
            seen |= s
        try:
            combined = mix([(w, part) for w, part, _ in parts])
        except GameError as exc:
            raise _Reject(f"combination failed: {exc}") from exc
        _require(g == combined, "subject is not the combined game")
        values = []
        open_parts = []
        for _, part, pid in parts:
            if pid is None:
                open_parts.append(part)
                continue
            p = self.steps[pid]
            _require(_settled(p), f"premise {pid} is not a settled value")
            _require(p.subject == part, f"premise {pid} is not about its part")
            values.append(p.claim.value)
        if "assume" in step.params:
            u = step.params["assume"]
            _require(len(open_parts) == 1, "a hypothesis needs exactly one open part")
            _require(all(v == u for v in values), "parts are not worth the hypothesized value")
            expected = Claim.affine(Q(1), Q(0), open_parts[0])
        else:
            _require(not open_parts, "open part without a hypothesis")
            _require(len(set(values)) == 1, "parts are not equally valued")
            expected = Claim.exact(values[0])
        _require(step.claim == expected, "constant-game claim mismatch")

    def r_eqn(self, step: RuleStep) -> None:
        _keys(step, frozenset({"a", "b", "c", "d"}))
        _arity(step, 2)
        g = _game(step)
        a, b, c, d = (step.params[key] for key in "abcd")
        _require(a != c, "equation has no unique solution")
        first, second = self.premise(step, 0), self.premise(step, 1)
        _require(
            isinstance(first.subject, ExactState) and first.subject == second.subject,
            "premises are not about the same game",
        )
        hypotheses = [p.params["assume"] for p in (first, second) if "assume" in p.params]
        _require(len(hypotheses) <= 1, "more than one hypothesis")
        hyp = hypotheses[0] if hypotheses else None
        for p, (coef, const) in ((first, (a, b)), (second, (c, d))):
            _require(p.claim is not None and p.claim.kind == "value", f"premise {p.id} is not a value")
            if p.claim.unknown is not None:
                _require(p.claim.unknown == g, f"premise {p.id} is about a different unknown")
                _require(
                    (p.claim.coef, p.claim.value) == (coef, const),
                    f"coefficients of premise {p.id} not as recorded",
                )
            else:
                _require(p.claim.coef == 0, "malformed concrete claim")
                _require(hyp is not None, f"premise {p.id} is concrete but no hypothesis names u")
                _require(coef * hyp + const == p.claim.value, f"premise {p.id} does not read as recorded")
        solution = (d - b) / (a - c)
        _require(step.claim == Claim.exact(solution), "equation solution mismatch")
        if hyp is not None:
            _require(solution == hyp, "fixpoint hypothesis not confirmed")
            _require(hyp not in support(g), "hypothesized value is a payoff of the game")

    def r_expand(self, step: RuleStep) -> None:
        _keys(step, frozenset({"plan"}))
        g = _game(step)
        _require(g.is_phase_free(), "expansion needs a phase-free game")
        plan = step.params["plan"]
        sizes, offsets = plan.block_sizes, plan.offsets
        _require(len(sizes) == len(g) == len(offsets), "one block per branch required")
        _arity(step, len(sizes) + 1)
        total = sum(sizes)
        _require(all(s > 0 for s in sizes), "block sizes must be positive")
        combined = []
        for a, (branch, size, block) in enumerate(zip(g.branches, sizes, offsets)):
            _require(len(block) == size, f"block {a} has the wrong number of offsets")
            _require(sum(block, Q(0)) == 0, f"block {a} offsets do not sum to zero")
            _require(len(set(block)) == len(block), f"block {a} offsets not distinct")
            _require(Q(size, total) == branch.weight, f"block {a} weight total not preserved")
            combined.extend(branch.payoff + y for y in block)
        _require(len(set(combined)) == len(combined), "combined payoffs not distinct")
        w = Q(1, total)
        expanded = ExactState(tuple(sorted((Branch(x, w) for x in combined), key=lambda r: r.payoff)))
        top, v = self.concrete_premise(step, 0)
        _require(top.subject == expanded, "first premise is not the expanded game")
        for a, block in enumerate(offsets):
            p, zero = self.concrete_premise(step, a + 1)
            _require(p.subject == equal_weight_state(block), f"premise for block {a} is not its ancilla game")
            _require(zero == 0, f"ancilla game for block {a} not worth zero")
        _require(step.claim == Claim.exact(v), "expansion changed the value")

    def r_dom(self, step: RuleStep) -> None:
        _keys(step, frozenset())
        _arity(step, 1)
        subject = step.subject
        _require(isinstance(subject, DomSubject), "dominance needs an (enclosure, rounded) pair")
        claim = step.claim
        _require(claim is not None and claim.kind in ("lower", "upper"), "dominance claims a bound")
        p, v = self.concrete_premise(step, 0)
        _require(p.subject == subject.rounded, "premise is not about the rounded game")
        _require(claim == Claim.bound(claim.kind, v), "bound differs from the rounded game's value")
        rounded, enclosure = subject.rounded, subject.enclosure
        _require(rounded.is_phase_free(), "rounded game must be phase-free")
        payoffs = enclosure.payoffs
        _require(support(rounded) <= set(payoffs), "rounded game has foreign payoffs")
        tops = top_cumulatives(rounded, payoffs)
        bounds = enclosure.top_cumulative_bounds()
        if claim.kind == "lower":
            ok = all(t <= lo for t, (lo, _) in zip(tops, bounds))
        else:
            ok = all(t >= hi for t, (_, hi) in zip(tops, bounds))
        _require(ok, "dominance fails")

    RULES: dict[str, Callable] = {
        "R_EIG": r_eig,
        "R_CONST": r_const,
        "R_SHIFT": r_shift,
        "R_ZERO": r_zero,
        "R_SUBST": r_subst,
        "R_PHASE": r_phase,
        "R_EQN": r_eqn,
        "R_EXPAND": r_expand,
        "R_DOM": r_dom,
    }

    def check_step(self, step: RuleStep) -> None:
        for pid in step.premises:
            _require(0 <= pid < step.id, f"premise {pid} does not precede step {step.id}")
        _require(len(set(step.premises)) == len(step.premises) or step.rule == "R_EXPAND",
                 "repeated premise")
        if step.rule != "R_EQN":
            for pid in step.premises:
                _require(_settled(self.steps[pid]), f"premise {pid} is open; only R_EQN may use it")
        self.RULES[step.rule](self, step)

    def run(self, game: Optional[ExactState] = None) -> Verdict:
        steps = self.steps
        if not steps:
            raise MalformedTrace("empty trace")
        for i, step in enumerate(steps):
            if step.id != i:
                raise MalformedTrace(f"step at position {i} has id {step.id}")
            if step.rule not in self.RULES:
                raise MalformedTrace(f"unknown rule {step.rule!r}")
        if not 0 <= self.trace.conclusion < len(steps):
            raise MalformedTrace("conclusion is not a step id")
        for step in steps:
            try:
                self.check_step(step)
            except _Reject as exc:
                return Verdict(False, step.id, str(exc))
        final = steps[self.trace.conclusion]
        if final.rule != "R_DOM" and not _settled(final):
            return Verdict(False, final.id, "conclusion rests on an open hypothesis")
        if game is not None:
            subject = final.subject.enclosure if isinstance(final.subject, DomSubject) else final.subject
            if subject != game:
                return Verdict(False, final.id, "conclusion is about a different game")
        return Verdict(True)


def verify(trace: ProofTrace, game=None) -> Verdict:
    """Accept ``trace`` iff every step is a valid instance of its rule.

    ``game`` (an ExactState or NumericState), when given, must be the
    conclusion's subject.

    Raises:
        MalformedTrace: the trace is structurally broken (bad ids, unknown rules).
    """
    return Checker(trace).run(game)
