"""Auxiliary-system offsets that turn rational weights into equal amplitudes.

A branch of weight ``m/N`` is spread over ``m`` equal-weight branches whose
payoffs are the original payoff plus zero-sum offsets. The resulting game has
``N`` branches of weight ``1/N`` and the same expected payoff, block by block.
"""

from __future__ import annotations

from math import lcm
from typing import Sequence

from .core import Branch, ExactState, GameError, PhaseError, Q
from .trace import AncillaPlan, RuleStep

MAX_EXPANSION = 10**6


class ExpansionTooLarge(GameError):
    pass


def symmetric_offsets(size: int, spacing: Q) -> tuple[Q, ...]:
    """``spacing * (2j - size - 1) / 2`` for ``j = 1..size``; sums to zero."""
    return tuple(spacing * (2 * j - size - 1) / 2 for j in range(1, size + 1))


def _combined(base_payoffs: Sequence[Q], offsets) -> list[Q]:
    return [x + y for x, block in zip(base_payoffs, offsets) for y in block]


def plan_blocks(base_payoffs: Sequence[Q], block_sizes: Sequence[int]) -> AncillaPlan:
    """Choose per-block offsets with zero block sums and distinct combined payoffs.

    Spacings are tried in the order 1, 1/2, 1/3, ... (shared by all blocks)
    until no two combined payoffs coincide. Once every block's half-width is
    below half the smallest gap between base payoffs the blocks occupy
    disjoint intervals, so the search always ends.
    """
    base = [Q(x) for x in base_payoffs]
    sizes = [int(s) for s in block_sizes]
    if len(base) != len(sizes):
        raise ValueError("one block size per base payoff")
    if any(s < 1 for s in sizes):
        raise ValueError("block sizes must be positive")
    if len(set(base)) != len(base):
        raise ValueError("base payoffs must be distinct")
    t = 1
    while True:
        offsets = tuple(symmetric_offsets(s, Q(1, t)) for s in sizes)
        combined = _combined(base, offsets)
        if len(set(combined)) == len(combined):
            return AncillaPlan(tuple(sizes), offsets)
        t += 1


def check_plan(base_payoffs: Sequence[Q], plan: AncillaPlan) -> list[str]:
    """Return the list of violated plan conditions (empty when the plan is valid)."""
    problems = []
    if len(plan.offsets) != len(plan.block_sizes) or len(plan.offsets) != len(base_payoffs):
        problems.append("block count mismatch")
        return problems
    for a, (size, block) in enumerate(zip(plan.block_sizes, plan.offsets)):
        if len(block) != size:
            problems.append(f"block {a} has {len(block)} offsets, expected {size}")
        if sum(block, Q(0)) != 0:
            problems.append(f"block {a} offsets do not sum to zero")
        if len(set(block)) != len(block):
            problems.append(f"block {a} offsets not distinct")
    combined = _combined(base_payoffs, plan.offsets)
    if len(set(combined)) != len(combined):
        problems.append("combined payoffs not distinct")
    return problems


def common_denominator(state: ExactState) -> int:
    return lcm(*(b.weight.denominator for b in state.branches))


def expand_with_plan(state: ExactState, plan: AncillaPlan) -> ExactState:
    n = plan.total
    w = Q(1, n)
    rows = [
        Branch(b.payoff + y, w)
        for b, block in zip(state.branches, plan.offsets)
        for y in block
    ]
    rows.sort(key=lambda r: r.payoff)
    return ExactState(tuple(rows))


def expand_to_equal(state: ExactState, max_branches: int = MAX_EXPANSION) -> tuple[ExactState, RuleStep]:
    """Expand a phase-free rational game to ``N`` equal-weight branches.

    Returns the expanded game and an ``R_EXPAND`` step for ``state`` carrying
    the plan. The step's premises and claim are left for the caller, which is
    the one that knows how the expanded game gets its value.

    Raises:
        ExpansionTooLarge: the common denominator exceeds ``max_branches``.
    """
    if not state.is_phase_free():
        raise PhaseError("expand phase-free games only")
    n = common_denominator(state)
    if n > max_branches:
        raise ExpansionTooLarge(f"common denominator {n} exceeds cap {max_branches}")
    sizes = [int(b.weight * n) for b in state.branches]
    plan = plan_blocks(state.payoffs, sizes)
    expanded = expand_with_plan(state, plan)
    step = RuleStep(-1, "R_EXPAND", (), state, None, {"plan": plan})
    return expanded, step
