"""Bracket irrational-weight games between rational-weight ones.

Weights are rounded on the cumulative-from-the-top scale: ceilings of the
largest attainable top-cumulatives give a game that stochastically dominates
every game consistent with the enclosures, floors of the smallest give one that
is dominated by all of them. Moving weight toward higher payoffs never lowers
a game's value, so the two rounded games bound the value from both sides.
"""

from __future__ import annotations

from math import ceil, floor, lcm

from .core import (
    Q,
    ExactState,
    GameError,
    Interval,
    NumericState,
    born_value,
    eigenstate,
    make_state,
    to_rational,
    top_cumulatives,
)


class EnclosureTooWide(GameError):
    pass


def _from_cumulatives(payoffs, tops: list[Q]) -> ExactState:
    tops = tops + [Q(0)]
    return make_state((x, tops[j] - tops[j + 1]) for j, x in enumerate(payoffs))


def round_dominating(state: NumericState, n: int) -> ExactState:
    """Grid-``1/n`` game whose top-cumulatives are the ceilings of the largest consistent ones."""
    bounds = state.top_cumulative_bounds()
    tops = [min(Q(1), Q(ceil(hi * n), n)) for _, hi in bounds]
    tops[0] = Q(1)
    return _from_cumulatives(state.payoffs, tops)


def round_dominated(state: NumericState, n: int) -> ExactState:
    """Grid-``1/n`` game whose top-cumulatives are the floors of the smallest consistent ones."""
    bounds = state.top_cumulative_bounds()
    tops = [max(Q(0), Q(floor(lo * n), n)) for lo, _ in bounds]
    tops[0] = Q(1)
    return _from_cumulatives(state.payoffs, tops)


def _gap_weighted_spread(payoffs, low: ExactState, high: ExactState) -> Q:
    t_low = top_cumulatives(low, payoffs)
    t_high = top_cumulatives(high, payoffs)
    return sum(
        ((payoffs[j] - payoffs[j - 1]) * (t_high[j] - t_low[j]) for j in range(1, len(payoffs))),
        Q(0),
    )


def grid_size(state: NumericState, eps: Q) -> int:
    """Initial rounding grid: ``ceil(k * range / eps)`` for ``k`` branches."""
    xs = state.payoffs
    value_range = xs[-1] - xs[0]
    return max(1, ceil(len(xs) * value_range / eps))


def bracket(state: NumericState, eps) -> tuple[ExactState, ExactState, int]:
    """Return ``(dominated, dominating, grid)`` whose values differ by at most ``eps``.

    Exact (zero-width) enclosures are rounded on their own common-denominator
    grid, which leaves them unchanged. Otherwise the grid starts at
    :func:`grid_size` and doubles until the spread fits in ``eps``.

    Raises:
        EnclosureTooWide: total enclosure slack exceeds ``eps / (2 * range)``.
    """
    eps = to_rational(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    xs = state.payoffs
    if len(xs) == 1:
        only = eigenstate(xs[0])
        return only, only, 1
    if state.is_degenerate():
        n = lcm(*(b.weight_lo.denominator for b in state.branches))
        return round_dominated(state, n), round_dominating(state, n), n
    value_range = xs[-1] - xs[0]
    if state.slack() > eps / (2 * value_range):
        raise EnclosureTooWide(
            f"enclosure slack {state.slack()} exceeds {eps / (2 * value_range)} for eps={eps}"
        )
    n = grid_size(state, eps)
    while True:
        low = round_dominated(state, n)
        high = round_dominating(state, n)
        if _gap_weighted_spread(xs, low, high) <= eps:
            return low, high, n
        n *= 2


def squeeze(state: NumericState, eps) -> tuple[Interval, ExactState, ExactState]:
    """Interval ``[born(dominated), born(dominating)]`` of width at most ``eps``."""
    low, high, _ = bracket(state, eps)
    return Interval(born_value(low), born_value(high)), low, high


def dominates(upper: ExactState, lower: ExactState, payoffs) -> bool:
    """True when every top-cumulative of ``upper`` is at least that of ``lower``."""
    return all(
        a >= b for a, b in zip(top_cumulatives(upper, payoffs), top_cumulatives(lower, payoffs))
    )
