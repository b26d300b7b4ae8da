"""Shared fixtures-by-function for the test suite: enclosures, oracles, mutations."""

from __future__ import annotations

import dataclasses
import itertools
import random
from math import isqrt

import mpmath

from qgame.core import Q, ExactState, make_numeric_state, make_state, top_cumulatives
from qgame.trace import AncillaPlan, Claim, ProofTrace, RULES


# -- irrational enclosures ----------------------------------------------------


def _raw_to_q(raw) -> Q:
    sign, man, exp, _ = raw
    q = Q(int(man)) * Q(2) ** exp if exp >= 0 else Q(int(man), 2 ** (-exp))
    return -q if sign else q


def constant_enclosure(name: str, digits: int = 50) -> tuple[Q, Q]:
    """Rigorous rational bounds on 1/sqrt(2), 1/pi or 1/e, about ``digits`` digits wide."""
    if name == "inv_sqrt2":
        scale = 10**digits
        r = isqrt(scale * scale // 2)
        return Q(r, scale), Q(r + 1, scale)
    iv = mpmath.iv
    saved, iv.dps = iv.dps, digits
    try:
        x = {"inv_pi": 1 / iv.pi, "inv_e": 1 / iv.e}[name]
    finally:
        iv.dps = saved
    lo, hi = x._mpi_
    return _raw_to_q(lo), _raw_to_q(hi)


CONSTANTS = ("inv_sqrt2", "inv_pi", "inv_e")


def irrational_game(rng: random.Random, max_branches: int = 4):
    """A game whose weights are ``c*alpha`` and ``(1-c)*beta`` for an irrational ``c``.

    Returns ``(numeric_state, value_lo, value_hi, recipe)``; the exact value of
    the true (irrational-weight) game lies in ``[value_lo, value_hi]``.
    """
    name = rng.choice(CONSTANTS)
    c_lo, c_hi = constant_enclosure(name)
    k = rng.randint(2, max_branches)
    payoffs = rng.sample(range(-10, 11), k)
    split = rng.randint(1, k - 1)

    def shares(n):
        raw = [rng.randint(1, 9) for _ in range(n)]
        return [Q(r, sum(raw)) for r in raw]

    alpha, beta = shares(split), shares(k - split)
    rows, a_coef, const = [], Q(0), Q(0)
    for x, s in zip(payoffs[:split], alpha):
        rows.append((x, c_lo * s, c_hi * s))
        a_coef += x * s
    for x, s in zip(payoffs[split:], beta):
        rows.append((x, (1 - c_hi) * s, (1 - c_lo) * s))
        const += x * s
        a_coef -= x * s
    # value = const + c * a_coef, linear in c
    ends = sorted([const + c_lo * a_coef, const + c_hi * a_coef])
    return make_numeric_state(rows), ends[0], ends[1], (name, payoffs, alpha, beta)


# -- brute-force rounding oracle ----------------------------------------------


def consistent_vertices(state) -> list[list[Q]]:
    """Vertices of the set of normalized weight vectors inside the enclosures."""
    lo = [b.weight_lo for b in state.branches]
    hi = [b.weight_hi for b in state.branches]
    k = len(lo)
    out = []
    for free in range(k):
        others = [i for i in range(k) if i != free]
        for corner in itertools.product((0, 1), repeat=k - 1):
            w = [Q(0)] * k
            for i, bit in zip(others, corner):
                w[i] = hi[i] if bit else lo[i]
            w[free] = 1 - sum(w)
            if lo[free] <= w[free] <= hi[free]:
                out.append(w)
    return out


def _tops(weights):
    return [sum(weights[j:], Q(0)) for j in range(len(weights))]


def grid_vectors(k: int, n: int):
    for cuts in itertools.combinations_with_replacement(range(n + 1), k - 1):
        edges = (0, *cuts, n)
        yield [Q(edges[i + 1] - edges[i], n) for i in range(k)]


def brute_tightest(state, n: int) -> tuple[list[Q], list[Q]]:
    """Exhaustive search for the tightest dominated and dominating grid-1/n vectors.

    Returns the two top-cumulative vectors. Asserts that a unique tightest one
    exists in each direction.
    """
    vertex_tops = [_tops(v) for v in consistent_vertices(state)]
    assert vertex_tops, "enclosure admits no weight vector"
    k = len(state.branches)
    upper = [t for t in map(_tops, grid_vectors(k, n))
             if all(a >= b for vt in vertex_tops for a, b in zip(t, vt))]
    lower = [t for t in map(_tops, grid_vectors(k, n))
             if all(a <= b for vt in vertex_tops for a, b in zip(t, vt))]
    best_up = [t for t in upper if all(all(a <= b for a, b in zip(t, u)) for u in upper)]
    best_lo = [t for t in lower if all(all(a >= b for a, b in zip(t, u)) for u in lower)]
    assert len(best_up) == 1 and len(best_lo) == 1
    return best_lo[0], best_up[0]


def tops_of(state: ExactState, payoffs) -> list[Q]:
    return top_cumulatives(state, payoffs)


# -- random rational games ----------------------------------------------------


def random_rational(rng: random.Random, span: int = 20, den: int = 12) -> Q:
    return Q(rng.randint(-span * den, span * den), rng.randint(1, den))


def random_game(rng: random.Random, max_branches: int = 5, max_den: int = 60, phases=True) -> ExactState:
    k = rng.randint(1, max_branches)
    payoffs = set()
    while len(payoffs) < k:
        payoffs.add(random_rational(rng))
    d = rng.randint(k, max_den)
    cuts = sorted(rng.sample(range(1, d), k - 1))
    edges = [0, *cuts, d]
    rows = []
    for i, x in enumerate(sorted(payoffs)):
        ph = Q(rng.randint(0, 23), 24) if phases else Q(0)
        rows.append((x, Q(edges[i + 1] - edges[i], d), ph))
    return make_state(rows)


# -- trace mutation harness ---------------------------------------------------


MUTATION_KINDS = ("claim", "premise", "tag", "offset", "param")


def _replace_step(trace: ProofTrace, index: int, **changes) -> ProofTrace:
    steps = list(trace.steps)
    steps[index] = dataclasses.replace(steps[index], **changes)
    return ProofTrace(tuple(steps), trace.conclusion)


def _bump(q: Q) -> Q:
    return q + Q(1, 7)


def mutation_sites(trace: ProofTrace, kind: str) -> list[int]:
    steps = trace.steps
    if kind == "claim":
        return [s.id for s in steps if s.claim is not None]
    if kind == "premise":
        return [s.id for s in steps if s.premises]
    if kind == "tag":
        return [s.id for s in steps]
    if kind == "offset":
        return [s.id for s in steps if s.rule == "R_EXPAND"]
    if kind == "param":
        return [s.id for s in steps if any(k in s.params for k in ("k", "a", "b", "c", "d"))]
    raise ValueError(kind)


def mutate(trace: ProofTrace, kind: str, index: int, rng: random.Random) -> ProofTrace:
    """Apply one semantics-altering change of ``kind`` to step ``index``."""
    step = trace.steps[index]
    if kind == "claim":
        c = step.claim
        return _replace_step(trace, index, claim=Claim(c.kind, _bump(c.value), c.coef, c.unknown))
    if kind == "premise":
        drop = rng.randrange(len(step.premises))
        premises = step.premises[:drop] + step.premises[drop + 1:]
        return _replace_step(trace, index, premises=premises)
    if kind == "tag":
        other = rng.choice([r for r in RULES if r != step.rule])
        return _replace_step(trace, index, rule=other)
    if kind == "offset":
        plan = step.params["plan"]
        a = rng.randrange(len(plan.offsets))
        j = rng.randrange(len(plan.offsets[a]))
        block = list(plan.offsets[a])
        block[j] = _bump(block[j])
        offsets = plan.offsets[:a] + (tuple(block),) + plan.offsets[a + 1:]
        params = dict(step.params, plan=AncillaPlan(plan.block_sizes, offsets))
        return _replace_step(trace, index, params=params)
    if kind == "param":
        key = rng.choice([k for k in ("k", "a", "b", "c", "d") if k in step.params])
        return _replace_step(trace, index, params=dict(step.params, **{key: _bump(step.params[key])}))
    raise ValueError(kind)
