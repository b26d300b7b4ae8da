import random

import pytest

from qgame.ancilla import (
    ExpansionTooLarge,
    check_plan,
    expand_to_equal,
    plan_blocks,
    symmetric_offsets,
)
from qgame.core import Q, PhaseError, apply_phases, born_value, equal_weight_state, make_state


def test_singletons():
    plan = plan_blocks([Q(2, 3), Q(-5)], [1, 1])
    assert plan.offsets == ((0,), (0,))


def test_two_one():
    plan = plan_blocks([0, 10], [2, 1])
    assert sorted(plan.offsets[0]) == [Q(-1, 2), Q(1, 2)]
    assert plan.offsets[1] == (0,)
    assert check_plan([0, 10], plan) == []


def test_escalation_on_collision():
    # spacing 1 puts 0 + 1/2 and 1 - 1/2 on the same payoff
    plan = plan_blocks([0, 1], [2, 2])
    assert plan.offsets[0] == (Q(-1, 4), Q(1, 4))
    assert check_plan([0, 1], plan) == []


def test_symmetric_offsets():
    assert symmetric_offsets(3, Q(1)) == (-1, 0, 1)
    assert symmetric_offsets(4, Q(1, 2)) == (Q(-3, 4), Q(-1, 4), Q(1, 4), Q(3, 4))


def test_check_plan_detects_problems():
    plan = plan_blocks([0, 10], [2, 1])
    broken = type(plan)(plan.block_sizes, ((Q(-1, 2), Q(1)), (0,)))
    assert "block 0 offsets do not sum to zero" in check_plan([0, 10], broken)


@pytest.mark.parametrize("n", range(2, 51))
def test_all_two_block_plans(n):
    for m in range(1, n):
        plan = plan_blocks([0, 1], [m, n - m])
        assert check_plan([0, 1], plan) == []


def test_random_multi_block_plans():
    rng = random.Random(10)
    for _ in range(1000):
        k = rng.randint(1, 6)
        base = sorted({Q(rng.randint(-30, 30), rng.randint(1, 4)) for _ in range(k)})
        sizes = [rng.randint(1, 12) for _ in base]
        plan = plan_blocks(base, sizes)
        assert check_plan(base, plan) == []
        assert all(sum(block) == 0 for block in plan.offsets)


class TestExpand:
    def test_third(self):
        g = make_state([(0, Q(1, 3)), (3, Q(2, 3))])
        e, step = expand_to_equal(g)
        assert len(e) == 3 and e.is_equal_weight()
        assert 0 in e.payoffs
        d = e.payoffs[2] - 3
        assert e.payoffs[1:] == (3 - d, 3 + d)
        assert born_value(e) == 2
        assert step.rule == "R_EXPAND" and step.subject == g

    def test_equal_pair_unchanged(self):
        g = equal_weight_state([0, 1])
        e, step = expand_to_equal(g)
        assert e == g and step.params["plan"].offsets == ((0,), (0,))

    def test_quarter(self):
        g = make_state([(0, Q(1, 2)), (1, Q(1, 4)), (2, Q(1, 4))])
        e, _ = expand_to_equal(g)
        assert len(e) == 4 and e.is_equal_weight()
        assert born_value(e) == Q(3, 4) == sum(e.payoffs) / 4

    def test_value_preserved(self):
        rng = random.Random(4)
        for _ in range(200):
            k = rng.randint(1, 5)
            d = rng.randint(k, 60)
            cuts = sorted(rng.sample(range(1, d), k - 1))
            edges = [0, *cuts, d]
            xs = rng.sample(range(-20, 21), k)
            g = make_state([(x, Q(edges[i + 1] - edges[i], d)) for i, x in enumerate(xs)])
            e, _ = expand_to_equal(g)
            assert born_value(e) == born_value(g)

    def test_errors(self):
        with pytest.raises(PhaseError):
            expand_to_equal(apply_phases(equal_weight_state([0, 1]), {0: Q(1, 2)}))
        with pytest.raises(ExpansionTooLarge):
            expand_to_equal(make_state([(0, Q(1, 97)), (1, Q(96, 97))]), max_branches=50)
