"""Exhaustive minimum-cost search on tiny trees."""

import pytest

from linebroadcast import alg1, alg2, alg3, check_bracket, new, optimal_cost, validate
from linebroadcast.errors import TooLarge


def test_optimal_small_fixtures():
    t = new(2, 1)
    cost, witness = optimal_cost(t, t.root)
    assert cost == 2
    assert validate(witness).ok

    cost, witness = optimal_cost(t, t.vertex_by_id(2))
    assert cost == 2
    assert validate(witness).ok

    t = new(3, 1)
    cost, witness = optimal_cost(t, t.root)
    assert cost == 4
    assert validate(witness).ok


def test_optimal_n7_bracket():
    t = new(2, 2)
    cost, witness = optimal_cost(t, t.root)
    assert 6 <= cost <= 14
    assert cost == 7  # one relay call is unavoidable inside three steps
    assert validate(witness).ok
    budget = 3
    for fn in (alg1, alg2, alg3):
        sched = fn(t, t.root)
        if sched.total_time() <= budget:
            assert sched.total_cost() >= cost
        else:
            # a slower scheme may cost less than the minimum-time optimum
            assert sched.total_cost() >= t.n - 1


def test_budget_monotonicity():
    t = new(2, 2)
    costs = [optimal_cost(t, t.root, time_budget=b)[0] for b in (3, 4, 5, 7)]
    assert costs == sorted(costs, reverse=True)
    assert costs[-1] == t.n - 1  # enough time for a chain of unit calls


def test_unit_chain_with_unbounded_time():
    t = new(2, 1)
    cost, _ = optimal_cost(t, t.root, time_budget=t.n)
    assert cost == t.n - 1


def test_cap():
    t = new(3, 2)
    with pytest.raises(TooLarge):
        optimal_cost(t, t.root)
    # raising the cap is the caller's own risk
    cost, witness = optimal_cost(new(2, 1), new(2, 1).root, cap=3)
    assert cost == 2


def test_budget_too_small():
    from linebroadcast.errors import OutOfRange

    t = new(2, 2)
    with pytest.raises(OutOfRange):
        optimal_cost(t, t.root, time_budget=2)  # seven vertices need 3 steps


def test_check_bracket():
    t = new(2, 1)
    rep = check_bracket(t, t.root)
    assert rep.ok and rep.optimal == 2

    rep = check_bracket(t, t.vertex_by_id(2))
    assert rep.ok and rep.optimal == 2

    t = new(3, 1)
    rep = check_bracket(t, t.root)
    assert rep.ok and rep.optimal == 4
    assert rep.lower <= rep.optimal

    t = new(2, 2)
    rep = check_bracket(t, t.root)
    assert rep.ok
    assert 6 <= rep.optimal <= 14
