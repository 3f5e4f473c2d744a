import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_force_max
from rsgsim.model import ConfigError, PolicySpec, SystemState, TieRule
from rsgsim.policies import (
    RoundRobinState, decide, mws_weights, rsg_weights, schedule_values, select_max_weight, select_round_robin,
)
from rsgsim.schedule_space import conflict_graph_schedules, single_hop_schedules, switch_matchings


def test_mws_weights():
    assert list(mws_weights((3, 5), (1, 1))) == [3, 5]
    assert list(mws_weights((0, 0), (1, 1))) == [0, 0]
    assert list(mws_weights((2, 2), (2, 1))) == [4, 2]


def test_rsg_weights():
    assert list(rsg_weights((3, 5), (10, 0), (1, 1), (1, 1), 1)) == [13, 5]
    assert list(rsg_weights((0, 4), (8, 0), (1, 1), (1, 0), 10)) == [80, 4]
    assert list(rsg_weights((3, 5), (9, 2), (1, 1), (1, 1), 0)) == list(mws_weights((3, 5), (1, 1)))


def test_select_max_weight_examples():
    two = single_hop_schedules(2)
    assert select_max_weight((3, 5), (1, 1), two) == (0, 1)
    assert select_max_weight((4, 4), (1, 1), two) == (1, 0)
    # 2x2 switch, w*c rows (3, 1) and (2, 4): identity scores 7, swap scores 3
    s = select_max_weight((3, 1, 2, 4), (1, 1, 1, 1), switch_matchings(2))
    assert s == (1, 0, 0, 1)


def test_seeded_uniform_needs_rng_and_spreads_ties():
    four = single_hop_schedules(4)
    with pytest.raises(ValueError):
        select_max_weight((1, 1, 1, 1), (1, 1, 1, 1), four, TieRule.SEEDED_UNIFORM)
    rng = np.random.default_rng(1)
    picks = {select_max_weight((1, 1, 1, 0), (1, 1, 1, 1), four, TieRule.SEEDED_UNIFORM, rng) for _ in range(200)}
    assert picks == set(four.schedules[:3])


def test_round_robin():
    s, rr = select_round_robin(RoundRobinState(2), 3)
    assert s == (0, 0, 1) and rr.next_link == 0
    rr, seen = RoundRobinState(), []
    for _ in range(8):
        s, rr = select_round_robin(rr, 4)
        seen.append(s.index(1))
    assert seen == [0, 1, 2, 3, 0, 1, 2, 3]
    assert select_round_robin(RoundRobinState(), 1)[0] == (1,)


def test_round_robin_on_switch_errors():
    with pytest.raises(ConfigError):
        decide(PolicySpec.make("round_robin", 9), SystemState.zero(9), (1,) * 9, switch_matchings(3))


def test_decide_serves_largest_counter():
    p = PolicySpec.make("rsg", 4, gamma=1.5)
    state = SystemState((0, 0, 0, 0), (3, 1, 0, 2), 3)
    s, _ = decide(p, state, (1, 1, 1, 1), single_hop_schedules(4))
    assert s == (1, 0, 0, 0)


def test_mws_equals_rsg_gamma_zero_on_same_streams():
    rng = np.random.default_rng(5)
    sched = switch_matchings(3)
    mws, rsg = PolicySpec.make("mws", 9), PolicySpec.make("rsg", 9, gamma=0.0)
    for _ in range(300):
        Q = tuple(int(x) for x in rng.integers(0, 6, 9))
        T = tuple(int(x) for x in rng.integers(0, 6, 9))
        c = tuple(int(x) for x in rng.integers(0, 3, 9))
        state = SystemState(Q, T, 10)
        assert decide(mws, state, c, sched)[0] == decide(rsg, state, c, sched)[0]


graphs = st.integers(1, 8).flatmap(lambda L: st.tuples(
    st.just(L),
    st.lists(st.tuples(st.integers(0, L - 1), st.integers(0, L - 1)).filter(lambda e: e[0] != e[1]), max_size=12),
    st.lists(st.floats(0, 100, allow_nan=False), min_size=L, max_size=L),
    st.lists(st.integers(0, 4), min_size=L, max_size=L),
))


@given(graphs)
def test_argmax_is_exhaustive_optimum(g):
    L, edges, w, c = g
    ss = conflict_graph_schedules(L, edges)
    s = select_max_weight(w, c, ss)
    chosen = schedule_values(w, c, ss)[ss.schedules.index(s)]
    assert chosen == pytest.approx(brute_force_max(w, c, ss.schedules), rel=1e-12, abs=1e-12)


@given(graphs, st.sampled_from([0.5, 2.0, 4.0, 1024.0]))
def test_argmax_invariant_under_power_of_two_scaling(g, k):
    # power-of-two factors scale exactly, so the tie structure is preserved
    L, edges, w, c = g
    ss = conflict_graph_schedules(L, edges)
    assert select_max_weight(w, c, ss) == select_max_weight([k * x for x in w], c, ss)


@given(graphs)
def test_zero_channel_links_can_be_masked(g):
    L, edges, w, c = g
    ss = conflict_graph_schedules(L, edges)
    masked = [x if ci > 0 else 0.0 for x, ci in zip(w, c)]
    assert max(schedule_values(w, c, ss)) == max(schedule_values(masked, c, ss))
