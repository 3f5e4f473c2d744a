import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import symmetric_single_hop
from rsgsim import bounds
from rsgsim.model import ArrivalModel, ChannelModel, ConfigError, SystemState, bernoulli, constant, on_off
from rsgsim.schedule_space import single_hop_schedules, switch_matchings

ONE = ChannelModel((constant(1),) * 4)
ARR = ArrivalModel((bernoulli(0.225),) * 4)


def test_margin_two_link_simplex():
    m = bounds.capacity_margin([0.3, 0.4], single_hop_schedules(2), ChannelModel((constant(1),) * 2))
    assert m.additive_eps == pytest.approx(0.15, abs=1e-9)
    assert m.multiplicative_eps == pytest.approx(3 / 7, abs=1e-9)
    assert m.inside


def test_margin_outside_is_negative():
    m = bounds.capacity_margin([0.3] * 4, single_hop_schedules(4), ONE)
    assert m.additive_eps < 0 and not m.inside


@pytest.mark.parametrize("sched,channel,threshold", [
    (single_hop_schedules(4), ONE, 0.25),
    (single_hop_schedules(4), ChannelModel((on_off(1, 0.8),) * 4), (1 - 0.2**4) / 4),
    (switch_matchings(3), ChannelModel((constant(1),) * 9), 1 / 3),
])
def test_symmetric_thresholds(sched, channel, threshold):
    assert bounds.symmetric_threshold(sched, channel) == pytest.approx(threshold, abs=1e-9)
    lam = np.full(sched.L, 0.9 * threshold)
    assert bounds.capacity_margin(lam, sched, channel).additive_eps == pytest.approx(0.1 * threshold, abs=1e-9)


def test_margin_dimension_check():
    with pytest.raises(ConfigError):
        bounds.capacity_margin([0.1] * 3, single_hop_schedules(4), ONE)


def test_channel_state_guard():
    big = ChannelModel((on_off(1, 0.5),) * 13)
    with pytest.raises(ConfigError):
        bounds.channel_states(big)


def test_lower_bound():
    lb = bounds.regularity_lower_bound([0.225] * 4, [1] * 4, single_hop_schedules(4))
    assert lb == pytest.approx(1.35)
    assert lb / 0.225 == pytest.approx(6.0)
    everything = switch_matchings(1)
    assert bounds.regularity_lower_bound([0.5], [1.0], everything) == 0.0
    with pytest.raises(ValueError):
        bounds.regularity_lower_bound([0.2, 0.2], [0, 0], single_hop_schedules(2))


@given(st.floats(0.01, 100), st.lists(st.floats(0.01, 0.3), min_size=4, max_size=4))
def test_lower_bound_scale(k, lam):
    s = single_hop_schedules(4)
    beta = np.array([1.0, 2.0, 0.5, 1.5])
    assert bounds.regularity_lower_bound(lam, k * beta, s) / k == pytest.approx(bounds.regularity_lower_bound(lam, beta, s))


def test_upper_bound_examples():
    eps = 0.1111
    ub = bounds.regularity_upper_bound([0.225] * 4, [1] * 4, [1] * 4, 1.0, ONE, ARR, eps, measured_H_beta=4.0)
    assert ub == pytest.approx(4.9 / (2 * (1 + eps)))
    assert ub == pytest.approx(2.205, abs=1e-3)
    full = bounds.regularity_upper_bound([0.225] * 4, [1] * 4, [1] * 4, 1.0, ONE, ARR, eps, measured_H_beta=1.0)
    assert full == pytest.approx(3 / (1 + eps) + ub)


def test_upper_bound_large_gamma_limit():
    # symmetric non-fading single hop serves exactly one link per slot (H_beta = 1);
    # with lam = 1/(L(1+eps)) the sum of E[T] is bounded by L(L-1) as gamma grows
    L, eps = 4, 0.05
    lam = 1 / (L * (1 + eps))
    arr = ArrivalModel((bernoulli(lam),) * L)
    ub = bounds.regularity_upper_bound([lam] * L, [1] * L, [1] * L, 1e12, ONE, arr, eps, 1.0)
    assert ub / lam == pytest.approx(L * (L - 1), rel=1e-9)


@pytest.mark.parametrize("kw", [{"gamma": 0.0}, {"eps_mult": 0.0}, {"measured_H_beta": 5.0}])
def test_upper_bound_preconditions(kw):
    args = dict(lam=[0.225] * 4, alpha=[1] * 4, beta=[1] * 4, gamma=1.0, channel=ONE, arrivals=ARR,
                eps_mult=0.1, measured_H_beta=1.0)
    args.update(kw)
    with pytest.raises(ValueError):
        bounds.regularity_upper_bound(**args)


def test_drift_constant():
    assert bounds.drift_constant_B([1] * 4, [1] * 4, 1.0, ONE, ARR) == pytest.approx(20.9)
    assert bounds.drift_constant_B([1] * 4, [1] * 4, 0.0, ONE, ARR) == pytest.approx(4.9)
    b1 = bounds.drift_constant_B([1] * 4, [1] * 4, 3.0, ONE, ARR)
    b2 = bounds.drift_constant_B([1] * 4, [1] * 4, 6.0, ONE, ARR)
    assert b2 - b1 == pytest.approx(4 * 1 * 4 * 3.0)


def test_queue_bound():
    assert bounds.queue_bound(20.9, 0.025) == pytest.approx(418)
    assert bounds.queue_bound(20.9, 0.1) == pytest.approx(104.5)
    with pytest.raises(ValueError):
        bounds.queue_bound(20.9, 0.0)


def test_lyapunov_W():
    assert bounds.lyapunov_W((2, 0), (0, 3), (1, 1), (1, 1), 1.0, 1) == 16
    assert bounds.lyapunov_W((0, 0), (0, 0), (1, 1), (1, 1), 1.0, 1) == 0
    assert bounds.lyapunov_W((2, 3), (5, 5), (1, 1), (1, 1), 0.0, 1) == 13


def test_lemma1_oracle():
    assert bounds.lemma1_oracle(4) == (1.5, 1.0)
    assert bounds.lemma1_oracle(1) == (0.0, 1.0)
    mean_t, _ = bounds.lemma1_oracle(2)
    assert mean_t == 0.5 == 0.5 * (4 / 2 - 1)
    with pytest.raises(ValueError):
        bounds.lemma1_oracle(0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 40), min_size=4, max_size=4), st.lists(st.integers(0, 30), min_size=4, max_size=4),
       st.sampled_from([0.5, 1.0, 8.0]))
def test_drift_bounded_by_B_minus_margin(Q, T, gamma):
    # one-step drift of W never exceeds B - 2*eps*sum(alpha*Q) when lam + eps is supportable
    cfg = symmetric_single_hop(gamma=gamma)
    state = SystemState(tuple(Q), tuple(T), max(T))
    B = bounds.drift_constant_B(cfg.policy.alpha, cfg.policy.beta, gamma, cfg.channel, cfg.arrivals)
    eps = 0.025
    drift = bounds.lyapunov_drift(state, cfg)
    assert drift <= B - 2 * eps * sum(Q) + 1e-9
