"""Closed-form analytic quantities: capacity margins, drift constant, queue
bound, regularity lower/upper bounds and a Lyapunov diagnostic."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from rsgsim.model import ArrivalModel, ChannelModel, ConfigError, ScheduleSet, SimConfig, SystemState

MAX_CHANNEL_STATES = 4096
LP_TOL = 1e-9


@dataclass(frozen=True)
class CapacityMargin:
    additive_eps: float
    multiplicative_eps: float

    @property
    def inside(self) -> bool:
        return self.additive_eps > 0 and self.multiplicative_eps > 0


def channel_states(channel: ChannelModel) -> tuple[np.ndarray, np.ndarray]:
    """Joint channel states (rows) and their probabilities, as a product of
    the per-link marginals."""
    n = math.prod(len(d.values) for d in channel.links)
    if n > MAX_CHANNEL_STATES:
        raise ConfigError(f"{n} joint channel states exceed guard {MAX_CHANNEL_STATES}")
    states, probs = [], []
    for combo in itertools.product(*(zip(d.values, d.probs) for d in channel.links)):
        states.append([v for v, _ in combo])
        probs.append(math.prod(p for _, p in combo))
    return np.array(states, dtype=np.int64), np.array(probs)


def _max_margin(lam: np.ndarray, schedules: ScheduleSet, channel: ChannelModel, multiplicative: bool) -> float:
    states, probs = channel_states(channel)
    S = schedules.array.astype(np.float64)
    n_c, K = len(probs), len(S)
    L = S.shape[1]
    n_var = n_c * K + 1  # theta(c, s) row-major, then eps

    # achieved rate r_l = sum_c P(c) sum_s theta(c,s) c_l s_l
    rate = np.zeros((L, n_c * K))
    for ci in range(n_c):
        rate[:, ci * K:(ci + 1) * K] = probs[ci] * (S * states[ci]).T
    A_ub = np.zeros((L, n_var))
    A_ub[:, :-1] = -rate
    if multiplicative:
        A_ub[:, -1] = lam
        b_ub = -lam
    else:
        A_ub[:, -1] = 1.0
        b_ub = -lam
    A_eq = np.zeros((n_c, n_var))
    for ci in range(n_c):
        A_eq[ci, ci * K:(ci + 1) * K] = 1.0
    b_eq = np.ones(n_c)
    c = np.zeros(n_var)
    c[-1] = -1.0
    bounds = [(0, None)] * (n_var - 1) + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        raise ConfigError(f"capacity LP failed: {res.message}")
    return float(res.x[-1])


def capacity_margin(lam, schedules: ScheduleSet, channel: ChannelModel) -> CapacityMargin:
    """Largest additive and multiplicative margins that keep ``lam`` inside
    the capacity region; negative values mean ``lam`` lies outside."""
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != (schedules.L,):
        raise ConfigError("rate vector length does not match the schedule set")
    return CapacityMargin(
        _max_margin(lam, schedules, channel, multiplicative=False),
        _max_margin(lam, schedules, channel, multiplicative=True),
    )


def symmetric_threshold(schedules: ScheduleSet, channel: ChannelModel) -> float:
    """Supremum of t such that the equal-rate vector t*1 is supportable."""
    return _max_margin(np.zeros(schedules.L), schedules, channel, multiplicative=False)


def regularity_lower_bound(lam, beta, schedules: ScheduleSet) -> float:
    bl = np.asarray(beta, dtype=np.float64) * np.asarray(lam, dtype=np.float64)
    total = float(bl.sum())
    if total <= 0:
        raise ValueError("sum of beta*lambda must be positive")
    best = float(max(schedules.array @ bl))
    return 0.5 * (total / best - 1.0) * total


def drift_constant_B(alpha, beta, gamma: float, channel: ChannelModel, arrivals: ArrivalModel) -> float:
    alpha = np.asarray(alpha, dtype=np.float64)
    second = arrivals.second_moments + channel.second_moments
    return 4.0 * gamma * channel.c_max * float(np.sum(beta)) + float(np.dot(alpha, second))


def regularity_upper_bound(
    lam,
    alpha,
    beta,
    gamma: float,
    channel: ChannelModel,
    arrivals: ArrivalModel,
    eps_mult: float,
    measured_H_beta: float,
) -> float:
    """Upper bound on ``sum beta*lam*E[T]`` under RSG.

    ``measured_H_beta`` estimates the steady-state mean of ``sum_{l in H} beta_l``;
    pass 0 for the conservative form.
    """
    if gamma <= 0:
        raise ValueError("upper bound needs gamma > 0")
    if eps_mult <= 0:
        raise ValueError("upper bound needs a positive multiplicative margin")
    beta = np.asarray(beta, dtype=np.float64)
    if len(np.asarray(lam)) != len(beta):
        raise ValueError("lam and beta lengths differ")
    total_beta = float(beta.sum())
    if not -1e-12 <= measured_H_beta <= total_beta + 1e-12:
        raise ValueError(f"measured_H_beta={measured_H_beta} outside [0, {total_beta}]")
    alpha = np.asarray(alpha, dtype=np.float64)
    second = float(np.dot(alpha, arrivals.second_moments + channel.second_moments))
    return (channel.c_max / (1 + eps_mult) * (total_beta - measured_H_beta)
            + second / (2 * gamma * (1 + eps_mult)))


def queue_bound(B: float, eps_add: float) -> float:
    if eps_add <= 0:
        raise ValueError("queue bound needs a positive additive margin (rates on or outside the boundary)")
    return B / (2 * eps_add)


def lyapunov_W(Q, T, alpha, beta, gamma: float, c_max: int) -> float:
    Q = np.asarray(Q, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    return float(np.dot(alpha, Q * Q) + 4 * gamma * c_max * np.dot(beta, T))


def lyapunov_drift(state: SystemState, cfg: SimConfig) -> float:
    """Exact one-step conditional drift of W from ``state`` under the config's
    max-weight policy (standard TSLS), averaging over channel and arrivals."""
    from rsgsim.policies import decide

    p = cfg.policy
    sched = cfg.schedules
    c_max = cfg.channel.c_max
    w_now = lyapunov_W(state.Q, state.T, p.alpha, p.beta, p.gamma, c_max)
    states, probs = channel_states(cfg.channel)
    total = 0.0
    for c, pc in zip(states, probs):
        s, _ = decide(p, state, c, sched)
        eq2 = 0.0
        t_next = 0.0
        for l, dist in enumerate(cfg.arrivals.links):
            served = c[l] * s[l]
            eq2 += p.alpha[l] * sum(pa * max(state.Q[l] + a - served, 0) ** 2
                                    for a, pa in zip(dist.values, dist.probs))
            t_next += p.beta[l] * (0 if served > 0 else state.T[l] + 1)
        total += pc * (eq2 + 4 * p.gamma * c_max * t_next)
    return total - w_now


def lemma1_oracle(P: int) -> tuple[float, float]:
    """Mean TSLS and normalized second moment for service every ``P`` slots."""
    if P < 1:
        raise ValueError("period must be >= 1")
    return (P - 1) / 2.0, 1.0
