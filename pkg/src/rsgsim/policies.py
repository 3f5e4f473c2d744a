"""Per-slot schedule selection: MWS, RSG, the RSG variant and round-robin."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from rsgsim.model import ConfigError, PolicyKind, PolicySpec, ScheduleSet, SystemState, TieRule


@dataclass(frozen=True)
class RoundRobinState:
    next_link: int = 0


def mws_weights(Q: Sequence[int], alpha: Sequence[float]) -> np.ndarray:
    return np.asarray(alpha, dtype=np.float64) * np.asarray(Q, dtype=np.float64)


def rsg_weights(Q, T, alpha, beta, gamma: float) -> np.ndarray:
    """Per-link weight ``alpha*Q + gamma*beta*T``."""
    alpha = np.asarray(alpha, dtype=np.float64)
    gb = float(gamma) * np.asarray(beta, dtype=np.float64)
    return alpha * np.asarray(Q, dtype=np.float64) + gb * np.asarray(T, dtype=np.float64)


def schedule_values(w, c, schedules: ScheduleSet) -> list[float]:
    """Value of each schedule, summed in link order (matches the compiled kernel)."""
    wc = [float(x) * int(y) for x, y in zip(w, c)]
    return [sum((wc[l] for l, on in enumerate(s) if on), 0.0) for s in schedules.schedules]


def select_max_weight(
    w,
    c,
    schedules: ScheduleSet,
    tie_rule: TieRule = TieRule.LOWEST_INDEX,
    rng: np.random.Generator | None = None,
) -> tuple[int, ...]:
    """Schedule maximizing ``sum_l w_l c_l S_l`` over the explicit set.

    With ``SEEDED_UNIFORM`` exactly one uniform is drawn from ``rng`` per call,
    whether or not there is a tie, so the stream position only depends on the
    number of decisions made.
    """
    values = schedule_values(w, c, schedules)
    best = max(values)
    winners = [k for k, v in enumerate(values) if v == best]
    if TieRule(tie_rule) is TieRule.SEEDED_UNIFORM:
        if rng is None:
            raise ValueError("seeded_uniform tie rule needs an rng")
        u = rng.random()
        return schedules.schedules[winners[int(u * len(winners))]]
    return schedules.schedules[winners[0]]


def select_round_robin(rr: RoundRobinState, L: int, origin: str = "single-hop") -> tuple[tuple[int, ...], RoundRobinState]:
    if origin != "single-hop":
        raise ConfigError(f"round-robin needs a single-hop topology, got {origin}")
    k = rr.next_link % L
    return tuple(int(l == k) for l in range(L)), RoundRobinState((k + 1) % L)


def decide(
    policy: PolicySpec,
    state: SystemState,
    c: Sequence[int],
    schedules: ScheduleSet,
    rr: RoundRobinState | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[tuple[int, ...], RoundRobinState | None]:
    """Pick this slot's schedule; returns it with the advanced round-robin state."""
    if policy.kind is PolicyKind.ROUND_ROBIN:
        return select_round_robin(rr or RoundRobinState(), schedules.L, schedules.origin)
    if policy.kind is PolicyKind.MWS:
        w = mws_weights(state.Q, policy.alpha)
    else:
        # RSG and its variant select identically; they differ in the TSLS update
        w = rsg_weights(state.Q, state.T, policy.alpha, policy.beta, policy.gamma)
    return select_max_weight(w, c, schedules, policy.tie_rule, rng), rr
