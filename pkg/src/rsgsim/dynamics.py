"""One-slot state transitions.

Within a slot the scheduler sees the begin-of-slot (Q, T) and the current
channel; arrivals of the slot are added before departures and can leave in
the same slot.
"""

from __future__ import annotations

from typing import Sequence

from rsgsim.model import DimensionMismatch, SystemState


def step_queue(q: int, a: int, c: int, s: int) -> int:
    return max(q + a - c * s, 0)


def step_tsls(t: int, c: int, s: int) -> int:
    # resets on offered service, even when there is nothing to send
    return 0 if c * s > 0 else t + 1


def step_tsls_variant(t: int, q: int, c: int, s: int) -> int:
    """Counter that freezes while the link's begin-of-slot queue is empty."""
    if c * s > 0:
        return 0
    return t if q == 0 else t + 1


def departures_and_unused(q: int, a: int, c: int, s: int) -> tuple[int, int]:
    offered = c * s
    departed = min(q + a, offered)
    return departed, offered - departed


def advance_slot(
    state: SystemState,
    a: Sequence[int],
    c: Sequence[int],
    s: Sequence[int],
    tsls_mode: str = "standard",
) -> tuple[SystemState, tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Apply one slot to every link.

    Returns ``(next_state, departed, unused, service_event)``.
    """
    L = len(state.Q)
    if not (len(a) == len(c) == len(s) == L):
        raise DimensionMismatch(f"slot inputs must all have length L={L}")
    if tsls_mode not in ("standard", "variant"):
        raise ValueError(f"unknown tsls_mode {tsls_mode!r}")
    Q, T, dep, unused, event = [], [], [], [], []
    for l in range(L):
        q, t = state.Q[l], state.T[l]
        d, u = departures_and_unused(q, a[l], c[l], s[l])
        Q.append(step_queue(q, a[l], c[l], s[l]))
        if tsls_mode == "variant":
            T.append(step_tsls_variant(t, q, c[l], s[l]))
        else:
            T.append(step_tsls(t, c[l], s[l]))
        dep.append(d)
        unused.append(u)
        event.append(int(c[l] * s[l] > 0))
    nxt = SystemState(tuple(Q), tuple(T), state.slot + 1)
    return nxt, tuple(dep), tuple(unused), tuple(event)
