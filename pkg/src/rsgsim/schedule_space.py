"""Feasible-schedule sets for the three topology families.

Only maximal schedules are enumerated: with non-negative weights some
maximal schedule always attains the max-weight value, and serving an empty
queue is harmless to the queue dynamics.
"""

from __future__ import annotations

from itertools import permutations

from rsgsim.model import ConfigError, ScheduleSet

MAX_SWITCH_N = 6
MAX_CONFLICT_L = 20


def single_hop_schedules(L: int) -> ScheduleSet:
    if L < 1:
        raise ConfigError("single-hop network needs L >= 1")
    return ScheduleSet(
        tuple(tuple(int(i == l) for i in range(L)) for l in range(L)),
        "single-hop",
    )


def switch_link(i: int, j: int, N: int) -> int:
    """Link index of the (input i, output j) pair."""
    return i * N + j


def switch_matchings(N: int) -> ScheduleSet:
    """All N! perfect matchings of an N x N input-queued switch."""
    if N < 1:
        raise ConfigError("switch needs N >= 1")
    if N > MAX_SWITCH_N:
        raise ConfigError(f"switch size N={N} exceeds enumeration guard {MAX_SWITCH_N}")
    out = []
    for perm in permutations(range(N)):
        s = [0] * (N * N)
        for i, j in enumerate(perm):
            s[switch_link(i, j, N)] = 1
        out.append(tuple(s))
    return ScheduleSet(tuple(out), f"switch({N})")


def switch_conflict_edges(N: int) -> list[tuple[int, int]]:
    """Conflict graph of an N x N switch: links sharing an input or an output."""
    edges = []
    links = [(i, j) for i in range(N) for j in range(N)]
    for a, (i1, j1) in enumerate(links):
        for b in range(a + 1, len(links)):
            i2, j2 = links[b]
            if i1 == i2 or j1 == j2:
                edges.append((a, b))
    return edges


def conflict_graph_schedules(L: int, edges) -> ScheduleSet:
    """Maximal independent sets of the conflict graph, as activation vectors.

    Uses Bron-Kerbosch with pivoting on the complement graph (maximal cliques
    of the complement are maximal independent sets). Output is sorted in
    descending lexicographic order of the bit vectors so that the order does
    not depend on the edge listing.
    """
    if L < 1:
        raise ConfigError("conflict graph needs L >= 1")
    if L > MAX_CONFLICT_L:
        raise ConfigError(f"L={L} exceeds enumeration guard {MAX_CONFLICT_L}")
    conflicts: list[set[int]] = [set() for _ in range(L)]
    for a, b in edges:
        a, b = int(a), int(b)
        if not (0 <= a < L and 0 <= b < L):
            raise ConfigError(f"edge ({a}, {b}) references a link outside [0, {L})")
        if a == b:
            raise ConfigError(f"self-loop on link {a}")
        conflicts[a].add(b)
        conflicts[b].add(a)
    compat = [set(range(L)) - conflicts[v] - {v} for v in range(L)]

    found: list[frozenset[int]] = []

    def expand(r: set[int], p: set[int], x: set[int]) -> None:
        if not p and not x:
            found.append(frozenset(r))
            return
        pivot = max(p | x, key=lambda u: len(compat[u] & p))
        for v in list(p - compat[pivot]):
            expand(r | {v}, p & compat[v], x & compat[v])
            p.remove(v)
            x.add(v)

    expand(set(), set(range(L)), set())
    vectors = sorted((tuple(int(l in mis) for l in range(L)) for mis in found), reverse=True)
    return ScheduleSet(tuple(vectors), "conflict-graph")
