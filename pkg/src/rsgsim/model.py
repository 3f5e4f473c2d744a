"""Domain types shared across the simulator and config validation.

Everything here is immutable once built, so configs can be shared read-only
between concurrent replications.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

PROB_TOL = 1e-9


class ConfigError(ValueError):
    """Raised when a configuration violates a model invariant."""


class DimensionMismatch(ConfigError):
    pass


class NeverSchedulable(ConfigError):
    pass


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteDist:
    """Distribution over non-negative integers with finite support.

    Canonical form: support sorted ascending, no zero-probability atoms,
    probabilities normalized to sum to one.
    """

    values: tuple[int, ...]
    probs: tuple[float, ...]
    label: str = ""

    def __post_init__(self) -> None:
        if len(self.values) != len(self.probs) or not self.values:
            raise ConfigError("distribution needs matching, non-empty values/probs")
        for v in self.values:
            if int(v) != v or v < 0:
                raise ConfigError(f"support value {v!r} is not a non-negative integer")
        for p in self.probs:
            if not (p >= 0.0) or not math.isfinite(p):
                raise ConfigError(f"invalid probability {p!r}")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > PROB_TOL:
            raise ConfigError(f"probabilities sum to {total}, not 1")

    @classmethod
    def make(cls, values: Sequence[int], probs: Sequence[float], label: str = "") -> "DiscreteDist":
        merged: dict[int, float] = {}
        for v, p in zip(values, probs):
            if int(v) != v or v < 0:
                raise ConfigError(f"support value {v!r} is not a non-negative integer")
            merged[int(v)] = merged.get(int(v), 0.0) + float(p)
        items = sorted((v, p) for v, p in merged.items() if p > 0.0)
        if not items:
            raise ConfigError("distribution has no positive-probability atom")
        total = math.fsum(p for _, p in items)
        if abs(total - 1.0) > PROB_TOL:
            raise ConfigError(f"probabilities sum to {total}, not 1")
        # leave already-normalized weights untouched so canonicalization is idempotent
        scale = 1.0 if abs(total - 1.0) <= 1e-12 else total
        return cls(
            tuple(v for v, _ in items),
            tuple(p / scale for _, p in items),
            label,
        )

    def canonical(self) -> "DiscreteDist":
        return DiscreteDist.make(self.values, self.probs, self.label)

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.values, self.probs))

    @property
    def second_moment(self) -> float:
        return math.fsum(v * v * p for v, p in zip(self.values, self.probs))

    @property
    def max(self) -> int:
        return max(self.values)

    def cdf(self) -> np.ndarray:
        c = np.cumsum(np.asarray(self.probs, dtype=np.float64))
        c[-1] = 1.0
        return c

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` values by inverse CDF, one uniform per draw.

        One uniform per draw keeps the stream position independent of how
        the horizon is chunked.
        """
        u = rng.random(n)
        idx = np.searchsorted(self.cdf(), u, side="right")
        return np.asarray(self.values, dtype=np.int64)[idx]


def constant(c: int) -> DiscreteDist:
    return DiscreteDist.make([c], [1.0], f"constant({c})")


def on_off(c: int, q: float) -> DiscreteDist:
    """Rate ``c`` with probability ``q``, otherwise 0."""
    if not 0.0 <= q <= 1.0:
        raise ConfigError(f"on_off availability q={q} outside [0, 1]")
    return DiscreteDist.make([c, 0], [q, 1.0 - q], f"on_off({c},{q})")


def bernoulli(rate: float, size: int = 1) -> DiscreteDist:
    """``size`` packets with probability ``rate / size`` so the mean is ``rate``."""
    p = rate / size
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"bernoulli rate {rate} infeasible for packet size {size}")
    return DiscreteDist.make([size, 0], [p, 1.0 - p], f"bernoulli({rate},{size})")


def bursty(K: int, scale: int = 1) -> DiscreteDist:
    """``2*K*scale`` packets with probability ``1/K``, else none (mean ``2*scale``)."""
    if K < 1 or int(K) != K:
        raise ConfigError(f"burstiness K must be a positive integer, got {K}")
    return DiscreteDist.make([2 * K * scale, 0], [1.0 / K, 1.0 - 1.0 / K], f"bursty({K},{scale})")


def general(values: Sequence[int], probs: Sequence[float]) -> DiscreteDist:
    return DiscreteDist.make(values, probs, "discrete")


@dataclass(frozen=True)
class ChannelModel:
    links: tuple[DiscreteDist, ...]

    @property
    def L(self) -> int:
        return len(self.links)

    @property
    def c_max(self) -> int:
        return max(d.max for d in self.links)

    @property
    def means(self) -> np.ndarray:
        return np.array([d.mean for d in self.links])

    @property
    def second_moments(self) -> np.ndarray:
        return np.array([d.second_moment for d in self.links])


@dataclass(frozen=True)
class ArrivalModel:
    links: tuple[DiscreteDist, ...]

    @property
    def L(self) -> int:
        return len(self.links)

    @property
    def a_max(self) -> int:
        return max(d.max for d in self.links)

    @property
    def rates(self) -> np.ndarray:
        return np.array([d.mean for d in self.links])

    @property
    def second_moments(self) -> np.ndarray:
        return np.array([d.second_moment for d in self.links])


# ---------------------------------------------------------------------------
# Schedules and topology
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScheduleSet:
    """Explicit finite set of feasible activation vectors, in canonical order."""

    schedules: tuple[tuple[int, ...], ...]
    origin: str
    array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.schedules:
            raise ConfigError("schedule set is empty")
        L = len(self.schedules[0])
        if any(len(s) != L for s in self.schedules):
            raise DimensionMismatch("schedules have different lengths")
        if len(set(self.schedules)) != len(self.schedules):
            raise ConfigError("duplicate schedule vectors")
        arr = np.array(self.schedules, dtype=np.int8)
        if not np.isin(arr, (0, 1)).all():
            raise ConfigError("schedule entries must be 0 or 1")
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)

    @property
    def L(self) -> int:
        return len(self.schedules[0])

    def __len__(self) -> int:
        return len(self.schedules)

    def never_scheduled(self) -> list[int]:
        return [int(l) for l in np.flatnonzero(self.array.sum(axis=0) == 0)]


class TopologyKind(str, Enum):
    SINGLE_HOP = "single_hop"
    SWITCH = "switch"
    CONFLICT_GRAPH = "conflict_graph"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class Topology:
    kind: TopologyKind
    L: int
    N: int | None = None
    edges: tuple[tuple[int, int], ...] = ()
    explicit: tuple[tuple[int, ...], ...] = ()

    @classmethod
    def single_hop(cls, L: int) -> "Topology":
        return cls(TopologyKind.SINGLE_HOP, L)

    @classmethod
    def switch(cls, N: int) -> "Topology":
        return cls(TopologyKind.SWITCH, N * N, N=N)

    @classmethod
    def conflict_graph(cls, L: int, edges) -> "Topology":
        canon = tuple(sorted({tuple(sorted((int(a), int(b)))) for a, b in edges}))
        return cls(TopologyKind.CONFLICT_GRAPH, L, edges=canon)

    @classmethod
    def from_schedules(cls, schedules) -> "Topology":
        sched = tuple(tuple(int(x) for x in s) for s in schedules)
        return cls(TopologyKind.EXPLICIT, len(sched[0]) if sched else 0, explicit=sched)

    def schedule_set(self) -> ScheduleSet:
        from rsgsim import schedule_space

        if self.kind is TopologyKind.SINGLE_HOP:
            return schedule_space.single_hop_schedules(self.L)
        if self.kind is TopologyKind.SWITCH:
            return schedule_space.switch_matchings(self.N)
        if self.kind is TopologyKind.CONFLICT_GRAPH:
            return schedule_space.conflict_graph_schedules(self.L, self.edges)
        return ScheduleSet(self.explicit, "explicit")


# ---------------------------------------------------------------------------
# Policy, state, run configuration
# ---------------------------------------------------------------------------


class PolicyKind(str, Enum):
    MWS = "mws"
    RSG = "rsg"
    RSG_VARIANT = "rsg_variant"
    ROUND_ROBIN = "round_robin"


class TieRule(str, Enum):
    LOWEST_INDEX = "lowest_index"
    SEEDED_UNIFORM = "seeded_uniform"


@dataclass(frozen=True)
class PolicySpec:
    kind: PolicyKind
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    gamma: float = 0.0
    tie_rule: TieRule = TieRule.LOWEST_INDEX

    @classmethod
    def make(cls, kind, L: int, alpha=1.0, beta=1.0, gamma=0.0, tie_rule=TieRule.LOWEST_INDEX) -> "PolicySpec":
        return cls(
            PolicyKind(kind),
            _broadcast(alpha, L, "alpha"),
            _broadcast(beta, L, "beta"),
            float(gamma),
            TieRule(tie_rule),
        )

    @property
    def uses_tsls(self) -> bool:
        return self.kind in (PolicyKind.RSG, PolicyKind.RSG_VARIANT)

    @property
    def tsls_mode(self) -> str:
        return "variant" if self.kind is PolicyKind.RSG_VARIANT else "standard"


@dataclass(frozen=True)
class SystemState:
    Q: tuple[int, ...]
    T: tuple[int, ...]
    slot: int = 0

    @classmethod
    def zero(cls, L: int) -> "SystemState":
        return cls((0,) * L, (0,) * L, 0)

    def __post_init__(self) -> None:
        if len(self.Q) != len(self.T):
            raise DimensionMismatch("Q and T lengths differ")
        if any(q < 0 for q in self.Q) or any(t < 0 for t in self.T):
            raise ConfigError("negative queue or counter")
        if any(t > self.slot for t in self.T):
            raise ConfigError("TSLS counter exceeds elapsed slots")


@dataclass(frozen=True)
class SimConfig:
    topology: Topology
    channel: ChannelModel
    arrivals: ArrivalModel
    policy: PolicySpec
    horizon: int = 1_000_000
    warmup: int = 10_000
    seed: int = 0
    replications: int = 8

    @property
    def L(self) -> int:
        return self.topology.L

    @property
    def schedules(self) -> ScheduleSet:
        return self.topology.schedule_set()

    def with_policy(self, **changes) -> "SimConfig":
        return replace(self, policy=replace(self.policy, **changes))

    def with_run(self, **changes) -> "SimConfig":
        return replace(self, **changes)


def _broadcast(x, L: int, name: str) -> tuple[float, ...]:
    if np.isscalar(x):
        return (float(x),) * L
    vals = tuple(float(v) for v in x)
    if len(vals) != L:
        raise DimensionMismatch(f"{name} has {len(vals)} entries, expected L={L}")
    return vals


def validate_config(cfg: SimConfig) -> SimConfig:
    """Check every model invariant and return the canonicalized config."""
    L = cfg.topology.L
    if L < 1:
        raise ConfigError("topology needs at least one link")
    for name, model in (("channel", cfg.channel), ("arrivals", cfg.arrivals)):
        if model.L != L:
            raise DimensionMismatch(f"{name} describes {model.L} links, expected L={L}")
    for name, vec in (("alpha", cfg.policy.alpha), ("beta", cfg.policy.beta)):
        if len(vec) != L:
            raise DimensionMismatch(f"{name} has {len(vec)} entries, expected L={L}")

    try:
        sched = cfg.topology.schedule_set()
    except ValueError as exc:
        if cfg.topology.kind is TopologyKind.CONFLICT_GRAPH:
            loops = [a for a, b in cfg.topology.edges if a == b]
            if loops:
                raise NeverSchedulable(f"link {loops[0]} is never schedulable (self-conflict)") from exc
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    if sched.L != L:
        raise DimensionMismatch(f"schedule vectors have length {sched.L}, expected L={L}")
    missing = sched.never_scheduled()
    if missing:
        raise NeverSchedulable(f"link {missing[0]} appears in no feasible schedule")

    channel = ChannelModel(tuple(d.canonical() for d in cfg.channel.links))
    arrivals = ArrivalModel(tuple(d.canonical() for d in cfg.arrivals.links))
    for l, d in enumerate(channel.links):
        if d.mean <= 0:
            raise ConfigError(f"channel of link {l} has zero mean")
    for l, d in enumerate(arrivals.links):
        if d.mean <= 0:
            raise ConfigError(f"arrival process of link {l} has zero mean")

    p = cfg.policy
    if any(not (a > 0) or not math.isfinite(a) for a in p.alpha):
        raise ConfigError("alpha must be positive and finite")
    if any(not (b >= 0) or not math.isfinite(b) for b in p.beta):
        raise ConfigError("beta must be non-negative and finite")
    if not (p.gamma >= 0) or not math.isfinite(p.gamma):
        raise ConfigError("gamma must be non-negative and finite")
    if p.kind is PolicyKind.ROUND_ROBIN and cfg.topology.kind is not TopologyKind.SINGLE_HOP:
        raise ConfigError("round-robin is only defined on single-hop topologies")

    if cfg.horizon < 1:
        raise ConfigError("horizon must be positive")
    if not 0 <= cfg.warmup < cfg.horizon:
        raise ConfigError(f"warmup {cfg.warmup} must be in [0, horizon={cfg.horizon})")
    if cfg.replications < 1:
        raise ConfigError("replications must be >= 1")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")

    policy = PolicySpec(PolicyKind(p.kind), tuple(map(float, p.alpha)), tuple(map(float, p.beta)),
                        float(p.gamma), TieRule(p.tie_rule))
    return replace(cfg, channel=channel, arrivals=arrivals, policy=policy)
