"""Seeded simulation loop, replications, and experiment drivers.

Seed splitting
--------------
Replication ``r`` of a config with master seed ``m`` runs with seed
``SeedSequence(m, spawn_key=(r,)).generate_state(1, uint64)[0]``.
Inside a replication with seed ``s``, each (purpose, link) pair gets its own
PCG64 stream seeded by ``SeedSequence(s, spawn_key=(purpose, link))`` with
purpose 0 = arrivals, 1 = channel, 2 = tie-breaking (link 0 only). Tie-break
draws therefore never shift the arrival or channel sequences, and two
policies run with the same seeds see identical traffic and channels.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from rsgsim import bounds
from rsgsim._kernel import KIND_MAX_WEIGHT, KIND_ROUND_ROBIN, run_chunk
from rsgsim.dynamics import advance_slot
from rsgsim.model import ConfigError, PolicyKind, SimConfig, SystemState, TieRule, validate_config
from rsgsim.policies import RoundRobinState, decide
from rsgsim.stats import RunStats, StatsAccumulator, finalize, record_slot

ARRIVAL, CHANNEL, TIE = 0, 1, 2
CHUNK = 1 << 16


def replication_seed(master: int, r: int) -> int:
    return int(np.random.SeedSequence(master, spawn_key=(r,)).generate_state(1, np.uint64)[0])


def replication_seeds(cfg: SimConfig) -> list[int]:
    return [replication_seed(cfg.seed, r) for r in range(cfg.replications)]


def stream(seed: int, purpose: int, link: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(purpose, link))))


def _accumulator(cfg: SimConfig) -> StatsAccumulator:
    return StatsAccumulator.for_run(cfg.arrivals.rates, cfg.policy.beta, cfg.warmup, cfg.horizon)


def _finalize(acc: StatsAccumulator, cfg: SimConfig) -> RunStats:
    return finalize(acc, cfg.arrivals.rates, cfg.policy.alpha, cfg.policy.beta)


def run_replication(cfg: SimConfig, seed: int, validated: bool = False) -> RunStats:
    """Simulate ``cfg.horizon`` slots with the compiled kernel."""
    if not validated:
        cfg = validate_config(cfg)
    L = cfg.L
    p = cfg.policy
    sched = np.ascontiguousarray(cfg.schedules.array, dtype=np.int64)
    arr_rng = [stream(seed, ARRIVAL, l) for l in range(L)]
    ch_rng = [stream(seed, CHANNEL, l) for l in range(L)]
    tie_rng = stream(seed, TIE)
    uniform_ties = p.tie_rule is TieRule.SEEDED_UNIFORM and p.kind is not PolicyKind.ROUND_ROBIN

    alpha = np.asarray(p.alpha, dtype=np.float64)
    beta = np.asarray(p.beta, dtype=np.float64)
    gbeta = p.gamma * beta if p.uses_tsls else np.zeros(L)
    kind = KIND_ROUND_ROBIN if p.kind is PolicyKind.ROUND_ROBIN else KIND_MAX_WEIGHT
    a_max, c_max = cfg.arrivals.a_max, cfg.channel.c_max

    acc = _accumulator(cfg)
    Q = np.zeros(L, dtype=np.int64)
    T = np.zeros(L, dtype=np.int64)
    rr = np.zeros(1, dtype=np.int64)
    empty_u = np.zeros(0)
    slot = 0
    while slot < cfg.horizon:
        n = min(CHUNK, cfg.horizon - slot)
        A = np.empty((n, L), dtype=np.int64)
        C = np.empty((n, L), dtype=np.int64)
        for l in range(L):
            A[:, l] = cfg.arrivals.links[l].sample(arr_rng[l], n)
            C[:, l] = cfg.channel.links[l].sample(ch_rng[l], n)
        assert A.max() <= a_max and C.max() <= c_max
        U = tie_rng.random(n) if uniform_ties else empty_u
        run_chunk(Q, T, slot, A, C, U, sched, alpha, gbeta, kind, p.kind is PolicyKind.RSG_VARIANT,
                  uniform_ties, rr, cfg.warmup, acc.late_start, acc.beta_lambda, acc.beta,
                  acc.ilink, acc.hsum, acc.counts)
        slot += n
    return _finalize(acc, cfg)


def reference_replication(cfg: SimConfig, seed: int) -> RunStats:
    """Same run as :func:`run_replication`, slot by slot in pure Python.

    Slow; kept as the executable definition the compiled kernel is checked
    against.
    """
    cfg = validate_config(cfg)
    L = cfg.L
    p = cfg.policy
    sched = cfg.schedules
    arr_rng = [stream(seed, ARRIVAL, l) for l in range(L)]
    ch_rng = [stream(seed, CHANNEL, l) for l in range(L)]
    tie_rng = stream(seed, TIE) if p.tie_rule is TieRule.SEEDED_UNIFORM else None
    acc = _accumulator(cfg)
    state = SystemState.zero(L)
    rr = RoundRobinState()
    for t in range(cfg.horizon):
        a = [int(cfg.arrivals.links[l].sample(arr_rng[l], 1)[0]) for l in range(L)]
        c = [int(cfg.channel.links[l].sample(ch_rng[l], 1)[0]) for l in range(L)]
        s, rr = decide(p, state, c, sched, rr, tie_rng)
        nxt, dep, unused, event = advance_slot(state, a, c, s, p.tsls_mode)
        if t >= cfg.warmup:
            record_slot(acc, t, state.Q, state.T, event, unused, dep)
        state = nxt
    return _finalize(acc, cfg)


# ---------------------------------------------------------------------------
# replications and aggregation
# ---------------------------------------------------------------------------

AGG_FIELDS = [f.name for f in dataclasses.fields(RunStats) if f.name not in ("lam", "alpha", "beta", "slots")]


@dataclass
class AggregateStats:
    """Per-field mean over replications; ``stderr`` is None for a single run."""

    runs: list[RunStats]
    mean: dict
    stderr: dict | None

    @property
    def n(self) -> int:
        return len(self.runs)

    def se(self, name: str):
        if self.stderr is None:
            return np.nan if np.ndim(self.mean[name]) == 0 else np.full_like(self.mean[name], np.nan)
        return self.stderr[name]

    def __getattr__(self, name: str):
        # convenience: agg.regularity_metric -> mean value
        mean = self.__dict__.get("mean")
        if mean is not None and name in mean:
            return mean[name]
        raise AttributeError(name)


def aggregate(runs: list[RunStats]) -> AggregateStats:
    if not runs:
        raise ValueError("nothing to aggregate")
    mean, se = {}, {}
    for name in AGG_FIELDS:
        vals = np.array([getattr(r, name) for r in runs], dtype=np.float64)
        m = vals.mean(axis=0)
        mean[name] = float(m) if np.ndim(m) == 0 else m
        if len(runs) > 1:
            e = vals.std(axis=0, ddof=1) / np.sqrt(len(runs))
            # the mean of identical values can be off by an ulp; report exact zero spread
            e = np.where(np.ptp(vals, axis=0) == 0, 0.0, e)
            se[name] = float(e) if np.ndim(e) == 0 else e
    return AggregateStats(list(runs), mean, se if len(runs) > 1 else None)


def _run_one(args):
    cfg, seed = args
    return run_replication(cfg, seed, validated=True)


def run_many(cfg: SimConfig, seeds: list[int], jobs: int = 1) -> list[RunStats]:
    cfg = validate_config(cfg)
    if jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_one, [(cfg, s) for s in seeds]))
    return [run_replication(cfg, s, validated=True) for s in seeds]


def run_experiment(cfg: SimConfig, jobs: int = 1, seeds: list[int] | None = None) -> AggregateStats:
    """Run ``cfg.replications`` replications (or the given seeds) and aggregate,
    reducing in replication order."""
    cfg = validate_config(cfg)
    return aggregate(run_many(cfg, seeds if seeds is not None else replication_seeds(cfg), jobs))


# ---------------------------------------------------------------------------
# experiment drivers
# ---------------------------------------------------------------------------


@dataclass
class SweepRow:
    gamma: float
    stats: AggregateStats
    lower_bound: float
    upper_bound_measured: float
    upper_bound_conservative: float


def bounds_for(cfg: SimConfig, measured_H_beta: float | None = None) -> dict:
    """Analytic quantities for a config; upper bounds are NaN when undefined."""
    cfg = validate_config(cfg)
    p = cfg.policy
    lam = cfg.arrivals.rates
    sched = cfg.schedules
    margin = bounds.capacity_margin(lam, sched, cfg.channel)
    B = bounds.drift_constant_B(p.alpha, p.beta, p.gamma, cfg.channel, cfg.arrivals)
    out = {
        "additive_eps": margin.additive_eps,
        "multiplicative_eps": margin.multiplicative_eps,
        "B": B,
        "queue_bound": bounds.queue_bound(B, margin.additive_eps) if margin.additive_eps > 0 else np.nan,
        "lower_bound": bounds.regularity_lower_bound(lam, p.beta, sched) if np.dot(p.beta, lam) > 0 else np.nan,
        "upper_bound_conservative": np.nan,
        "upper_bound_measured": np.nan,
    }
    if p.gamma > 0 and margin.multiplicative_eps > 0:
        args = (lam, p.alpha, p.beta, p.gamma, cfg.channel, cfg.arrivals, margin.multiplicative_eps)
        out["upper_bound_conservative"] = bounds.regularity_upper_bound(*args, 0.0)
        if measured_H_beta is not None:
            h = min(max(measured_H_beta, 0.0), float(np.sum(p.beta)))
            out["upper_bound_measured"] = bounds.regularity_upper_bound(*args, h)
    return out


def sweep_gamma(cfg: SimConfig, gammas, jobs: int = 1) -> list[SweepRow]:
    """One experiment per gamma on common seeds, with bound columns.

    An MWS base config is swept as RSG (gamma=0 reproduces MWS exactly).
    """
    gammas = [float(g) for g in gammas]
    if any(g < 0 for g in gammas):
        raise ConfigError("gamma values must be non-negative")
    base = validate_config(cfg)
    kind = PolicyKind.RSG if base.policy.kind is PolicyKind.MWS else base.policy.kind
    seeds = replication_seeds(base)
    rows = []
    for g in gammas:
        c = base.with_policy(kind=kind, gamma=g)
        agg = run_experiment(c, jobs=jobs, seeds=seeds)
        b = bounds_for(c, measured_H_beta=agg.mean["h_beta"])
        rows.append(SweepRow(g, agg, b["lower_bound"], b["upper_bound_measured"], b["upper_bound_conservative"]))
    return rows


@dataclass
class Comparison:
    a: AggregateStats
    b: AggregateStats
    delta_mean: dict
    delta_se: dict | None


def check_same_system(cfg_a: SimConfig, cfg_b: SimConfig) -> None:
    a = replace(validate_config(cfg_a), policy=None)
    b = replace(validate_config(cfg_b), policy=None)
    if a != b:
        raise ConfigError("compared configs must differ only in their policy")


def compare(cfg_a: SimConfig, cfg_b: SimConfig, jobs: int = 1) -> Comparison:
    """Paired comparison of two policies on common random numbers.

    Deltas are ``b - a`` per replication, so their standard errors reflect
    the pairing.
    """
    check_same_system(cfg_a, cfg_b)
    seeds = replication_seeds(validate_config(cfg_a))
    agg_a = run_experiment(cfg_a, jobs=jobs, seeds=seeds)
    agg_b = run_experiment(cfg_b, jobs=jobs, seeds=seeds)
    dm, ds = {}, {}
    for name in AGG_FIELDS:
        d = np.array([getattr(rb, name) for rb in agg_b.runs], dtype=np.float64) - \
            np.array([getattr(ra, name) for ra in agg_a.runs], dtype=np.float64)
        m = d.mean(axis=0)
        dm[name] = float(m) if np.ndim(m) == 0 else m
        if len(seeds) > 1:
            e = d.std(axis=0, ddof=1) / np.sqrt(len(seeds))
            ds[name] = float(e) if np.ndim(e) == 0 else e
    return Comparison(agg_a, agg_b, dm, ds if len(seeds) > 1 else None)
