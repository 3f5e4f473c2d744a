"""Streaming steady-state statistics.

Accumulators are raw integer/float sums in numpy arrays so the compiled
simulation kernel and the pure-Python reference loop can fill the same
layout; :func:`finalize` turns them into means.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# per-link integer accumulator columns
SUM_Q, SUM_Q2, SUM_T, SUM_T2, N_EVENT, SUM_UNUSED, SUM_DEP, IS_N, IS_SUM, IS_SUM2, LAST_SERVICE, SUM_Q_LATE = range(12)
N_ICOLS = 12
# H-set accumulators: sum over served links of beta*lam, beta*lam*T, beta*lam*T^2, beta
H_BL, H_BLT, H_BLT2, H_B = range(4)
# slot counters
SLOTS, LATE_SLOTS = range(2)

LEMMA1_MIN_SAMPLES = 100


class InterServiceRecorder:
    """Per-link inter-service samples, a view onto a :class:`StatsAccumulator`.

    The first service event after warmup only opens an interval; samples
    start with the second one, so every sample satisfies I >= 1.
    """

    def __init__(self, acc: "StatsAccumulator") -> None:
        self._acc = acc

    @property
    def count(self) -> np.ndarray:
        return self._acc.ilink[:, IS_N]

    @property
    def sum(self) -> np.ndarray:
        return self._acc.ilink[:, IS_SUM]

    @property
    def sum_sq(self) -> np.ndarray:
        return self._acc.ilink[:, IS_SUM2]

    @property
    def last_service_slot(self) -> list[int | None]:
        return [None if v < 0 else int(v) for v in self._acc.ilink[:, LAST_SERVICE]]


@dataclass
class StatsAccumulator:
    beta_lambda: np.ndarray
    beta: np.ndarray
    warmup: int = 0
    late_start: int = 0
    ilink: np.ndarray = field(init=False)
    hsum: np.ndarray = field(init=False)
    counts: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.beta_lambda = np.asarray(self.beta_lambda, dtype=np.float64)
        self.beta = np.asarray(self.beta, dtype=np.float64)
        L = len(self.beta)
        self.ilink = np.zeros((L, N_ICOLS), dtype=np.int64)
        self.ilink[:, LAST_SERVICE] = -1
        self.hsum = np.zeros(4, dtype=np.float64)
        self.counts = np.zeros(2, dtype=np.int64)

    @classmethod
    def for_run(cls, lam, beta, warmup: int, horizon: int) -> "StatsAccumulator":
        lam = np.asarray(lam, dtype=np.float64)
        beta = np.asarray(beta, dtype=np.float64)
        return cls(beta * lam, beta, warmup, warmup + (horizon - warmup) // 2)

    @property
    def inter_service(self) -> InterServiceRecorder:
        return InterServiceRecorder(self)


def record_slot(
    acc: StatsAccumulator,
    slot: int,
    Q: Sequence[int],
    T: Sequence[int],
    service_event: Sequence[int],
    unused: Sequence[int],
    departed: Sequence[int],
) -> None:
    """Fold one counted slot into ``acc``.

    ``Q`` and ``T`` are the begin-of-slot values; the H-set of the slot is the
    set of links with a service event.
    """
    if slot < acc.warmup:
        raise ValueError(f"slot {slot} precedes warmup boundary {acc.warmup}")
    late = slot >= acc.late_start
    for l in range(len(Q)):
        row = acc.ilink[l]
        q, t = int(Q[l]), int(T[l])
        row[SUM_Q] += q
        row[SUM_Q2] += q * q
        row[SUM_T] += t
        row[SUM_T2] += t * t
        row[SUM_UNUSED] += unused[l]
        row[SUM_DEP] += departed[l]
        if late:
            row[SUM_Q_LATE] += q
        if service_event[l]:
            row[N_EVENT] += 1
            bl = acc.beta_lambda[l]
            acc.hsum[H_BL] += bl
            acc.hsum[H_BLT] += bl * t
            acc.hsum[H_BLT2] += bl * t * t
            acc.hsum[H_B] += acc.beta[l]
            if row[LAST_SERVICE] >= 0:
                gap = slot - row[LAST_SERVICE]
                row[IS_N] += 1
                row[IS_SUM] += gap
                row[IS_SUM2] += gap * gap
            row[LAST_SERVICE] = slot
    acc.counts[SLOTS] += 1
    if late:
        acc.counts[LATE_SLOTS] += 1


@dataclass
class RunStats:
    """Steady-state estimates of one replication.

    Per-link inter-service fields are NaN for links without samples.
    """

    lam: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    slots: int
    mean_q: np.ndarray
    std_q: np.ndarray
    mean_t: np.ndarray
    mean_t2: np.ndarray
    n_i: np.ndarray
    e_i: np.ndarray
    e_i2: np.ndarray
    norm_i2: np.ndarray
    var_i: np.ndarray
    p_service: np.ndarray
    mean_unused: np.ndarray
    mean_departed: np.ndarray
    lemma1_residual: np.ndarray
    sum_alpha_meanq: float
    total_mean_q: float
    total_mean_t: float
    late_total_mean_q: float
    regularity_metric: float
    weighted_norm_i2: float
    h_bl: float
    h_blt: float
    h_blt2: float
    h_beta: float
    # filled in by finalize; relative residuals
    lemma1_max: float = float("nan")
    lemma2_r1: float = float("nan")
    lemma2_r2: float = float("nan")

    @property
    def L(self) -> int:
        return len(self.mean_q)

    @property
    def sum_beta_lambda(self) -> float:
        return float(np.sum(self.beta * self.lam))

    @property
    def lemma1_residual_max(self) -> float:
        ok = self.n_i >= LEMMA1_MIN_SAMPLES
        return float(np.max(self.lemma1_residual[ok])) if ok.any() else float("nan")

    def lemma2(self) -> "Lemma2Residuals":
        return lemma2_residuals(self, self.lam, self.beta)


def finalize(acc: StatsAccumulator, lam, alpha, beta) -> RunStats:
    n = int(acc.counts[SLOTS])
    if n < 1:
        raise ValueError("no counted slots to finalize")
    lam = np.asarray(lam, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    I = acc.ilink.astype(np.float64)

    mean_q = I[:, SUM_Q] / n
    std_q = np.sqrt(np.maximum(I[:, SUM_Q2] / n - mean_q**2, 0.0))
    mean_t = I[:, SUM_T] / n
    mean_t2 = I[:, SUM_T2] / n

    n_i = acc.ilink[:, IS_N].copy()
    with np.errstate(invalid="ignore", divide="ignore"):
        e_i = np.where(n_i > 0, I[:, IS_SUM] / n_i, np.nan)
        e_i2 = np.where(n_i > 0, I[:, IS_SUM2] / n_i, np.nan)
        norm_i2 = e_i2 / e_i**2
        var_i = np.maximum(e_i2 - e_i**2, 0.0)
        lemma1 = np.abs(mean_t - 0.5 * (e_i2 / e_i - 1.0)) / np.maximum(mean_t, 1.0)

    rho = lam * e_i
    weighted = beta * rho * norm_i2
    weighted_norm_i2 = float(np.sum(weighted[beta > 0])) if (beta > 0).any() else 0.0

    late_n = int(acc.counts[LATE_SLOTS])
    late_total = float(I[:, SUM_Q_LATE].sum() / late_n) if late_n else float("nan")

    run = RunStats(
        lam=lam,
        alpha=alpha,
        beta=beta,
        slots=n,
        mean_q=mean_q,
        std_q=std_q,
        mean_t=mean_t,
        mean_t2=mean_t2,
        n_i=n_i,
        e_i=e_i,
        e_i2=e_i2,
        norm_i2=norm_i2,
        var_i=var_i,
        p_service=I[:, N_EVENT] / n,
        mean_unused=I[:, SUM_UNUSED] / n,
        mean_departed=I[:, SUM_DEP] / n,
        lemma1_residual=lemma1,
        sum_alpha_meanq=float(np.dot(alpha, mean_q)),
        total_mean_q=float(I[:, SUM_Q].sum() / n),
        total_mean_t=float(I[:, SUM_T].sum() / n),
        late_total_mean_q=late_total,
        regularity_metric=float(np.sum(beta * lam * mean_t)),
        weighted_norm_i2=weighted_norm_i2,
        h_bl=float(acc.hsum[H_BL] / n),
        h_blt=float(acc.hsum[H_BLT] / n),
        h_blt2=float(acc.hsum[H_BLT2] / n),
        h_beta=float(acc.hsum[H_B] / n),
    )
    res = lemma2_residuals(run, lam, beta)
    run.lemma1_max = run.lemma1_residual_max
    run.lemma2_r1 = res.r1_rel
    run.lemma2_r2 = res.r2_rel
    return run


@dataclass(frozen=True)
class Lemma2Residuals:
    r1: float
    r2: float
    r1_rel: float
    r2_rel: float


def _rel(a: float, lhs: float, rhs: float) -> float:
    scale = max(abs(lhs), abs(rhs))
    return a / scale if scale > 0 else a


def lemma2_residuals(run: RunStats, lam, beta) -> Lemma2Residuals:
    """Residuals of the first- and second-moment TSLS identities.

    First:  E[sum_H bl*T] = sum(bl) - E[sum_H bl]
    Second: 2*sum(bl*meanT) = sum(bl) - E[sum_H bl] + E[sum_H bl*T^2]
    """
    if run.slots < 1:
        raise ValueError("no counted slots")
    bl = np.asarray(beta, dtype=np.float64) * np.asarray(lam, dtype=np.float64)
    total = float(bl.sum())
    lhs1, rhs1 = run.h_blt, total - run.h_bl
    lhs2 = 2.0 * float(np.sum(bl * run.mean_t))
    rhs2 = total - run.h_bl + run.h_blt2
    r1 = abs(lhs1 - rhs1)
    r2 = abs(lhs2 - rhs2)
    return Lemma2Residuals(r1, r2, _rel(r1, lhs1, rhs1), _rel(r2, lhs2, rhs2))
