"""Compiled slot loop.

Mirrors the composition of :mod:`rsgsim.dynamics`, :mod:`rsgsim.policies`
and :func:`rsgsim.stats.record_slot` operation for operation (including the
floating-point summation order), so its output is bit-identical to the
pure-Python reference loop in :mod:`rsgsim.engine`.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from rsgsim.stats import (
    H_B, H_BL, H_BLT, H_BLT2, IS_N, IS_SUM, IS_SUM2, LAST_SERVICE, LATE_SLOTS, N_EVENT,
    SLOTS, SUM_DEP, SUM_Q, SUM_Q2, SUM_Q_LATE, SUM_T, SUM_T2, SUM_UNUSED,
)

KIND_MAX_WEIGHT = 0
KIND_ROUND_ROBIN = 1


@njit(cache=True)
def run_chunk(Q, T, slot0, A, C, U, sched, alpha, gbeta, kind, variant, uniform_ties,
              rr, warmup, late_start, bl, beta, ilink, hsum, counts):
    n_slots, L = A.shape
    K = sched.shape[0]
    w = np.empty(L)
    values = np.empty(K)
    s = np.empty(L, dtype=np.int64)
    for n in range(n_slots):
        t = slot0 + n
        # schedule decision from begin-of-slot state and current channel
        if kind == KIND_ROUND_ROBIN:
            k = rr[0] % L
            for l in range(L):
                s[l] = 1 if l == k else 0
            rr[0] = (k + 1) % L
        else:
            for l in range(L):
                w[l] = alpha[l] * Q[l] + gbeta[l] * T[l]
            best = -np.inf
            for k in range(K):
                v = 0.0
                for l in range(L):
                    if sched[k, l] != 0:
                        v += w[l] * C[n, l]
                values[k] = v
                if v > best:
                    best = v
            pick = 0
            if uniform_ties:
                n_best = 0
                for k in range(K):
                    if values[k] == best:
                        n_best += 1
                j = int(U[n] * n_best)
                for k in range(K):
                    if values[k] == best:
                        if j == 0:
                            pick = k
                            break
                        j -= 1
            else:
                for k in range(K):
                    if values[k] == best:
                        pick = k
                        break
            for l in range(L):
                s[l] = sched[pick, l]

        counted = t >= warmup
        late = t >= late_start
        for l in range(L):
            q = Q[l]
            tl = T[l]
            a = A[n, l]
            offered = C[n, l] * s[l]
            backlog = q + a
            dep = backlog if backlog < offered else offered
            event = offered > 0
            if counted:
                ilink[l, SUM_Q] += q
                ilink[l, SUM_Q2] += q * q
                ilink[l, SUM_T] += tl
                ilink[l, SUM_T2] += tl * tl
                ilink[l, SUM_UNUSED] += offered - dep
                ilink[l, SUM_DEP] += dep
                if late:
                    ilink[l, SUM_Q_LATE] += q
                if event:
                    ilink[l, N_EVENT] += 1
                    hsum[H_BL] += bl[l]
                    hsum[H_BLT] += bl[l] * tl
                    hsum[H_BLT2] += bl[l] * tl * tl
                    hsum[H_B] += beta[l]
                    if ilink[l, LAST_SERVICE] >= 0:
                        gap = t - ilink[l, LAST_SERVICE]
                        ilink[l, IS_N] += 1
                        ilink[l, IS_SUM] += gap
                        ilink[l, IS_SUM2] += gap * gap
                    ilink[l, LAST_SERVICE] = t
            Q[l] = backlog - dep
            if event:
                T[l] = 0
            elif variant and q == 0:
                pass
            else:
                T[l] = tl + 1
        if counted:
            counts[SLOTS] += 1
            if late:
                counts[LATE_SLOTS] += 1
