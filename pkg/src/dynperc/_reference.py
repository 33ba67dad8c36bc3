"""Pure-Python instrumented twin of the infection simulator.

Used in tests as an independent oracle for the compiled kernels: it keeps
per-edge last-examined / last-refreshed timestamps and asserts the
load-bearing equivalence

    real element of e in R  <=>  e examined since e's last refresh

after every event. The alternative reading (copies blocking re-addition of
the real element) breaks this equivalence: the edge would carry information
from before its refresh while its real element is absent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .full_process import FullParams
from .graphs import Graph


@dataclass
class InstrumentedRun:
    taus: np.ndarray
    positions: np.ndarray
    n_events: int
    invariant_checks: int


def simulate_instrumented(g: Graph, params: FullParams, x0: int, rng,
                          n_events: int, eta0=None,
                          r0: str = "empty") -> InstrumentedRun:
    """Event loop with invariant assertions; returns regenerations seen."""
    m = g.n_edges
    mu, p = params.mu, params.p
    env = (rng.random(m) < p).astype(np.uint8) if eta0 is None else np.asarray(eta0, np.uint8).copy()
    real = np.zeros(m, dtype=bool)
    copies = np.zeros(m, dtype=np.int64)
    last_exam = np.full(m, -np.inf)
    last_refresh = np.full(m, -np.inf)
    if r0 == "all-edges":
        real[:] = True
        last_exam[:] = 0.0  # treated as examined at time 0, never refreshed
    x = int(x0)
    t = 0.0
    taus, positions = [], []
    checks = 0
    for _ in range(n_events):
        r_total = int(real.sum() + copies.sum())
        n_free = int((~real).sum())
        total = 1.0 + mu * (r_total + n_free)
        t += rng.exponential(1.0 / total)
        u = rng.random() * total
        if u < 1.0:
            nbr, eid = g.adjacency[x][rng.integers(g.degrees[x])]
            if env[eid] == 1:
                x = nbr
            if not real[eid]:
                real[eid] = True
            else:
                copies[eid] += 1
            last_exam[eid] = t
        elif u < 1.0 + mu * r_total:
            weights = real.astype(np.int64) + copies
            cum = np.cumsum(weights)
            eid = int(np.searchsorted(cum, rng.integers(cum[-1]), side="right"))
            pick = rng.integers(int(weights[eid]))
            if pick < copies[eid]:
                copies[eid] -= 1
            else:
                real[eid] = False
                env[eid] = 1 if rng.random() < p else 0
                last_refresh[eid] = t
            if real.sum() + copies.sum() == 0:
                taus.append(t)
                positions.append(x)
        else:
            free = np.nonzero(~real)[0]
            eid = int(free[rng.integers(free.size)])
            env[eid] = 1 if rng.random() < p else 0
            last_refresh[eid] = t
        # the load-bearing invariant, asserted at every event
        examined_since_refresh = last_exam > last_refresh
        assert np.array_equal(real, examined_since_refresh), (
            f"infection invariant broken at t={t}"
        )
        checks += 1
    return InstrumentedRun(
        taus=np.asarray(taus), positions=np.asarray(positions, dtype=np.int64),
        n_events=n_events, invariant_checks=checks,
    )
