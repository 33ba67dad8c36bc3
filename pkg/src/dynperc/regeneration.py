"""Infected-edge bookkeeping, regeneration times, and the induced chain.

A walk attempt infects the examined edge: its "real element" enters the
multiset R if absent, otherwise a copy is added. R loses a uniform element
(counting copies) at rate mu|R|; losing the real element of an edge
refreshes that edge, and edges whose real element is absent refresh on
independent rate-mu clocks, so every edge refreshes at total rate mu. When
R empties, every examined edge has been refreshed since its last
examination, hence the environment is Ber(p)-product and independent of the
walk position. The walk positions Y_i at the successive emptying times
tau_i form a Markov chain with the degree-biased stationary law.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .chains import TooLarge
from .full_process import FullParams, env_mask
from .graphs import Graph
from .seeding import kernel_seed, run_jobs, split_counts


@dataclass(frozen=True)
class InfectionState:
    """Snapshot of R: per-edge real-element flag and copy count."""

    real_present: np.ndarray
    copy_count: np.ndarray

    @property
    def total(self) -> int:
        return int(self.real_present.sum() + self.copy_count.sum())


@dataclass
class RegenerationTrace:
    """tau_0 = 0 < tau_1 < ... and the walk positions Y_i = X_{tau_i}."""

    taus: np.ndarray
    positions: np.ndarray

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.taus)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("i,tau,spacing,position\n")
        prev = None
        for i, (t, x) in enumerate(zip(self.taus, self.positions)):
            sp = "" if prev is None else f"{t - prev:.12g}"
            buf.write(f"{i},{t:.12g},{sp},{x}\n")
            prev = t
        return buf.getvalue()


def simulate_with_infection(g: Graph, params: FullParams, x0: int,
                            eta0=None, r0: str = "empty",
                            n_regens: int = 1, seed=0) -> RegenerationTrace:
    """One trajectory recorded at its first n_regens regeneration times.

    eta0=None draws eta_0 ~ pi_p (required for the stationarity claims at
    tau_0 = 0); r0 is "empty" or "all-edges". With r0="all-edges" the trace
    has no tau_0 entry: the first row is the first emptying.
    """
    if n_regens < 1:
        raise ValueError("n_regens must be >= 1")
    if r0 not in ("empty", "all-edges"):
        raise ValueError("r0 must be 'empty' or 'all-edges'")
    off, nbrs, eids = g.neighbor_arrays()
    m = g.n_edges
    if eta0 is None:
        sample_env, env0 = 1, np.zeros(m, dtype=np.uint8)
    else:
        sample_env, env0 = 0, np.asarray(eta0, dtype=np.uint8).copy()
    taus, pos = _kernels.regen_trace(
        off, nbrs, eids, m, params.mu, params.p, x0, sample_env, env0,
        n_regens, 1 if r0 == "all-edges" else 0, kernel_seed(seed),
    )
    return RegenerationTrace(taus=taus, positions=pos)


def spacing_samples(g: Graph, params: FullParams, n_spacings: int, seed=0,
                    workers: int = 1) -> np.ndarray:
    """n_spacings i.i.d. regeneration spacings, batched over workers.

    Spacings are functionals of the autonomous |R| birth-death chain, so
    concatenating independent traces preserves the law.
    """
    off, nbrs, eids = g.neighbor_arrays()
    m = g.n_edges
    env0 = np.zeros(m, dtype=np.uint8)
    chunks = split_counts(n_spacings)
    jobs = [
        (off, nbrs, eids, m, params.mu, params.p, 0, 1, env0, cnt, 0,
         kernel_seed(seed, j))
        for j, cnt in enumerate(chunks)
    ]
    parts = run_jobs(_kernels.regen_trace, jobs, workers)
    return np.concatenate([np.diff(taus) for taus, _ in parts])


def first_regeneration_from_all_infected(g: Graph, params: FullParams,
                                         seed=0, n_samples: int = 1000,
                                         workers: int = 1):
    """Mean (and 95% CI half-width) of the first emptying time from |R_0| = |E|."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    off, nbrs, eids = g.neighbor_arrays()
    m = g.n_edges
    chunks = split_counts(n_samples)
    jobs = [
        (off, nbrs, eids, m, params.mu, params.p, 0, cnt, kernel_seed(seed, j))
        for j, cnt in enumerate(chunks)
    ]
    parts = run_jobs(_kernels.first_regen_batch, jobs, workers)
    samples = np.concatenate(parts)
    mean = float(samples.mean())
    half = 1.96 * float(samples.std(ddof=1)) / np.sqrt(samples.size) if samples.size > 1 else np.inf
    return mean, half


def aux_chain_sample(g: Graph, params: FullParams, x0: int, n_steps: int,
                     seed=0) -> np.ndarray:
    """Y_1..Y_n from one trajectory started at (x0, eta ~ pi_p, R = {})."""
    trace = simulate_with_infection(g, params, x0, n_regens=n_steps, seed=seed)
    return trace.positions[1:]


def estimate_aux_transition(g: Graph, params: FullParams,
                            n_samples_per_state: int, seed=0, workers: int = 1):
    """Empirical one-step matrix of the regeneration chain with 95% CIs.

    Restart protocol: from each x, fresh eta ~ pi_p and R = {}, run to the
    first regeneration, record the position. Returns (P_hat, low, high)
    where the bounds are per-entry Wilson intervals.
    """
    off, nbrs, eids = g.neighbor_arrays()
    m = g.n_edges
    n = g.n
    counts = np.zeros((n, n), dtype=np.int64)
    jobs = []
    meta = []
    for x in range(n):
        chunks = split_counts(n_samples_per_state, 8)
        for j, cnt in enumerate(chunks):
            jobs.append((off, nbrs, eids, m, params.mu, params.p, x, cnt,
                         kernel_seed(seed, x, j)))
            meta.append(x)
    parts = run_jobs(_kernels.tau1_batch, jobs, workers)
    for x, (pos, _, _) in zip(meta, parts):
        counts[x] += np.bincount(pos, minlength=n)
    total = counts.sum(axis=1, keepdims=True).astype(float)
    p_hat = counts / total
    low, high = _wilson(counts, total)
    return p_hat, low, high


def _wilson(k, n, z: float = 1.96):
    p = k / n
    denom = 1.0 + z**2 / n
    center = (p + z**2 / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denom
    return center - half, center + half


def regeneration_independence_test(g: Graph, params: FullParams,
                                   n_samples: int, seed=0, workers: int = 1,
                                   joint_limit: int = 64):
    """Empirical joint law of (X, eta) at the first regeneration.

    Returns (tv_marginal, tv_product_gap): the TV distance of the
    environment marginal from Ber(p)-product, and the TV distance of the
    joint from the product of its own marginals.
    """
    m = g.n_edges
    if (g.n << m) > joint_limit:
        raise TooLarge(f"joint law has {g.n << m} cells > {joint_limit}")
    off, nbrs, eids = g.neighbor_arrays()
    chunks = split_counts(n_samples)
    jobs = [
        (off, nbrs, eids, m, params.mu, params.p, 0, cnt, kernel_seed(seed, j))
        for j, cnt in enumerate(chunks)
    ]
    parts = run_jobs(_kernels.tau1_batch, jobs, workers)
    joint = np.zeros((g.n, 1 << m))
    for pos, envs, _ in parts:
        np.add.at(joint, (pos, envs), 1.0)
    joint /= joint.sum()
    marg_x = joint.sum(axis=1)
    marg_env = joint.sum(axis=0)
    p = params.p
    pi_p = np.array([
        p ** bin(mask).count("1") * (1 - p) ** (m - bin(mask).count("1"))
        for mask in range(1 << m)
    ])
    tv_marginal = 0.5 * float(np.abs(marg_env - pi_p).sum())
    tv_product = 0.5 * float(np.abs(joint - np.outer(marg_x, marg_env)).sum())
    return tv_marginal, tv_product


def infection_occupancy_counts(g: Graph, params: FullParams, n_events: int,
                               seed=0, burn_in: float = 100.0,
                               sample_dt: float = None, max_level: int = None):
    """|R| occupancy sampled on a coarse time grid (near-independent draws);
    its stationary law is Poisson(1/mu)."""
    if sample_dt is None:
        sample_dt = 10.0 / params.mu
    if max_level is None:
        max_level = max(8, int(4.0 / params.mu))
    off, nbrs, eids = g.neighbor_arrays()
    counts = _kernels.infection_occupancy(
        off, nbrs, eids, g.n_edges, params.mu, params.p, 0, burn_in,
        sample_dt, n_events, max_level, kernel_seed(seed),
    )
    return counts


def edge_refresh_counts(g: Graph, params: FullParams, horizon: float, seed=0):
    """Observed refresh events per edge on [0, horizon] (rate-mu check)."""
    off, nbrs, eids = g.neighbor_arrays()
    return _kernels.refresh_counts(off, nbrs, eids, g.n_edges, params.mu,
                                   params.p, 0, horizon, kernel_seed(seed))


def regen_time_to_target(g: Graph, params: FullParams, x0: int, target: int,
                         n_samples: int, seed=0, workers: int = 1,
                         max_regens: int = 10**7):
    """Per-run (#regenerations, time) until the walk sits at `target` at a
    regeneration time; the Wald cross-estimator input."""
    off, nbrs, eids = g.neighbor_arrays()
    chunks = split_counts(n_samples)
    jobs = [
        (off, nbrs, eids, g.n_edges, params.mu, params.p, x0, target,
         max_regens, cnt, kernel_seed(seed, j))
        for j, cnt in enumerate(chunks)
    ]
    parts = run_jobs(_kernels.regen_to_target, jobs, workers)
    ns = np.concatenate([n for n, _ in parts])
    ts = np.concatenate([t for _, t in parts])
    return ns, ts
