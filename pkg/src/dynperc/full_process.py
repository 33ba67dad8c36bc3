"""The full process (X_t, eta_t): walker plus refreshing edge environment.

The walker attempts jumps at rate 1 (uniform neighbor, crossing only open
edges); every edge refreshes at rate mu to open with probability p. Two
views are provided: an event-driven simulator that keeps literal refreshes
(needed by the infection bookkeeping downstream), and an exact sparse-free
generator on V x {0,1}^E for small graphs, whose refresh-to-same-state
events are collapsed into flip rates mu*p and mu*(1-p). Both views have the
same (X, eta) law.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .chains import ChainSpec, TooLarge, make_chain
from .graphs import Graph, stationary_distribution
from .seeding import kernel_seed, run_jobs, spawn_rng, split_counts


class DegenerateP(ValueError):
    pass


@dataclass(frozen=True)
class FullParams:
    """Refresh rate mu > 0 and open probability p in [0, 1]."""

    mu: float
    p: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not (0.0 <= self.p <= 1.0):
            raise ValueError("p must lie in [0, 1]")
        if self.mu > 1.0:
            warnings.warn("mu > 1: 1/mu factors in the comparison bounds "
                          "become (1+mu)/mu; results are reported as-is",
                          stacklevel=2)


def sample_environment(g: Graph, p: float, seed=0) -> np.ndarray:
    """i.i.d. Bernoulli(p) open/closed bits, one per edge id."""
    rng = seed if isinstance(seed, np.random.Generator) else spawn_rng(seed)
    return (rng.random(g.n_edges) < p).astype(np.uint8)


def env_mask(env: np.ndarray) -> int:
    return int(sum(1 << e for e, b in enumerate(env) if b))


def mask_env(mask: int, m: int) -> np.ndarray:
    return np.array([(mask >> e) & 1 for e in range(m)], dtype=np.uint8)


WALK_ATTEMPT = 0
EDGE_REFRESH = 1


@dataclass
class FullTrajectory:
    """Time-ordered event log of one full-process run.

    kinds[i] is WALK_ATTEMPT (values[i] = 1 on success) or EDGE_REFRESH
    (values[i] = new bit); positions[i] is the walk position after the event.
    """

    times: np.ndarray
    kinds: np.ndarray
    edges: np.ndarray
    values: np.ndarray
    positions: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("time,kind,edge,open,walk_pos\n")
        for t, k, e, v, x in zip(self.times, self.kinds, self.edges,
                                 self.values, self.positions):
            kind = "walk-attempt" if k == WALK_ATTEMPT else "edge-refresh"
            buf.write(f"{t:.12g},{kind},{e},{v},{x}\n")
        return buf.getvalue()


def simulate(g: Graph, params: FullParams, x0: int, eta0: np.ndarray,
             horizon: float, seed=0) -> FullTrajectory:
    """Exact event-driven run on [0, horizon] with literal refreshes.

    One composite Exp(1 + mu|E|) clock; each event is a walk attempt with
    probability 1/(1 + mu|E|), else a uniformly chosen edge refresh.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else spawn_rng(seed)
    m = g.n_edges
    env = np.array(eta0, dtype=np.uint8).copy()
    if env.shape != (m,):
        raise ValueError("eta0 must have one bit per edge")
    total_rate = 1.0 + params.mu * m
    p_walk = 1.0 / total_rate
    x = int(x0)
    t = 0.0
    times, kinds, edges, values, positions = [], [], [], [], []
    while True:
        t += rng.exponential(1.0 / total_rate)
        if t > horizon:
            break
        if rng.random() < p_walk:
            nbr, eid = g.adjacency[x][rng.integers(g.degrees[x])]
            success = int(env[eid] == 1)
            if success:
                x = nbr
            times.append(t)
            kinds.append(WALK_ATTEMPT)
            edges.append(eid)
            values.append(success)
            positions.append(x)
        else:
            eid = int(rng.integers(m))
            bit = int(rng.random() < params.p)
            env[eid] = bit
            times.append(t)
            kinds.append(EDGE_REFRESH)
            edges.append(eid)
            values.append(bit)
            positions.append(x)
    return FullTrajectory(
        times=np.asarray(times), kinds=np.asarray(kinds, dtype=np.int8),
        edges=np.asarray(edges, dtype=np.int64),
        values=np.asarray(values, dtype=np.int8),
        positions=np.asarray(positions, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# exact generator on V x {0,1}^E

def full_state_count(g: Graph) -> int:
    return g.n << g.n_edges


def full_state_index(x: int, mask: int, m: int) -> int:
    return (x << m) | mask


def full_stationary(g: Graph, params: FullParams) -> np.ndarray:
    """pi x pi_p over states indexed (x << m) | env_mask."""
    m = g.n_edges
    pi_v = stationary_distribution(g)
    p = params.p
    env_w = np.array([
        p ** bin(mask).count("1") * (1.0 - p) ** (m - bin(mask).count("1"))
        for mask in range(1 << m)
    ])
    return np.kron(pi_v, env_w)


def build_full_generator(g: Graph, params: FullParams,
                         exact_state_limit: int = 4096) -> ChainSpec:
    """Sparse-pattern rate matrix of the full process.

    Walk moves x -> y at rate 1/deg(x) when the connecting edge is open;
    each edge flips closed -> open at rate mu*p and open -> closed at rate
    mu*(1-p) (refresh-to-same-state collapsed). Reversible w.r.t. pi x pi_p.
    """
    m = g.n_edges
    n_states = g.n << m
    if n_states > exact_state_limit:
        raise TooLarge(f"|V| * 2^|E| = {n_states} exceeds {exact_state_limit}")
    mu, p = params.mu, params.p
    L = np.zeros((n_states, n_states))
    for x in range(g.n):
        deg = g.degrees[x]
        for mask in range(1 << m):
            s = (x << m) | mask
            for y, eid in g.adjacency[x]:
                if (mask >> eid) & 1:
                    L[s, (y << m) | mask] += 1.0 / deg
            for eid in range(m):
                if (mask >> eid) & 1:
                    L[s, (x << m) | (mask & ~(1 << eid))] += mu * (1.0 - p)
                else:
                    L[s, (x << m) | (mask | (1 << eid))] += mu * p
    np.fill_diagonal(L, L.diagonal() - L.sum(axis=1))
    return make_chain(L, "generator", pi=full_stationary(g, params),
                      name=f"full({g.n}v,{m}e,mu={mu},p={p})")


def exact_hitting_time_full(g: Graph, params: FullParams, target: int) -> np.ndarray:
    """E_{x,eta}[T_{target x {0,1}^E}] for every start, by linear solve."""
    from .chains import hitting_time_to_set

    chain = build_full_generator(g, params)
    m = g.n_edges
    targets = [(target << m) | mask for mask in range(1 << m)]
    return hitting_time_to_set(chain, targets)


def estimate_hitting_time_full(g: Graph, params: FullParams, x0: int,
                               eta0, target: int, n_samples: int, seed=0,
                               workers: int = 1):
    """Monte Carlo mean (and 95% CI half-width) of the walk's hitting time.

    eta0 may be a bit array or the string "stationary" for eta ~ pi_p drawn
    per run.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if target == x0:
        return 0.0, 0.0
    off, nbrs, eids = g.neighbor_arrays()
    m = g.n_edges
    stationary = isinstance(eta0, str) and eta0 == "stationary"
    mask0 = 0 if stationary else env_mask(np.asarray(eta0, dtype=np.uint8))
    chunks = split_counts(n_samples)
    jobs = [
        (off, nbrs, eids, m, params.mu, params.p, x0, mask0,
         1 if stationary else 0, target, cnt, kernel_seed(seed, j))
        for j, cnt in enumerate(chunks)
    ]
    parts = run_jobs(_kernels.full_hitting_batch, jobs, workers)
    samples = np.concatenate(parts)
    mean = float(samples.mean())
    half = 1.96 * float(samples.std(ddof=1)) / np.sqrt(samples.size) if samples.size > 1 else np.inf
    return mean, half


# ---------------------------------------------------------------------------
# the p-tilted hypercube (the environment's own dynamics)

def tilted_hypercube_chain(d: int, p: float, mu: float,
                           exact_state_limit: int = 4096) -> ChainSpec:
    """Product chain on {0,1}^d: coordinate flips 0->1 at mu*p, 1->0 at
    mu*(1-p); stationary Ber(p)^d."""
    if d < 1:
        raise ValueError("d must be >= 1")
    n_states = 1 << d
    if n_states > exact_state_limit:
        raise TooLarge(f"2^{d} exceeds {exact_state_limit}")
    L = np.zeros((n_states, n_states))
    for mask in range(n_states):
        for i in range(d):
            if (mask >> i) & 1:
                L[mask, mask & ~(1 << i)] = mu * (1.0 - p)
            else:
                L[mask, mask | (1 << i)] = mu * p
    np.fill_diagonal(L, -L.sum(axis=1))
    pi = np.array([
        p ** bin(mask).count("1") * (1 - p) ** (d - bin(mask).count("1"))
        for mask in range(n_states)
    ])
    return make_chain(L, "generator", pi=pi, name=f"tilted({d},p={p},mu={mu})")


def _check_tilted_p(p: float):
    if not (0.0 < p < 1.0):
        raise DegenerateP("L-infinity analysis needs p in (0,1)")


def tilted_linf_distance(d: int, p: float, mu: float, t: float) -> float:
    """Exact worst-case |P_t(x,y)/pi_p(y) - 1| from the product formula.

    Per coordinate Q_t(a,a) = e^{-mu t} + (1 - e^{-mu t}) nu(a); the chain is
    reversible so the maximum sits on the diagonal at the lightest state:
    (1 + e^{-mu t} (1-alpha)/alpha)^d - 1 with alpha = min(p, 1-p).
    """
    _check_tilted_p(p)
    alpha = min(p, 1.0 - p)
    r = np.exp(-mu * t) * (1.0 - alpha) / alpha
    return float(np.expm1(d * np.log1p(r)))


def tilted_mixing_time_bound(d: int, p: float, mu: float, delta: float) -> float:
    """t(delta) = (1/mu) log(d (1-alpha)/(alpha log(1+delta))), clamped at 0;
    the exact distance at t(delta) is at most delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if d < 1:
        raise ValueError("d must be >= 1")
    _check_tilted_p(p)
    alpha = min(p, 1.0 - p)
    val = np.log(d * (1.0 - alpha) / (alpha * np.log1p(delta))) / mu
    return float(max(0.0, val))


def tilted_linf_mixing_time(d: int, p: float, mu: float, eps: float) -> float:
    """Exact L-infinity mixing time of the d-coordinate environment."""
    _check_tilted_p(p)
    if eps <= 0:
        raise ValueError("eps must be positive")
    alpha = min(p, 1.0 - p)
    # solve (1 + r)^d - 1 = eps for r = e^{-mu t} (1-alpha)/alpha
    r = np.expm1(np.log1p(eps) / d)
    val = np.log((1.0 - alpha) / (alpha * r)) / mu
    return float(max(0.0, val))
