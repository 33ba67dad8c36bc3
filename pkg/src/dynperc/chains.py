"""Exact finite-state Markov chain analytics.

A ChainSpec wraps either a rate matrix (kind="generator", rows sum to 0) or a
transition matrix (kind="transition", rows sum to 1) together with its
stationary distribution. All quantities below (Dirichlet forms, spectral
gaps, hitting and commute times, mixing times) are computed exactly by dense
linear algebra; intended for state spaces up to a few thousand states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


class ChainError(Exception):
    pass


class NotIrreducible(ChainError):
    pass


class TooLarge(ChainError):
    pass


class SingularSystem(ChainError):
    pass


class SameState(ChainError):
    pass


class NotReversible(ChainError):
    pass


DEFAULT_ATOL = 1e-10
EXACT_STATE_LIMIT = 4096


@dataclass(frozen=True)
class ChainSpec:
    """Finite Markov chain: matrix + stationary distribution.

    kind "generator": matrix is a rate matrix L (off-diagonal >= 0, zero row
    sums). kind "transition": matrix is row-stochastic P. pi satisfies
    pi L = 0 resp. pi P = pi; the reversible flag records detailed balance.
    """

    kind: str
    matrix: np.ndarray = field(repr=False)
    pi: np.ndarray = field(repr=False)
    reversible: bool
    name: str = ""

    @property
    def n(self) -> int:
        return len(self.pi)

    def generator(self) -> np.ndarray:
        """Rate-matrix view; a transition chain runs at unit jump rate."""
        if self.kind == "generator":
            return self.matrix
        return self.matrix - np.eye(self.n)


def make_chain(matrix, kind: str, pi=None, name: str = "", atol: float = DEFAULT_ATOL) -> ChainSpec:
    """Validate and wrap a matrix as a ChainSpec.

    Checks row sums, sign constraints, stationarity of pi (computed if not
    given) and detects reversibility via detailed balance.
    """
    M = np.array(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ChainError("matrix must be square")
    n = M.shape[0]
    scale = max(1.0, float(np.abs(M).max()))
    off = M - np.diag(np.diag(M))
    if kind == "generator":
        if off.min() < -atol * scale:
            raise ChainError("negative off-diagonal rate")
        if np.abs(M.sum(axis=1)).max() > atol * scale * n:
            raise ChainError("generator rows must sum to 0")
    elif kind == "transition":
        if M.min() < -atol:
            raise ChainError("negative transition probability")
        if np.abs(M.sum(axis=1) - 1.0).max() > atol * n:
            raise ChainError("transition rows must sum to 1")
    else:
        raise ChainError(f"unknown kind {kind!r}")
    if pi is None:
        pi = stationary_of(M, kind)
    pi = np.array(pi, dtype=float)
    if pi.shape != (n,) or pi.min() < -atol or abs(pi.sum() - 1.0) > 1e-9:
        raise ChainError("invalid stationary distribution")
    residual = pi @ M if kind == "generator" else pi @ M - pi
    if np.abs(residual).max() > 1e-8 * scale:
        raise ChainError("pi is not stationary for the matrix")
    balance = pi[:, None] * M - (pi[:, None] * M).T
    reversible = bool(np.abs(balance).max() <= 1e-10 * scale)
    return ChainSpec(kind=kind, matrix=M, pi=pi, reversible=reversible, name=name)


def stationary_of(matrix: np.ndarray, kind: str) -> np.ndarray:
    """Stationary distribution by solving the singular linear system."""
    n = matrix.shape[0]
    A = matrix.T if kind == "generator" else matrix.T - np.eye(n)
    # replace one equation by the normalization sum(pi) = 1
    sys = np.vstack([A[:-1], np.ones(n)])
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(sys, rhs)
    except np.linalg.LinAlgError as exc:
        raise NotIrreducible("stationary distribution is not unique") from exc
    if pi.min() < -1e-9:
        raise NotIrreducible("stationary solve produced negative mass")
    return np.maximum(pi, 0.0) / pi.sum()


def srw_chain(g, continuous: bool = False) -> ChainSpec:
    """Simple random walk on a graph: P(x,y) = 1/deg(x) on edges.

    continuous=True gives the rate-1 walk with generator L = P - I.
    """
    n = g.n
    P = np.zeros((n, n))
    for v in range(n):
        for w, _ in g.adjacency[v]:
            P[v, w] = 1.0 / g.degrees[v]
    deg = np.asarray(g.degrees, dtype=float)
    pi = deg / deg.sum()
    if continuous:
        return make_chain(P - np.eye(n), "generator", pi=pi, name="srw-cont")
    return make_chain(P, "transition", pi=pi, name="srw")


def time_reversal(c: ChainSpec) -> ChainSpec:
    """Adjoint chain: pi(x) M*(x,y) = pi(y) M(y,x)."""
    Mstar = c.matrix.T * c.pi[None, :] / c.pi[:, None]
    return make_chain(Mstar, c.kind, pi=c.pi, name=c.name + "*")


def additive_symmetrization(c: ChainSpec) -> ChainSpec:
    """(M + M*)/2 where M* is the time reversal; reversible, same pi."""
    Mstar = time_reversal(c).matrix
    return make_chain((c.matrix + Mstar) / 2.0, c.kind, pi=c.pi, name=c.name + "+sym")


def dirichlet_matrix(c: ChainSpec) -> np.ndarray:
    """Symmetric PSD matrix B with E(f, f) = f @ B @ f."""
    L = c.generator()
    D = np.diag(c.pi)
    B = -(D @ L + L.T @ D) / 2.0
    return (B + B.T) / 2.0


def dirichlet_form(c: ChainSpec, f) -> float:
    """E(f,f) = (1/2) sum_xy pi(x) K(x,y) (f(x)-f(y))^2, K the jump kernel."""
    f = np.asarray(f, dtype=float)
    return float(f @ dirichlet_matrix(c) @ f)


def _symmetric_basis(c: ChainSpec):
    """Negative generator of the additive symmetrization, conjugated by
    sqrt(pi) so it is a symmetric matrix with the same spectrum."""
    L = c.generator()
    pi = c.pi
    s = np.sqrt(pi)
    Ls = (L + (L.T * pi[None, :]) / pi[:, None]) / 2.0
    A = (s[:, None] * Ls) / s[None, :]
    return -(A + A.T) / 2.0


def is_irreducible(c: ChainSpec) -> bool:
    """Connectivity of the undirected support of M + M^T."""
    adj = (np.abs(c.matrix) + np.abs(c.matrix.T)) > 0
    np.fill_diagonal(adj, False)
    seen = np.zeros(c.n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for w in np.nonzero(adj[v])[0]:
            if not seen[w]:
                seen[w] = True
                stack.append(int(w))
    return bool(seen.all())


def spectral_gap(c: ChainSpec) -> float:
    """Smallest positive eigenvalue of I - P (resp. -L).

    For non-reversible input this is the gap of the additive symmetrization,
    which is the quantity the Dirichlet form sees.
    """
    if not is_irreducible(c):
        raise NotIrreducible("chain support is not connected")
    A = _symmetric_basis(c)  # = -(L^s) in sqrt(pi) basis
    w = np.linalg.eigvalsh(A)
    if abs(w[0]) > 1e-8 * max(1.0, abs(w[-1])):
        raise ChainError(f"expected a zero eigenvalue, got {w[0]}")
    return float(w[1])


def relaxation_time(c: ChainSpec) -> float:
    return 1.0 / spectral_gap(c)


def hitting_time_to_set(c: ChainSpec, targets) -> np.ndarray:
    """Vector of E_x[T_A] for A = targets (0 on A), by linear solve."""
    targets = np.asarray(sorted(set(int(t) for t in targets)), dtype=int)
    if targets.size == 0:
        raise ChainError("empty target set")
    L = c.generator()
    keep = np.setdiff1d(np.arange(c.n), targets)
    t = np.zeros(c.n)
    if keep.size:
        sub = L[np.ix_(keep, keep)]
        try:
            t[keep] = np.linalg.solve(sub, -np.ones(keep.size))
        except np.linalg.LinAlgError as exc:
            raise SingularSystem("absorbing system is singular") from exc
        if t[keep].min() < -1e-9:
            raise SingularSystem("negative expected hitting time")
    return t


def hitting_times(c: ChainSpec) -> np.ndarray:
    """Matrix H[x, y] = E_x[T_y]; diagonal is 0."""
    if not is_irreducible(c):
        raise NotIrreducible("hitting times need an irreducible chain")
    H = np.zeros((c.n, c.n))
    for y in range(c.n):
        H[:, y] = hitting_time_to_set(c, [y])
    return H


def commute_time(c: ChainSpec, a: int, b: int) -> float:
    """E_a[T_b] + E_b[T_a]."""
    if a == b:
        raise SameState("commute time needs distinct states")
    ta = hitting_time_to_set(c, [b])[a]
    tb = hitting_time_to_set(c, [a])[b]
    return float(ta + tb)


def effective_conductance(c: ChainSpec, a: int, b: int) -> float:
    """Dirichlet principle value: inf{E(f,f): f(a)=1, f(b)=0}.

    Attained by the harmonic function v(x) = P_x(T_a < T_b); for reversible
    chains equals 1/commute_time(a, b).
    """
    if a == b:
        raise SameState("conductance needs distinct states")
    if not c.reversible:
        raise NotReversible("Dirichlet principle requires a reversible chain")
    L = c.generator()
    v = np.zeros(c.n)
    v[a] = 1.0
    keep = np.setdiff1d(np.arange(c.n), [a, b])
    if keep.size:
        sub = L[np.ix_(keep, keep)]
        rhs = -L[np.ix_(keep, [a])].ravel()
        v[keep] = np.linalg.solve(sub, rhs)
    return dirichlet_form(c, v)


# ---------------------------------------------------------------------------
# signed-measure norms

def tv_distance(nu, pi) -> float:
    nu = np.asarray(nu, dtype=float)
    pi = np.asarray(pi, dtype=float)
    return 0.5 * float(np.abs(nu - pi).sum())


def l2_pi_distance(nu, pi) -> float:
    """|| nu - pi ||_{2,pi} = || nu/pi - 1 ||_{L2(pi)}."""
    nu = np.asarray(nu, dtype=float)
    pi = np.asarray(pi, dtype=float)
    return float(np.sqrt(np.sum((nu - pi) ** 2 / pi)))


def linf_pi_distance(nu, pi) -> float:
    nu = np.asarray(nu, dtype=float)
    pi = np.asarray(pi, dtype=float)
    return float(np.abs(nu / pi - 1.0).max())


# ---------------------------------------------------------------------------
# semigroup evaluation and mixing times

class Semigroup:
    """Evaluator of P_t = exp(tL), cached per chain.

    Reversible chains use the eigendecomposition in the sqrt(pi) basis;
    non-reversible ones use uniformization with truncation error <= 1e-12.
    """

    def __init__(self, c: ChainSpec):
        self.c = c
        self.L = c.generator()
        self.n = c.n
        self._eig = None
        if c.reversible:
            s = np.sqrt(c.pi)
            A = (s[:, None] * self.L) / s[None, :]
            A = (A + A.T) / 2.0
            w, U = np.linalg.eigh(A)
            self._eig = (w, U, s)
        else:
            self._rate = float(np.max(-np.diag(self.L)))
            if self._rate <= 0:
                raise ChainError("zero jump rate")
            self._K = self.L / self._rate + np.eye(self.n)

    def at(self, t: float) -> np.ndarray:
        if t < 0:
            raise ChainError("negative time")
        if self._eig is not None:
            w, U, s = self._eig
            M = (U * np.exp(w * t)) @ U.T
            return (M / s[:, None]) * s[None, :]
        return self._uniformized(t)

    def _uniformized(self, t: float) -> np.ndarray:
        ct = self._rate * t
        if ct == 0.0:
            return np.eye(self.n)
        term = np.eye(self.n)
        out = np.zeros((self.n, self.n))
        logw = -ct  # log Poisson(ct) weight at k = 0
        acc = 0.0
        cap = int(ct + 40 * np.sqrt(ct + 1) + 400)
        for k in range(cap):
            w = np.exp(logw)
            out += w * term
            acc += w
            if 1.0 - acc < 1e-13 and k > ct:
                break
            term = term @ self._K
            logw += np.log(ct) - np.log(k + 1)
        return out


def distance_from_equilibrium(c: ChainSpec, Pt: np.ndarray, norm: str, start=None) -> float:
    """Worst-case (or fixed-start) distance of P_t rows from pi."""
    pi = c.pi
    if start is None:
        rows = Pt
    elif np.isscalar(start):
        rows = Pt[int(start)][None, :]
    else:
        rows = (np.asarray(start, dtype=float) @ Pt)[None, :]
    diff = rows - pi[None, :]
    if norm == "tv":
        return float(0.5 * np.abs(diff).sum(axis=1).max())
    if norm == "linf":
        return float(np.abs(diff / pi[None, :]).max())
    if norm == "l2":
        return float(np.sqrt((diff**2 / pi[None, :]).sum(axis=1).max()))
    raise ChainError(f"unknown norm {norm!r}")


def mixing_time(c: ChainSpec, eps: float, norm: str = "tv", start=None,
                exact_state_limit: int = EXACT_STATE_LIMIT) -> float:
    """First time the worst-case distance drops to eps.

    Continuous chains are bracketed by doubling and refined by bisection to
    resolution 1e-4 * t_rel; the reported value is the conservative upper
    endpoint. Transition chains return an integer step count.
    """
    if c.n > exact_state_limit:
        raise TooLarge(f"{c.n} states exceeds limit {exact_state_limit}")
    sg = Semigroup(c)
    if c.kind == "transition":
        return _mixing_steps(c, eps, norm, start)
    trel = relaxation_time(c)

    def dist(t):
        return distance_from_equilibrium(c, sg.at(t), norm, start)

    if dist(0.0) <= eps:
        return 0.0
    lo, hi = 0.0, trel
    for _ in range(200):
        if dist(hi) <= eps:
            break
        lo, hi = hi, hi * 2.0
    else:
        raise ChainError("mixing time bracket not found")
    resolution = 1e-4 * trel
    while hi - lo > resolution:
        mid = (lo + hi) / 2.0
        if dist(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return float(hi)


def _mixing_steps(c: ChainSpec, eps: float, norm: str, start) -> float:
    Pk = np.eye(c.n)
    cap = 100 + int(200 * relaxation_time(c) * max(1.0, np.log(1.0 / (eps * c.pi.min()))))
    for k in range(cap + 1):
        if distance_from_equilibrium(c, Pk, norm, start) <= eps:
            return float(k)
        Pk = Pk @ c.matrix
    raise ChainError("discrete chain did not mix within the step cap (periodic?)")


# ---------------------------------------------------------------------------
# serialization (golden-test wire format)

def chain_to_json(c: ChainSpec) -> dict:
    ii, jj = np.nonzero(c.matrix)
    triplets = [[int(i), int(j), float(c.matrix[i, j])] for i, j in zip(ii, jj)]
    return {
        "states": c.n,
        "kind": c.kind,
        "triplets": triplets,
        "pi": [float(x) for x in c.pi],
    }


def chain_from_json(d: dict) -> ChainSpec:
    n = int(d["states"])
    M = np.zeros((n, n))
    for i, j, v in d["triplets"]:
        M[int(i), int(j)] = float(v)
    return make_chain(M, d["kind"], pi=np.asarray(d["pi"], dtype=float))
