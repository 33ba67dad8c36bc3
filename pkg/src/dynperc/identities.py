"""Exact identity and inequality checks shared by tests and the CLI.

Each check returns (ok, diagnostics-dict). Tolerances are absolute-plus-
relative at 1e-8 unless a check's contract states otherwise (the exit-rate
match is 1%). Set-indexed checks enumerate all proper subsets on small
chains and fall back to a seeded subset sample above the enumeration limit;
each sampled check is still an exact per-subset statement.
"""

from __future__ import annotations

import numpy as np

from .chains import (
    ChainSpec,
    Semigroup,
    additive_symmetrization,
    dirichlet_matrix,
    hitting_times,
    hitting_time_to_set,
    l2_pi_distance,
    make_chain,
    mixing_time,
    spectral_gap,
)
from .profiles import (
    SpectralProfileTable,
    dirichlet_eigenvalue,
    lagrange_min_distance,
    spectral_profile_time,
)

TOL = 1e-8


def _leq(a, b, tol=TOL):
    return a <= b + tol * max(1.0, abs(a), abs(b))


def proper_subsets(n: int, limit: int = 12, n_sampled: int = 200, seed: int = 0):
    """All proper nonempty subsets when n <= limit, else a seeded sample."""
    if n <= limit:
        return [[i for i in range(n) if mask >> i & 1]
                for mask in range(1, (1 << n) - 1)]
    rng = np.random.default_rng(seed)
    out = {(i,) for i in range(n)}
    while len(out) < n + n_sampled:
        size = int(rng.integers(1, n))
        out.add(tuple(sorted(rng.choice(n, size=size, replace=False).tolist())))
    return [list(t) for t in sorted(out)]


# ---------------------------------------------------------------------------
# diagonal / L2 identities for reversible semigroups

def check_maxdiag(c: ChainSpec, times=None):
    """max_{y,z} |P_t(y,z)/pi(z) - 1| = max_y P_t(y,y)/pi(y) - 1, and
    ||P_x^t - pi||_{2,pi}^2 = P_{2t}(x,x)/pi(x) - 1 (reversible chains)."""
    assert c.reversible
    sg = Semigroup(c)
    trel = 1.0 / spectral_gap(c)
    if times is None:
        times = [0.05 * trel, 0.3 * trel, trel, 3.0 * trel]
    worst = 0.0
    for t in times:
        Pt = sg.at(t)
        ratio = Pt / c.pi[None, :] - 1.0
        lhs = np.abs(ratio).max()
        rhs = np.diag(ratio).max()
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
        P2t = sg.at(2 * t)
        for x in range(c.n):
            l2sq = np.sum((Pt[x] - c.pi) ** 2 / c.pi)
            diag = P2t[x, x] / c.pi[x] - 1.0
            worst = max(worst, abs(l2sq - diag) / max(1.0, abs(diag)))
    return worst <= TOL, {"max_residual": worst}


def check_profile_sandwich(table: SpectralProfileTable):
    """(1 - eps) Lambda(eps) <= Lambda0(eps) <= Lambda(eps) on the table."""
    ok = True
    worst = 0.0
    for m, l0, lv in zip(table.measures, table.lam0, table.lamvar):
        if not (_leq((1.0 - m) * lv, l0) and _leq(l0, lv)):
            ok = False
        worst = max(worst, (1.0 - m) * lv - l0, l0 - lv)
    return ok, {"worst_violation": worst}


def check_hitqs(c: ChainSpec, limit: int = 12, seed: int = 0):
    """E_pi[T_{A^c}] <= 1/lambda(A) <= max_x E_x[T_{A^c}] for proper A."""
    assert c.reversible
    ok = True
    worst = 0.0
    for A in proper_subsets(c.n, limit=limit, seed=seed):
        comp = sorted(set(range(c.n)) - set(A))
        t = hitting_time_to_set(c, comp)
        lam = dirichlet_eigenvalue(c, A)
        mean_pi = float(c.pi @ t)
        mx = float(t.max())
        inv = 1.0 / lam
        if not (_leq(mean_pi, inv) and _leq(inv, mx)):
            ok = False
            worst = max(worst, mean_pi - inv, inv - mx)
    return ok, {"worst_violation": worst}


def check_exit_rate(c: ChainSpec, limit: int = 12, seed: int = 0, rel_tol: float = 0.01):
    """Exit-time tail decay rate (log-slope of the exact survival function
    of T_{A^c} from pi) matches lambda(A) to 1% (reversible chains)."""
    assert c.reversible
    L = c.generator()
    worst = 0.0
    for A in proper_subsets(c.n, limit=limit, seed=seed):
        idx = np.asarray(A, dtype=int)
        s = np.sqrt(c.pi[idx])
        M = (s[:, None] * L[np.ix_(idx, idx)]) / s[None, :]
        w, V = np.linalg.eigh((M + M.T) / 2.0)
        coef = (V.T @ s) ** 2  # survival S(t) = sum_i coef_i e^{w_i t}
        lam_true = -float(w[-1])
        lam_prof = dirichlet_eigenvalue(c, A)
        # log-slope of S between two large times, in the factored form
        g = -w - lam_true  # nonnegative gaps
        t1 = 1e4 / lam_prof
        t2 = t1 + 1e3 / lam_prof

        def log_s(t):
            return -lam_true * t + np.log(np.sum(coef * np.exp(-g * t)))

        fitted = (log_s(t1) - log_s(t2)) / (t2 - t1)
        rel = abs(fitted - lam_prof) / lam_prof
        worst = max(worst, rel)
    return worst <= rel_tol, {"worst_rel_error": worst}


def check_poincare(c: ChainSpec, n_dists: int = 10, seed: int = 0):
    """||nu_t - pi||_{2,pi} <= ||nu - pi||_{2,pi} exp(-lambda t)."""
    sg = Semigroup(c)
    lam = spectral_gap(c)
    rng = np.random.default_rng(seed)
    ok = True
    worst = 0.0
    dists = [rng.dirichlet(np.ones(c.n)) for _ in range(n_dists)]
    for x in range(min(c.n, 4)):
        nu = np.zeros(c.n)
        nu[x] = 1.0
        dists.append(nu)
    for nu in dists:
        d0 = l2_pi_distance(nu, c.pi)
        for t in [0.1 / lam, 1.0 / lam, 3.0 / lam]:
            dt = l2_pi_distance(nu @ sg.at(t), c.pi)
            bound = d0 * np.exp(-lam * t)
            if not _leq(dt, bound):
                ok = False
                worst = max(worst, dt - bound)
    return ok, {"worst_violation": worst}


def check_spb1(c: ChainSpec, table: SpectralProfileTable, eps_list=(0.25, 1.0)):
    """t_mix^(infty)(eps) <= t_spectral-profile(eps), exact table required."""
    assert table.exact
    ok = True
    cells = []
    for eps in eps_list:
        tmix = mixing_time(c, eps, norm="linf")
        tsp = spectral_profile_time(table, eps)
        cells.append((eps, tmix, tsp))
        if not _leq(tmix, tsp):
            ok = False
    return ok, {"cells": cells}


def fuzz_variance_profile(c: ChainSpec, table: SpectralProfileTable,
                          n_cases: int = 100000, seed: int = 0):
    """E(u,u)/Var(u) >= (1/2) Lambda(4 ||u||_1^2 / Var(u)) on random u >= 0."""
    assert table.exact
    rng = np.random.default_rng(seed)
    n = c.n
    B = dirichlet_matrix(c)
    pi = c.pi
    U = np.abs(rng.standard_normal((n_cases, n)))
    # sparsify half the cases to exercise the small-support regime
    mask = rng.random((n_cases, n)) < rng.uniform(0.2, 1.0, (n_cases, 1))
    mask[np.arange(n_cases), rng.integers(0, n, n_cases)] = True
    U[n_cases // 2:] *= mask[n_cases // 2:]
    e = np.einsum("ij,jk,ik->i", U, B, U)
    mean = U @ pi
    var = (U**2) @ pi - mean**2
    good = var > 1e-14
    arg = 4.0 * mean[good] ** 2 / var[good]
    lam = np.where(
        arg >= 1.0,
        table.poincare,
        table.lamvar[np.minimum(
            np.searchsorted(table.measures, np.minimum(arg, 1.0), side="right") - 1,
            len(table.measures) - 1)],
    )
    lhs = e[good] / var[good]
    rhs = 0.5 * lam
    viol = rhs - lhs
    ok = bool(np.all(lhs >= rhs - 1e-10 * np.maximum(1.0, np.abs(rhs))))
    return ok, {"cases": int(good.sum()), "worst_violation": float(viol.max())}


def qp_min_distance_oracle(pi, A, delta: float) -> float:
    """Constrained quadratic program oracle for the closest-distribution
    problem: min ||nu - pi||_{2,pi}^2 s.t. nu(A) >= pi(A) + delta pi(A^c)."""
    from scipy.optimize import minimize

    pi = np.asarray(pi, dtype=float)
    n = pi.size
    idx = np.asarray(sorted(A), dtype=int)
    mask = np.zeros(n)
    mask[idx] = 1.0
    target = pi[idx].sum() + delta * (1.0 - pi[idx].sum())
    cons = [
        {"type": "eq", "fun": lambda nu: nu.sum() - 1.0, "jac": lambda nu: np.ones(n)},
        {"type": "ineq", "fun": lambda nu: mask @ nu - target, "jac": lambda nu: mask},
    ]
    best = np.inf
    for x0 in (pi.copy(), np.ones(n) / n, 0.7 * pi + 0.3 / n):
        r = minimize(lambda nu: np.sum((nu - pi) ** 2 / pi), x0,
                     jac=lambda nu: 2.0 * (nu - pi) / pi,
                     method="SLSQP", bounds=[(0.0, 1.0)] * n, constraints=cons,
                     options={"maxiter": 500, "ftol": 1e-14})
        if r.success and r.fun < best:
            best = float(r.fun)
    return best


def check_lagrange_vs_qp(n_cases: int = 24, seed: int = 0, tol: float = 1e-6):
    """Closed form delta^2 pi(A^c)/pi(A) vs the QP oracle, and the stated
    achiever delta*pi_A + (1-delta)*pi attains it."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        n = int(rng.integers(4, 9))
        pi = rng.dirichlet(np.full(n, 2.0))
        k = int(rng.integers(1, n))
        A = sorted(rng.choice(n, size=k, replace=False).tolist())
        delta = float(rng.uniform(0.05, 0.95))
        val = lagrange_min_distance(pi, A, delta)
        orc = qp_min_distance_oracle(pi, A, delta)
        worst = max(worst, abs(val - orc))
        nu = (1.0 - delta) * pi
        nu[A] += delta * pi[A] / pi[A].sum()
        attained = float(np.sum((nu - pi) ** 2 / pi))
        worst = max(worst, abs(attained - val))
    return worst <= tol, {"worst_abs_error": worst}


def fuzz_conditioning_bound(n_states: int = 8, n_cases: int = 100000, seed: int = 0):
    """Vectorized check of the conditioned-measure L2 bound."""
    rng = np.random.default_rng(seed)
    pi = rng.dirichlet(np.full(n_states, 1.5))
    nus = rng.dirichlet(np.full(n_states, 0.7), size=n_cases)
    masks = rng.random((n_cases, n_states)) < rng.uniform(0.15, 0.9, (n_cases, 1))
    masks[np.arange(n_cases), rng.integers(0, n_states, n_cases)] = True
    mass = (nus * masks).sum(axis=1)
    good = mass > 1e-12
    nu_a = np.where(masks, nus, 0.0)[good] / mass[good, None]
    lhs = ((nu_a - pi) ** 2 / pi).sum(axis=1)
    base = ((nus[good] - pi) ** 2 / pi).sum(axis=1)
    rhs = (base + 1.0) / mass[good] ** 2 - 1.0
    ok = bool(np.all(lhs <= rhs + 1e-9 * np.maximum(1.0, rhs)))
    return ok, {"cases": int(good.sum()),
                "worst_violation": float((lhs - rhs).max())}


def check_commute_symmetrization(n_chains: int = 1000, n_states: int = 6, seed: int = 0):
    """Commute-time domination by the additive symmetrization.

    For random transition chains P with symmetrization S, every pair
    satisfies E^P_a[T_{ba}] <= E^S_a[T_{ba}]: 1/E^P_a[T_{ba}] equals the
    Dirichlet form of P's harmonic function, which S shares, and the
    Dirichlet principle for the reversible S caps it by 1/E^S_a[T_{ba}].
    (A 3-state rotation chain shows the reverse ordering is false: commute
    3 for the rotation vs 4 for its symmetrization, the triangle walk.)
    """
    rng = np.random.default_rng(seed)
    ok = True
    worst = 0.0
    for _ in range(n_chains):
        P = rng.dirichlet(np.full(n_states, 0.8), size=n_states)
        c = make_chain(P, "transition")
        s = additive_symmetrization(c)
        Hp = hitting_times(c)
        Hs = hitting_times(s)
        Cp = Hp + Hp.T  # commute matrix: E_a[T_b] + E_b[T_a]
        Cs = Hs + Hs.T
        gap = (Cp - Cs).max()
        worst = max(worst, gap)
        if gap > TOL * max(1.0, Cs.max()):
            ok = False
    return ok, {"worst_violation": worst}


def check_dirichlet_principle(c: ChainSpec, pairs=None):
    """1/commute(a,b) equals the constrained Dirichlet infimum (reversible)."""
    from .chains import commute_time, effective_conductance

    assert c.reversible
    if pairs is None:
        pairs = [(a, b) for a in range(c.n) for b in range(a + 1, c.n)]
    worst = 0.0
    for a, b in pairs:
        lhs = 1.0 / commute_time(c, a, b)
        rhs = effective_conductance(c, a, b)
        worst = max(worst, abs(lhs - rhs) / max(lhs, rhs))
    return worst <= TOL, {"worst_rel_error": worst}
