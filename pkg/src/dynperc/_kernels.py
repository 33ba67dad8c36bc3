"""Event-driven simulation kernels (numba-compiled).

The infected-edge bookkeeping keeps, per edge, a "real element" flag plus a
copy count; a flat bag of edge ids (one entry per element, copies included)
supports O(1) uniform removal, and a free-list tracks edges whose real
element is absent, which carry independent rate-mu refresh clocks. Removing
the real element of an edge refreshes that edge's state; removing a copy
does nothing else. A walk attempt always appends one element: the real one
if absent (even when copies survive -- the reading under which every edge
refreshes at total rate mu), otherwise a new copy.

Each kernel reseeds its generator from the passed 32-bit seed, so a job's
output depends only on its arguments, never on scheduling.
"""

import numpy as np
from numba import njit

BAG_SLACK = 4096


@njit(cache=True, nogil=True, inline="always")
def _randint(n):
    k = int(np.random.random() * n)
    if k >= n:
        k = n - 1
    return k


@njit(cache=True, nogil=True)
def _reset_state(env, real, copies, flist, fpos, p, sample_env, env0):
    m = env.size
    for e in range(m):
        if sample_env:
            env[e] = 1 if np.random.random() < p else 0
        else:
            env[e] = env0[e]
        real[e] = 0
        copies[e] = 0
        flist[e] = e
        fpos[e] = e
    return m  # n_free


@njit(cache=True, nogil=True)
def _infect_all(real, copies, bag, flist, fpos):
    m = real.size
    for e in range(m):
        real[e] = 1
        copies[e] = 0
        bag[e] = e
        fpos[e] = -1
    return m  # r_total == n_real == m, n_free == 0


@njit(cache=True, nogil=True)
def _advance_to_regeneration(off, nbrs, eids, env, real, copies, bag, flist, fpos,
                             state_i, state_f, mu, p):
    """Run until R empties (waiting for it to fill first if empty now).

    state_i = [x, r_total, n_real, n_free], state_f = [t]. Returns the event
    count consumed.
    """
    x = state_i[0]
    r_total = state_i[1]
    n_real = state_i[2]
    n_free = state_i[3]
    t = state_f[0]
    m = env.size
    cap = bag.size
    events = 0
    while True:
        tot = 1.0 + mu * (r_total + n_free)
        t += -np.log(1.0 - np.random.random()) / tot
        u = np.random.random() * tot
        events += 1
        if u < 1.0:
            # walk attempt: pick a uniform neighbor, cross iff edge open
            d = off[x + 1] - off[x]
            k = off[x] + _randint(d)
            y = nbrs[k]
            e = eids[k]
            if env[e] == 1:
                x = y
            if real[e] == 0:
                real[e] = 1
                n_real += 1
                # drop e from the free list
                j = fpos[e]
                last = flist[n_free - 1]
                flist[j] = last
                fpos[last] = j
                fpos[e] = -1
                n_free -= 1
            else:
                copies[e] += 1
            if r_total >= cap:
                raise RuntimeError("infected-set bag overflow")
            bag[r_total] = e
            r_total += 1
        elif u < 1.0 + mu * r_total:
            # uniform removal from R (counting multiplicity)
            j = _randint(r_total)
            e = bag[j]
            bag[j] = bag[r_total - 1]
            r_total -= 1
            group = real[e] + copies[e]
            v = _randint(group)
            if v < copies[e]:
                copies[e] -= 1
            else:
                real[e] = 0
                n_real -= 1
                env[e] = 1 if np.random.random() < p else 0
                flist[n_free] = e
                fpos[e] = n_free
                n_free += 1
            if r_total == 0:
                break
        else:
            # independent refresh of an edge whose real element is absent
            e = flist[_randint(n_free)]
            env[e] = 1 if np.random.random() < p else 0
    state_i[0] = x
    state_i[1] = r_total
    state_i[2] = n_real
    state_i[3] = n_free
    state_f[0] = t
    return events


@njit(cache=True, nogil=True)
def regen_trace(off, nbrs, eids, m, mu, p, x0, sample_env, env0, n_regens,
                start_all_infected, seed):
    """Regeneration times and walk positions.

    sample_env=1 draws eta_0 ~ pi_p, else env0 is used. With
    start_all_infected=0, R_0 is empty and tau_0=0 is the 0th entry; with 1,
    R_0 holds every real element and the first recorded time is the first
    emptying.
    """
    np.random.seed(seed)
    env = np.empty(m, dtype=np.uint8)
    real = np.empty(m, dtype=np.uint8)
    copies = np.empty(m, dtype=np.int64)
    bag = np.empty(m + BAG_SLACK, dtype=np.int64)
    flist = np.empty(m, dtype=np.int64)
    fpos = np.empty(m, dtype=np.int64)
    state_i = np.empty(4, dtype=np.int64)
    state_f = np.zeros(1, dtype=np.float64)
    n_free = _reset_state(env, real, copies, flist, fpos, p, sample_env == 1, env0)
    state_i[0] = x0
    state_i[1] = 0
    state_i[2] = 0
    state_i[3] = n_free
    if start_all_infected == 1:
        state_i[1] = _infect_all(real, copies, bag, flist, fpos)
        state_i[2] = state_i[1]
        state_i[3] = 0
        taus = np.empty(n_regens, dtype=np.float64)
        pos = np.empty(n_regens, dtype=np.int64)
        k0 = 0
    else:
        taus = np.empty(n_regens + 1, dtype=np.float64)
        pos = np.empty(n_regens + 1, dtype=np.int64)
        taus[0] = 0.0
        pos[0] = x0
        k0 = 1
    for k in range(k0, taus.size):
        _advance_to_regeneration(off, nbrs, eids, env, real, copies, bag, flist, fpos,
                                 state_i, state_f, mu, p)
        taus[k] = state_f[0]
        pos[k] = state_i[0]
    return taus, pos


@njit(cache=True, nogil=True)
def tau1_batch(off, nbrs, eids, m, mu, p, x0, n_samples, seed):
    """Restart protocol: fresh eta ~ pi_p and R = {} each run; record the
    walk position and environment bitmask at the first regeneration."""
    np.random.seed(seed)
    env = np.empty(m, dtype=np.uint8)
    real = np.empty(m, dtype=np.uint8)
    copies = np.empty(m, dtype=np.int64)
    bag = np.empty(m + BAG_SLACK, dtype=np.int64)
    flist = np.empty(m, dtype=np.int64)
    fpos = np.empty(m, dtype=np.int64)
    state_i = np.empty(4, dtype=np.int64)
    state_f = np.zeros(1, dtype=np.float64)
    out_pos = np.empty(n_samples, dtype=np.int64)
    out_env = np.empty(n_samples, dtype=np.int64)
    out_tau = np.empty(n_samples, dtype=np.float64)
    for s in range(n_samples):
        n_free = _reset_state(env, real, copies, flist, fpos, p, True, env)
        state_i[0] = x0
        state_i[1] = 0
        state_i[2] = 0
        state_i[3] = n_free
        state_f[0] = 0.0
        _advance_to_regeneration(off, nbrs, eids, env, real, copies, bag, flist, fpos,
                                 state_i, state_f, mu, p)
        out_pos[s] = state_i[0]
        mask = 0
        if m <= 62:
            for e in range(m):
                if env[e] == 1:
                    mask |= 1 << e
        out_env[s] = mask
        out_tau[s] = state_f[0]
    return out_pos, out_env, out_tau


@njit(cache=True, nogil=True)
def first_regen_batch(off, nbrs, eids, m, mu, p, x0, n_samples, seed):
    """First emptying time starting from a fully infected edge set."""
    np.random.seed(seed)
    env = np.empty(m, dtype=np.uint8)
    real = np.empty(m, dtype=np.uint8)
    copies = np.empty(m, dtype=np.int64)
    bag = np.empty(m + BAG_SLACK, dtype=np.int64)
    flist = np.empty(m, dtype=np.int64)
    fpos = np.empty(m, dtype=np.int64)
    state_i = np.empty(4, dtype=np.int64)
    state_f = np.zeros(1, dtype=np.float64)
    out = np.empty(n_samples, dtype=np.float64)
    for s in range(n_samples):
        _reset_state(env, real, copies, flist, fpos, p, True, env)
        r = _infect_all(real, copies, bag, flist, fpos)
        state_i[0] = x0
        state_i[1] = r
        state_i[2] = r
        state_i[3] = 0
        state_f[0] = 0.0
        _advance_to_regeneration(off, nbrs, eids, env, real, copies, bag, flist, fpos,
                                 state_i, state_f, mu, p)
        out[s] = state_f[0]
    return out


@njit(cache=True, nogil=True)
def regen_to_target(off, nbrs, eids, m, mu, p, x0, target, max_regens, n_samples, seed):
    """Per sample: number of regenerations until the walk sits at `target`
    at a regeneration time, and that regeneration time."""
    np.random.seed(seed)
    env = np.empty(m, dtype=np.uint8)
    real = np.empty(m, dtype=np.uint8)
    copies = np.empty(m, dtype=np.int64)
    bag = np.empty(m + BAG_SLACK, dtype=np.int64)
    flist = np.empty(m, dtype=np.int64)
    fpos = np.empty(m, dtype=np.int64)
    state_i = np.empty(4, dtype=np.int64)
    state_f = np.zeros(1, dtype=np.float64)
    out_n = np.empty(n_samples, dtype=np.int64)
    out_t = np.empty(n_samples, dtype=np.float64)
    for s in range(n_samples):
        n_free = _reset_state(env, real, copies, flist, fpos, p, True, env)
        state_i[0] = x0
        state_i[1] = 0
        state_i[2] = 0
        state_i[3] = n_free
        state_f[0] = 0.0
        steps = 0
        while steps < max_regens:
            _advance_to_regeneration(off, nbrs, eids, env, real, copies, bag, flist, fpos,
                                     state_i, state_f, mu, p)
            steps += 1
            if state_i[0] == target:
                break
        out_n[s] = steps
        out_t[s] = state_f[0]
    return out_n, out_t


@njit(cache=True, nogil=True)
def infection_occupancy(off, nbrs, eids, m, mu, p, x0, burn_in, sample_dt, n_events, max_level, seed):
    """|R| sampled on the time grid burn_in + k*sample_dt over n_events events."""
    np.random.seed(seed)
    env = np.empty(m, dtype=np.uint8)
    real = np.empty(m, dtype=np.uint8)
    copies = np.empty(m, dtype=np.int64)
    bag = np.empty(m + BAG_SLACK, dtype=np.int64)
    flist = np.empty(m, dtype=np.int64)
    fpos = np.empty(m, dtype=np.int64)
    counts = np.zeros(max_level + 1, dtype=np.int64)
    n_free = _reset_state(env, real, copies, flist, fpos, p, True, env)
    x = x0
    r_total = 0
    n_real = 0
    t = 0.0
    next_sample = burn_in
    cap = bag.size
    for _ in range(n_events):
        tot = 1.0 + mu * (r_total + n_free)
        dt = -np.log(1.0 - np.random.random()) / tot
        # |R| is constant on [t, t+dt)
        while next_sample < t + dt:
            lvl = r_total if r_total < max_level else max_level
            counts[lvl] += 1
            next_sample += sample_dt
        t += dt
        u = np.random.random() * tot
        if u < 1.0:
            d = off[x + 1] - off[x]
            k = off[x] + _randint(d)
            y = nbrs[k]
            e = eids[k]
            if env[e] == 1:
                x = y
            if real[e] == 0:
                real[e] = 1
                n_real += 1
                j = fpos[e]
                last = flist[n_free - 1]
                flist[j] = last
                fpos[last] = j
                fpos[e] = -1
                n_free -= 1
            else:
                copies[e] += 1
            if r_total >= cap:
                raise RuntimeError("infected-set bag overflow")
            bag[r_total] = e
            r_total += 1
        elif u < 1.0 + mu * r_total:
            j = _randint(r_total)
            e = bag[j]
            bag[j] = bag[r_total - 1]
            r_total -= 1
            group = real[e] + copies[e]
            v = _randint(group)
            if v < copies[e]:
                copies[e] -= 1
            else:
                real[e] = 0
                n_real -= 1
                env[e] = 1 if np.random.random() < p else 0
                flist[n_free] = e
                fpos[e] = n_free
                n_free += 1
        else:
            e = flist[_randint(n_free)]
            env[e] = 1 if np.random.random() < p else 0
    return counts


@njit(cache=True, nogil=True)
def refresh_counts(off, nbrs, eids, m, mu, p, x0, horizon, seed):
    """Per-edge refresh events (removal refreshes + free-clock refreshes)
    on [0, horizon]; the marginal refresh process of each edge is rate mu."""
    np.random.seed(seed)
    env = np.empty(m, dtype=np.uint8)
    real = np.empty(m, dtype=np.uint8)
    copies = np.empty(m, dtype=np.int64)
    bag = np.empty(m + BAG_SLACK, dtype=np.int64)
    flist = np.empty(m, dtype=np.int64)
    fpos = np.empty(m, dtype=np.int64)
    counts = np.zeros(m, dtype=np.int64)
    n_free = _reset_state(env, real, copies, flist, fpos, p, True, env)
    x = x0
    r_total = 0
    n_real = 0
    t = 0.0
    cap = bag.size
    while True:
        tot = 1.0 + mu * (r_total + n_free)
        t += -np.log(1.0 - np.random.random()) / tot
        if t > horizon:
            break
        u = np.random.random() * tot
        if u < 1.0:
            d = off[x + 1] - off[x]
            k = off[x] + _randint(d)
            y = nbrs[k]
            e = eids[k]
            if env[e] == 1:
                x = y
            if real[e] == 0:
                real[e] = 1
                n_real += 1
                j = fpos[e]
                last = flist[n_free - 1]
                flist[j] = last
                fpos[last] = j
                fpos[e] = -1
                n_free -= 1
            else:
                copies[e] += 1
            if r_total >= cap:
                raise RuntimeError("infected-set bag overflow")
            bag[r_total] = e
            r_total += 1
        elif u < 1.0 + mu * r_total:
            j = _randint(r_total)
            e = bag[j]
            bag[j] = bag[r_total - 1]
            r_total -= 1
            group = real[e] + copies[e]
            v = _randint(group)
            if v < copies[e]:
                copies[e] -= 1
            else:
                real[e] = 0
                n_real -= 1
                env[e] = 1 if np.random.random() < p else 0
                flist[n_free] = e
                fpos[e] = n_free
                n_free += 1
                counts[e] += 1
        else:
            e = flist[_randint(n_free)]
            env[e] = 1 if np.random.random() < p else 0
            counts[e] += 1
    return counts


# ---------------------------------------------------------------------------
# plain full-process kernels (no infection bookkeeping, literal refreshes)

@njit(cache=True, nogil=True)
def full_occupation(off, nbrs, eids, m, mu, p, x0, envmask0, n_events, seed):
    """Time-weighted occupation of (x, env bitmask); requires m <= 20."""
    np.random.seed(seed)
    n = off.size - 1
    env = np.empty(m, dtype=np.uint8)
    for e in range(m):
        env[e] = (envmask0 >> e) & 1
    weights = np.zeros(n << m, dtype=np.float64)
    x = x0
    mask = envmask0
    tot = 1.0 + mu * m
    for _ in range(n_events):
        dt = -np.log(1.0 - np.random.random()) / tot
        weights[(x << m) | mask] += dt
        u = np.random.random() * tot
        if u < 1.0:
            d = off[x + 1] - off[x]
            k = off[x] + _randint(d)
            if env[eids[k]] == 1:
                x = nbrs[k]
        else:
            e = _randint(m)
            bit = 1 if np.random.random() < p else 0
            env[e] = bit
            if bit == 1:
                mask |= 1 << e
            else:
                mask &= ~(1 << e)
    return weights


@njit(cache=True, nogil=True)
def full_hitting_batch(off, nbrs, eids, m, mu, p, x0, envmask0, stationary_env,
                       target, n_samples, seed):
    """First time the walk coordinate equals target; envmask0 used unless
    stationary_env=1, in which case each run draws eta ~ pi_p."""
    np.random.seed(seed)
    env = np.empty(m, dtype=np.uint8)
    out = np.empty(n_samples, dtype=np.float64)
    tot = 1.0 + mu * m
    for s in range(n_samples):
        for e in range(m):
            if stationary_env == 1:
                env[e] = 1 if np.random.random() < p else 0
            else:
                env[e] = (envmask0 >> e) & 1
        x = x0
        t = 0.0
        while x != target:
            t += -np.log(1.0 - np.random.random()) / tot
            u = np.random.random() * tot
            if u < 1.0:
                d = off[x + 1] - off[x]
                k = off[x] + _randint(d)
                if env[eids[k]] == 1:
                    x = nbrs[k]
            else:
                env[_randint(m)] = 1 if np.random.random() < p else 0
        out[s] = t
    return out


@njit(cache=True, nogil=True)
def cluster_stats_batch(off, nbrs, eids, m, p, base, n_samples, seed):
    """Monte Carlo sums for N_p = E|K|, M_p = E[|boundary(K)| |K|^2]."""
    np.random.seed(seed)
    n = off.size - 1
    env = np.empty(m, dtype=np.uint8)
    visited = np.empty(n, dtype=np.uint8)
    stack = np.empty(n, dtype=np.int64)
    sum_n = 0.0
    sum_n2 = 0.0
    sum_m = 0.0
    sum_m2 = 0.0
    for _ in range(n_samples):
        for e in range(m):
            env[e] = 1 if np.random.random() < p else 0
        for v in range(n):
            visited[v] = 0
        # DFS over open edges from the base vertex
        top = 0
        stack[top] = base
        top += 1
        visited[base] = 1
        size = 1
        while top > 0:
            top -= 1
            v = stack[top]
            for k in range(off[v], off[v + 1]):
                w = nbrs[k]
                if env[eids[k]] == 1 and visited[w] == 0:
                    visited[w] = 1
                    stack[top] = w
                    top += 1
                    size += 1
        # boundary: edges with exactly one endpoint in the cluster
        boundary = 0
        for v in range(n):
            if visited[v] == 1:
                for k in range(off[v], off[v + 1]):
                    if visited[nbrs[k]] == 0:
                        boundary += 1
        val_m = boundary * size * size
        sum_n += size
        sum_n2 += size * size
        sum_m += val_m
        sum_m2 += val_m * val_m
    return sum_n, sum_n2, sum_m, sum_m2
