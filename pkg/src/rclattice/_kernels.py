"""Compiled inner loops: draw stream, cut-edge search, chains, CFTP, enumeration.

Adjacency is CSR over ``nv + nb`` nodes: real vertices first, then one virtual
node per wired block.  Wiring links carry edge id -1 and are always open.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def mix64(z):
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def draw(key, t, m):
    """Edge in [0, m) and uniform in [0, 1) for absolute step index ``t``."""
    h = mix64(key ^ mix64(np.uint64(t)))
    g = mix64(h)
    e = np.int64(np.float64(h >> _S11) * _INV53 * m)
    if e >= m:
        e = m - 1
    return e, np.float64(g >> _S11) * _INV53


@njit(cache=True)
def draw_block(key, t0, count, m, edges_out, u_out):
    for i in range(count):
        e, u = draw(key, t0 + i, m)
        edges_out[i] = e
        u_out[i] = u


@njit(cache=True)
def connected_avoiding(ptr, nbr, eid, bits, a, b, skip, mark_a, mark_b, gen, qa, qb):
    """Is ``a`` joined to ``b`` by open edges other than ``skip``?

    Alternating breadth-first search from both ends; stops as soon as either
    side is exhausted, so the cost tracks the smaller cluster.
    """
    if a == b:
        return True
    gen[0] += 1
    g = gen[0]
    mark_a[a] = g
    mark_b[b] = g
    qa[0] = a
    qb[0] = b
    ha, ta, hb, tb = 0, 1, 0, 1
    while ha < ta and hb < tb:
        v = qa[ha]
        ha += 1
        for k in range(ptr[v], ptr[v + 1]):
            ed = eid[k]
            if ed == skip:
                continue
            if ed >= 0 and not bits[ed]:
                continue
            w = nbr[k]
            if mark_b[w] == g:
                return True
            if mark_a[w] != g:
                mark_a[w] = g
                qa[ta] = w
                ta += 1
        v = qb[hb]
        hb += 1
        for k in range(ptr[v], ptr[v + 1]):
            ed = eid[k]
            if ed == skip:
                continue
            if ed >= 0 and not bits[ed]:
                continue
            w = nbr[k]
            if mark_a[w] == g:
                return True
            if mark_b[w] != g:
                mark_b[w] = g
                qb[tb] = w
                tb += 1
    return False


@njit(cache=True)
def heat_bath(ptr, nbr, eid, ea, eb, bits, e, u, p, p_cut, mark_a, mark_b, gen, qa, qb):
    """Resample edge ``e`` with the shared uniform ``u``; returns True if it was a cut edge."""
    joined = connected_avoiding(ptr, nbr, eid, bits, ea[e], eb[e], e,
                                mark_a, mark_b, gen, qa, qb)
    thr = p if joined else p_cut
    bits[e] = u < thr
    return not joined


@njit(cache=True)
def run_chain(ptr, nbr, eid, ea, eb, bits, p, p_cut, key, t0, steps, active,
              mark_a, mark_b, gen, qa, qb):
    """Forward dynamics for ``steps`` draws starting at index ``t0``.

    Draws landing on an edge with ``active[e] == False`` are consumed but ignored.
    """
    m = ea.shape[0]
    for t in range(t0, t0 + steps):
        e, u = draw(key, t, m)
        if active[e]:
            heat_bath(ptr, nbr, eid, ea, eb, bits, e, u, p, p_cut, mark_a, mark_b, gen, qa, qb)


@njit(cache=True)
def coalesce(ptr, nbr, eid, ea, eb, x, y, p, p_cut, key, cap, mark_a, mark_b, gen, qa, qb):
    """Identity-coupled run until ``x == y``; returns the step count or -1 at the cap."""
    m = ea.shape[0]
    diff = 0
    for i in range(m):
        if x[i] != y[i]:
            diff += 1
    t = 0
    while diff > 0 and t < cap:
        e, u = draw(key, t, m)
        before = x[e] != y[e]
        heat_bath(ptr, nbr, eid, ea, eb, x, e, u, p, p_cut, mark_a, mark_b, gen, qa, qb)
        heat_bath(ptr, nbr, eid, ea, eb, y, e, u, p, p_cut, mark_a, mark_b, gen, qa, qb)
        after = x[e] != y[e]
        if before and not after:
            diff -= 1
        elif after and not before:
            diff += 1
        t += 1
    if diff == 0:
        return t
    return -1


@njit(cache=True)
def cftp_one(ptr, nbr, eid, ea, eb, stride, copies, p, p_cut, key, t_start, t_cap,
             top, bot, out, mark_a, mark_b, gen, qa, qb):
    """Monotone coupling from the past.

    A draw picks a local edge ``j < stride`` and updates edge ``c * stride + j`` of
    every copy ``c`` with the same uniform.  The step at time ``-t`` always uses
    draw index ``t``.  Returns the final horizon, or -1 if ``t_cap`` was hit.
    """
    m = ea.shape[0]
    T = t_start
    while True:
        for i in range(m):
            top[i] = True
            bot[i] = False
        for t in range(T, 0, -1):
            j, u = draw(key, t, stride)
            for c in range(copies):
                e = c * stride + j
                heat_bath(ptr, nbr, eid, ea, eb, top, e, u, p, p_cut, mark_a, mark_b, gen, qa, qb)
                heat_bath(ptr, nbr, eid, ea, eb, bot, e, u, p, p_cut, mark_a, mark_b, gen, qa, qb)
        same = True
        for i in range(m):
            if top[i] != bot[i]:
                same = False
                break
        if same:
            for i in range(m):
                out[i] = top[i]
            return T
        if T >= t_cap:
            return -1
        T *= 2


@njit(cache=True)
def cftp_many(ptr, nbr, eid, ea, eb, stride, copies, p, p_cut, keys, t_start, t_cap,
              out, horizons, mark_a, mark_b, gen, qa, qb):
    m = ea.shape[0]
    top = np.empty(m, dtype=np.bool_)
    bot = np.empty(m, dtype=np.bool_)
    for s in range(keys.shape[0]):
        horizons[s] = cftp_one(ptr, nbr, eid, ea, eb, stride, copies, p, p_cut, keys[s],
                               t_start, t_cap, top, bot, out[s], mark_a, mark_b, gen, qa, qb)


@njit(cache=True)
def multi_chain(ptr, nbr, eid, ea, eb, chains, active, p, p_cut, key, t0, steps,
                watch, record_every, trace, mark_a, mark_b, gen, qa, qb):
    """Run k identity-coupled chains, checking ``chains[i] >= chains[i+1]`` at every step.

    Only the updated edge can change, so checking it is exact.  ``trace`` receives
    ``chains[0][watch] != chains[k-1][watch]`` every ``record_every`` steps.
    Returns (violations, first violation step or -1).
    """
    k = chains.shape[0]
    m = ea.shape[0]
    violations = 0
    first = -1
    rec = 0
    for s in range(steps):
        e, u = draw(key, t0 + s, m)
        for c in range(k):
            if active[c, e]:
                heat_bath(ptr, nbr, eid, ea, eb, chains[c], e, u, p, p_cut,
                          mark_a, mark_b, gen, qa, qb)
        for c in range(k - 1):
            if chains[c + 1, e] and not chains[c, e]:
                violations += 1
                if first < 0:
                    first = s
        if record_every > 0 and (s + 1) % record_every == 0 and rec < trace.shape[0]:
            trace[rec] = chains[0, watch] != chains[k - 1, watch]
            rec += 1
    return violations, first


@njit(cache=True)
def _find(parent, v):
    while parent[v] != v:
        parent[v] = parent[parent[v]]
        v = parent[v]
    return v


@njit(cache=True)
def labels(nv, ea, eb, bits, wire_parent, out):
    """Least-vertex labels of components; returns the component count."""
    parent = wire_parent.copy()
    for e in range(ea.shape[0]):
        if bits[e]:
            ra = _find(parent, ea[e])
            rb = _find(parent, eb[e])
            if ra != rb:
                if ra < rb:
                    parent[rb] = ra
                else:
                    parent[ra] = rb
    count = 0
    for v in range(nv):
        r = _find(parent, v)
        out[v] = r
        if r == v:
            count += 1
    return count


@njit(cache=True)
def decay_sampler(ptr, nbr, eid, ea, eb, nv, bits, p, p_cut, key, burn_in, thin, samples,
                  wire_parent, pu, pv, group, n_groups, counts, mark_a, mark_b, gen, qa, qb):
    """Long-run sampler: after burn-in, every ``thin`` steps count connected pairs per group."""
    m = ea.shape[0]
    active = np.ones(m, dtype=np.bool_)
    run_chain(ptr, nbr, eid, ea, eb, bits, p, p_cut, key, 0, burn_in, active,
              mark_a, mark_b, gen, qa, qb)
    lab = np.empty(nv, dtype=np.int64)
    t = burn_in
    for s in range(samples):
        run_chain(ptr, nbr, eid, ea, eb, bits, p, p_cut, key, t, thin, active,
                  mark_a, mark_b, gen, qa, qb)
        t += thin
        labels(nv, ea, eb, bits, wire_parent, lab)
        for i in range(pu.shape[0]):
            if lab[pu[i]] == lab[pv[i]]:
                counts[s, group[i]] += 1


@njit(cache=True)
def _root(parent, v):
    while parent[v] != v:
        v = parent[v]
    return v


@njit(cache=True)
def enumerate_free(nv, ea, eb, wire_parent, fixed_open, free, targets, u, v, want_masks):
    """Depth-first enumeration of all assignments of the ``free`` edges.

    Assignment ``mask`` opens ``free[i]`` iff bit ``i`` is set.  The union-find is
    undone on backtrack, so each assignment costs O(1) beyond its last union.
    Returns ``comps[mask]`` and ``joined[mask]`` (u, v in one component; only when
    ``u >= 0``), both empty unless ``want_masks``; ``total[a, c]`` counts
    assignments with ``a`` open free edges and ``c`` components, and
    ``per_edge[j, a, c]`` the same with ``free[targets[j]]`` open.
    """
    k = free.shape[0]
    parent = wire_parent.copy()
    for e in fixed_open:
        ra = _find(parent, ea[e])
        rb = _find(parent, eb[e])
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    c = 0
    for w in range(nv):
        parent[w] = _find(parent, w)
    rank = np.zeros(nv, dtype=np.int64)
    for w in range(nv):
        if parent[w] == w:
            c += 1
            rank[w] = 1
    size = (1 << k) if want_masks else 0
    comps = np.empty(size, dtype=np.int32)
    joined = np.zeros(size if u >= 0 else 0, dtype=np.bool_)
    nt = targets.shape[0]
    total = np.zeros((k + 1, nv + 1), dtype=np.int64)
    per_edge = np.zeros((nt, k + 1, nv + 1), dtype=np.int64)
    choice = np.full(k + 1, -1, dtype=np.int64)
    undo = np.full(k + 1, -1, dtype=np.int64)
    bumped = np.zeros(k + 1, dtype=np.bool_)
    is_open = np.zeros(k + 1, dtype=np.bool_)
    d = 0
    a = 0
    mask = 0
    while d >= 0:
        if d == k:
            total[a, c] += 1
            for j in range(nt):
                if is_open[targets[j]]:
                    per_edge[j, a, c] += 1
            if want_masks:
                comps[mask] = c
                if u >= 0:
                    joined[mask] = _root(parent, u) == _root(parent, v)
            d -= 1
            continue
        if choice[d] == -1:
            choice[d] = 0
            d += 1
            if d < k:
                choice[d] = -1
        elif choice[d] == 0:
            choice[d] = 1
            is_open[d] = True
            a += 1
            mask |= 1 << d
            ra = _root(parent, ea[free[d]])
            rb = _root(parent, eb[free[d]])
            undo[d] = -1
            bumped[d] = False
            if ra != rb:
                if rank[ra] < rank[rb]:
                    ra, rb = rb, ra
                parent[rb] = ra
                undo[d] = rb
                if rank[ra] == rank[rb]:
                    rank[ra] += 1
                    bumped[d] = True
                c -= 1
            d += 1
            if d < k:
                choice[d] = -1
        else:
            if undo[d] >= 0:
                rb = undo[d]
                ra = parent[rb]
                parent[rb] = rb
                if bumped[d]:
                    rank[ra] -= 1
                c += 1
            is_open[d] = False
            a -= 1
            mask ^= 1 << d
            choice[d] = -1
            d -= 1
    return comps, joined, total, per_edge


@njit(cache=True)
def derive_keys(seed, count, out):
    """Independent stream keys ``out[i]`` for replica/sample ``i`` of a master seed."""
    base = mix64(seed)
    for i in range(count):
        out[i] = mix64(base ^ mix64(np.uint64(i) * _M2))
