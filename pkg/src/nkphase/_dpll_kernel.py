"""Array-based DPLL search, compiled with numba.

Literal codes inside the kernel are ``2 * v`` (positive) and ``2 * v + 1``
(negative).  Clause state lives in counters (true literals, free literals)
that are updated eagerly on every assignment and restored in LIFO order.

Backtracking is conflict-directed: a conflict is traced back through the
reasons of implied literals to the decisions it depends on, the search jumps
back to the latest of those decisions and asserts its complement, with the
negated decisions as a temporary reason.  Nothing is kept once that literal
leaves the trail, so no clauses are learnt.
"""

import numpy as np
from numba import njit

SAT, UNSAT, BUDGET = 0, 1, 2

# indices into the stats vector
DECISIONS, PROPAGATIONS, PURE, PROBES, FAILED, PREPROCESSED, CONFLICTS = range(7)

# reason codes; values <= DYNAMIC encode a pool offset as DYNAMIC - offset
DECISION = -1
NO_REASON = -2
DYNAMIC = -3

# indices into the scalar state vector
TL, PL, PQL, NSAT, POOL = range(5)


@njit(cache=True)
def _assign(L, why, level, st, val, lvl, reason, trail, lits, cstart, occ_start, occ,
            ntrue, nfree, lit_active, size_count, pending, pending_why, pq):
    """Make literal ``L`` true; returns a falsified clause or -1."""
    v = L >> 1
    val[v] = 1 - (L & 1)
    lvl[v] = level
    reason[v] = why
    trail[st[TL]] = L
    st[TL] += 1
    conflict = -1
    for idx in range(occ_start[L], occ_start[L + 1]):
        c = occ[idx]
        nfree[c] -= 1
        ntrue[c] += 1
        if ntrue[c] == 1:
            st[NSAT] += 1
            size_count[nfree[c] + 1] -= 1
            for j in range(cstart[c], cstart[c + 1]):
                L2 = lits[j]
                if val[L2 >> 1] == -1:
                    lit_active[L2] -= 1
                    if lit_active[L2] == 0:
                        pq[st[PQL]] = L2 >> 1
                        st[PQL] += 1
    nL = L ^ 1
    for idx in range(occ_start[nL], occ_start[nL + 1]):
        c = occ[idx]
        nfree[c] -= 1
        if ntrue[c] == 0:
            s = nfree[c]
            size_count[s + 1] -= 1
            size_count[s] += 1
            if s == 0:
                if conflict < 0:
                    conflict = c
            elif s == 1:
                for j in range(cstart[c], cstart[c + 1]):
                    L2 = lits[j]
                    if val[L2 >> 1] == -1:
                        pending[st[PL]] = L2
                        pending_why[st[PL]] = c
                        st[PL] += 1
                        break
    return conflict


@njit(cache=True)
def _unassign(L, st, val, lits, cstart, occ_start, occ, ntrue, nfree, lit_active, size_count):
    nL = L ^ 1
    for idx in range(occ_start[nL], occ_start[nL + 1]):
        c = occ[idx]
        if ntrue[c] == 0:
            s = nfree[c]
            size_count[s] -= 1
            size_count[s + 1] += 1
        nfree[c] += 1
    for idx in range(occ_start[L], occ_start[L + 1]):
        c = occ[idx]
        ntrue[c] -= 1
        nfree[c] += 1
        if ntrue[c] == 0:
            st[NSAT] -= 1
            size_count[nfree[c]] += 1
            for j in range(cstart[c], cstart[c + 1]):
                L2 = lits[j]
                if val[L2 >> 1] == -1:
                    lit_active[L2] += 1
    val[L >> 1] = -1


@njit(cache=True)
def _propagate(level, st, stats, val, lvl, reason, trail, lits, cstart, occ_start, occ,
               ntrue, nfree, lit_active, size_count, pending, pending_why, pq):
    """Drain the pending units.  Returns a falsified clause or -1."""
    while st[PL] > 0:
        st[PL] -= 1
        L = pending[st[PL]]
        why = pending_why[st[PL]]
        x = val[L >> 1]
        if x != -1:
            if x != 1 - (L & 1):
                st[PL] = 0
                return why
            continue
        stats[PROPAGATIONS] += 1
        c = _assign(L, why, level, st, val, lvl, reason, trail, lits, cstart, occ_start, occ,
                    ntrue, nfree, lit_active, size_count, pending, pending_why, pq)
        if c >= 0:
            st[PL] = 0
            return c
    return -1


@njit(cache=True)
def _eliminate_pure(level, st, stats, val, lvl, reason, trail, lits, cstart, occ_start, occ,
                    ntrue, nfree, lit_active, size_count, pending, pending_why, pq):
    while st[PQL] > 0:
        st[PQL] -= 1
        v = pq[st[PQL]]
        if val[v] != -1:
            continue
        a = lit_active[2 * v]
        b = lit_active[2 * v + 1]
        if (a > 0) == (b > 0):
            continue
        L = 2 * v if a > 0 else 2 * v + 1
        stats[PURE] += 1
        # a pure literal only satisfies clauses: no unit or conflict can follow
        _assign(L, NO_REASON, level, st, val, lvl, reason, trail, lits, cstart, occ_start, occ,
                ntrue, nfree, lit_active, size_count, pending, pending_why, pq)


@njit(cache=True)
def _undo_to(pos, st, val, reason, trail, lits, cstart, occ_start, occ, ntrue, nfree,
             lit_active, size_count):
    while st[TL] > pos:
        st[TL] -= 1
        L = trail[st[TL]]
        r = reason[L >> 1]
        if r <= DYNAMIC:
            st[POOL] = DYNAMIC - r
        _unassign(L, st, val, lits, cstart, occ_start, occ, ntrue, nfree, lit_active, size_count)


@njit(cache=True)
def _analyze(conf, ndec, val, lvl, reason, trail, dec_pos, lits, cstart, pool, seen, stack, out):
    """Decision literals the conflict depends on, written to ``out``;
    returns their count.  Falls back to every decision so far if an
    assignment without a traceable reason turns up."""
    nout = 0
    sp = 0
    touched = 0
    for j in range(cstart[conf], cstart[conf + 1]):
        u = lits[j] >> 1
        if lvl[u] > 0 and not seen[u]:
            seen[u] = True
            stack[sp] = u
            sp += 1
    fallback = False
    while sp > 0:
        sp -= 1
        v = stack[sp]
        stack[len(stack) - 1 - touched] = v
        touched += 1
        r = reason[v]
        if r == DECISION:
            out[nout] = 2 * v + (1 - val[v])
            nout += 1
        elif r >= 0:
            for j in range(cstart[r], cstart[r + 1]):
                u = lits[j] >> 1
                if lvl[u] > 0 and not seen[u]:
                    seen[u] = True
                    stack[sp] = u
                    sp += 1
        elif r <= DYNAMIC:
            off = DYNAMIC - r
            for j in range(off + 1, off + 1 + pool[off]):
                u = pool[j] >> 1
                if lvl[u] > 0 and not seen[u]:
                    seen[u] = True
                    stack[sp] = u
                    sp += 1
        else:
            fallback = True
    for t in range(touched):
        seen[stack[len(stack) - 1 - t]] = False
    if fallback:
        nout = 0
        for d in range(1, ndec + 1):
            out[nout] = trail[dec_pos[d]]
            nout += 1
    return nout


@njit(cache=True)
def solve_kernel(nv, lits, cstart, occ_start, occ, budget, use_pure, use_probe):
    m = cstart.shape[0] - 1
    maxlen = 0
    for c in range(m):
        if cstart[c + 1] - cstart[c] > maxlen:
            maxlen = cstart[c + 1] - cstart[c]
    val = np.full(nv, -1, np.int8)
    lvl = np.zeros(nv, np.int32)
    reason = np.full(nv, NO_REASON, np.int32)
    stats = np.zeros(7, np.int64)
    st = np.zeros(5, np.int64)
    ntrue = np.zeros(m, np.int32)
    nfree = np.empty(m, np.int32)
    size_count = np.zeros(maxlen + 2, np.int64)
    lit_active = np.zeros(2 * nv, np.int32)
    for c in range(m):
        nfree[c] = cstart[c + 1] - cstart[c]
        size_count[nfree[c]] += 1
    for L in range(2 * nv):
        lit_active[L] = occ_start[L + 1] - occ_start[L]
    trail = np.empty(nv + 1, np.int32)
    pending = np.empty(m + 2 * nv + 2, np.int32)
    pending_why = np.empty(m + 2 * nv + 2, np.int32)
    pq = np.empty(2 * nv + 2, np.int32)
    dec_pos = np.zeros(nv + 2, np.int32)
    score = np.zeros(nv, np.int64)
    seen = np.zeros(nv, np.bool_)
    stack = np.empty(2 * nv + 2, np.int32)
    dlits = np.empty(nv + 1, np.int32)
    pool = np.empty(4 * nv + 64, np.int32)
    skip = np.zeros(2 * nv, np.bool_)

    if size_count[0] > 0:
        stats[PREPROCESSED] = 1
        return UNSAT, val, stats
    for c in range(m):
        if nfree[c] == 1:
            pending[st[PL]] = lits[cstart[c]]
            pending_why[st[PL]] = c
            st[PL] += 1
    if use_pure:
        for v in range(nv):
            if lit_active[2 * v] == 0 or lit_active[2 * v + 1] == 0:
                pq[st[PQL]] = v
                st[PQL] += 1

    # ---- root: units, pure literals and failed literals
    if _propagate(0, st, stats, val, lvl, reason, trail, lits, cstart, occ_start, occ,
                  ntrue, nfree, lit_active, size_count, pending, pending_why, pq) >= 0:
        stats[PREPROCESSED] = 1
        return UNSAT, val, stats
    changed = True
    while changed:
        changed = False
        if use_pure:
            _eliminate_pure(0, st, stats, val, lvl, reason, trail, lits, cstart, occ_start, occ,
                            ntrue, nfree, lit_active, size_count, pending, pending_why, pq)
        if not use_probe or st[NSAT] == m:
            break
        # literals implied by a successful probe this round need no probe of their own
        skip[:] = False
        for v in range(nv):
            for sign in range(2):
                if val[v] != -1 or lit_active[2 * v] + lit_active[2 * v + 1] == 0:
                    break
                L = 2 * v + sign
                if skip[L]:
                    continue
                # without an open 2-clause on the complement nothing propagates
                binary = False
                for idx in range(occ_start[L ^ 1], occ_start[(L ^ 1) + 1]):
                    c = occ[idx]
                    if ntrue[c] == 0 and nfree[c] == 2:
                        binary = True
                        break
                if not binary:
                    continue
                pos = st[TL]
                pq_before = st[PQL]
                stats[PROBES] += 1
                c = _assign(L, NO_REASON, 0, st, val, lvl, reason, trail, lits, cstart, occ_start, occ,
                            ntrue, nfree, lit_active, size_count, pending, pending_why, pq)
                if c < 0:
                    # probe propagations are not counted as search work
                    saved = stats[PROPAGATIONS]
                    c = _propagate(0, st, stats, val, lvl, reason, trail, lits, cstart, occ_start, occ,
                                   ntrue, nfree, lit_active, size_count, pending, pending_why, pq)
                    stats[PROPAGATIONS] = saved
                st[PL] = 0
                if c < 0:
                    for t in range(pos + 1, st[TL]):
                        skip[trail[t]] = True
                _undo_to(pos, st, val, reason, trail, lits, cstart, occ_start, occ, ntrue, nfree,
                         lit_active, size_count)
                st[PQL] = pq_before
                if c < 0:
                    continue
                stats[FAILED] += 1
                changed = True
                c = _assign(L ^ 1, NO_REASON, 0, st, val, lvl, reason, trail, lits, cstart, occ_start,
                            occ, ntrue, nfree, lit_active, size_count, pending, pending_why, pq)
                if c < 0:
                    c = _propagate(0, st, stats, val, lvl, reason, trail, lits, cstart, occ_start, occ,
                                   ntrue, nfree, lit_active, size_count, pending, pending_why, pq)
                if c >= 0:
                    stats[PREPROCESSED] = 1
                    return UNSAT, val, stats

    if st[NSAT] == m:
        stats[PREPROCESSED] = 1
        return SAT, val, stats

    # ---- search
    ndec = 0
    conf = -1
    while True:
        if conf >= 0:
            stats[CONFLICTS] += 1
            st[PL] = 0
            st[PQL] = 0
            nd = _analyze(conf, ndec, val, lvl, reason, trail, dec_pos, lits, cstart, pool, seen,
                          stack, dlits)
            if nd == 0:
                return UNSAT, val, stats
            top = 0
            for j in range(nd):
                if lvl[dlits[j] >> 1] > top:
                    top = lvl[dlits[j] >> 1]
            L = trail[dec_pos[top]]
            _undo_to(dec_pos[top], st, val, reason, trail, lits, cstart, occ_start, occ, ntrue, nfree,
                     lit_active, size_count)
            ndec = top - 1
            why = NO_REASON
            if ndec > 0:
                need = st[POOL] + nd + 1
                if need > pool.shape[0]:
                    grown = np.empty(2 * need, np.int32)
                    grown[:st[POOL]] = pool[:st[POOL]]
                    pool = grown
                off = st[POOL]
                pool[off] = nd
                for j in range(nd):
                    pool[off + 1 + j] = dlits[j] ^ 1
                st[POOL] = off + 1 + nd
                why = DYNAMIC - off
            conf = _assign(L ^ 1, why, ndec, st, val, lvl, reason, trail, lits, cstart, occ_start, occ,
                           ntrue, nfree, lit_active, size_count, pending, pending_why, pq)
        else:
            if use_pure:
                _eliminate_pure(ndec, st, stats, val, lvl, reason, trail, lits, cstart, occ_start, occ,
                                ntrue, nfree, lit_active, size_count, pending, pending_why, pq)
            if st[NSAT] == m:
                return SAT, val, stats
            if stats[DECISIONS] >= budget:
                return BUDGET, val, stats
            smin = 1
            while size_count[smin] == 0:
                smin += 1
            for v in range(nv):
                score[v] = 0
            for c in range(m):
                if ntrue[c] == 0 and nfree[c] == smin:
                    for j in range(cstart[c], cstart[c + 1]):
                        L2 = lits[j]
                        if val[L2 >> 1] == -1:
                            score[L2 >> 1] += 1
            best = -1
            best_score = -1
            for v in range(nv):
                if val[v] == -1 and score[v] > best_score:
                    best = v
                    best_score = score[v]
            stats[DECISIONS] += 1
            ndec += 1
            dec_pos[ndec] = st[TL]
            conf = _assign(2 * best + 1, DECISION, ndec, st, val, lvl, reason, trail, lits, cstart,
                           occ_start, occ, ntrue, nfree, lit_active, size_count, pending, pending_why, pq)
        if conf < 0:
            conf = _propagate(ndec, st, stats, val, lvl, reason, trail, lits, cstart, occ_start, occ,
                              ntrue, nfree, lit_active, size_count, pending, pending_why, pq)
