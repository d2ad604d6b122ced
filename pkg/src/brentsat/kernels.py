"""Hot numeric kernels: unit propagation and the probSAT flip loop.

All kernels are written as plain loops over preallocated numpy arrays so
the same source runs either JIT-compiled (numba, the default) or as pure
Python for debugging and as a dependency-light fallback.  Select with

    BRENTSAT_BACKEND=numba|numpy

The two backends execute the identical instruction sequence, including the
inline xorshift32 RNG, so results are bit-identical; only throughput
differs (see benchmarks/bench_kernels.py).

Literal coding: literal of variable v is 2*v for positive, 2*v+1 for
negative; clauses are stored CSR-style in (lits, start) int32 arrays.
"""

from __future__ import annotations

import os

import numpy as np

BACKEND_ENV = "BRENTSAT_BACKEND"
_MASK32 = 0xFFFFFFFF


def _select_backend() -> str:
    choice = os.environ.get(BACKEND_ENV, "").strip().lower()
    if choice in ("numpy", "python"):
        return "numpy"
    if choice and choice != "numba":
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {choice!r}")
    try:
        import numba  # noqa: F401
    except ImportError:
        return "numpy"
    return "numba"


BACKEND = _select_backend()


def _xs32(state):
    """One xorshift32 step; state is a nonzero value < 2**32."""
    state ^= (state << 13) & _MASK32
    state ^= state >> 17
    state ^= (state << 5) & _MASK32
    return state


def _propagate(lits, start, occ, occ_start, values, trail, units, n_units):
    """Counter-free unit propagation by clause rescan.

    values: int8 per variable, -1 unassigned.  Returns (ok, n_assigned);
    ok = 0 signals a conflict.  Clauses are short, so rescanning on each
    member assignment is cheaper than watch lists at this scale.
    """
    n_trail = 0
    for i in range(n_units):
        lit = units[i]
        v = lit >> 1
        val = 1 - (lit & 1)
        if values[v] >= 0:
            if values[v] != val:
                return 0, n_trail
            continue
        values[v] = val
        trail[n_trail] = v
        n_trail += 1
    head = 0
    while head < n_trail:
        v = trail[head]
        head += 1
        for oi in range(occ_start[v], occ_start[v + 1]):
            ci = occ[oi]
            sat = False
            free_lit = -1
            free_count = 0
            for li in range(start[ci], start[ci + 1]):
                lit = lits[li]
                val = values[lit >> 1]
                if val < 0:
                    free_count += 1
                    free_lit = lit
                elif val == 1 - (lit & 1):
                    sat = True
                    break
            if sat:
                continue
            if free_count == 0:
                return 0, n_trail
            if free_count == 1:
                fv = free_lit >> 1
                fval = 1 - (free_lit & 1)
                values[fv] = fval
                trail[n_trail] = fv
                n_trail += 1
    return 1, n_trail


def _reduce_formula(lits, start, values, out_lits, out_start):
    """Drop satisfied clauses and false literals; returns reduced count.

    Must be called after propagation reached a fixpoint, so no unit or
    empty clause can remain.
    """
    n_out = 0
    pos = 0
    out_start[0] = 0
    for ci in range(start.size - 1):
        sat = False
        begin = pos
        for li in range(start[ci], start[ci + 1]):
            lit = lits[li]
            val = values[lit >> 1]
            if val < 0:
                out_lits[pos] = lit
                pos += 1
            elif val == 1 - (lit & 1):
                sat = True
                break
        if sat:
            pos = begin
            continue
        n_out += 1
        out_start[n_out] = pos
    return n_out


def _build_occ(lits, start, n_clauses, occ, occ_start, counts):
    """CSR occurrence lists per literal code for a (reduced) clause set."""
    for i in range(counts.size):
        counts[i] = 0
    for ci in range(n_clauses):
        for li in range(start[ci], start[ci + 1]):
            counts[lits[li]] += 1
    occ_start[0] = 0
    for i in range(counts.size):
        occ_start[i + 1] = occ_start[i] + counts[i]
        counts[i] = 0
    for ci in range(n_clauses):
        for li in range(start[ci], start[ci + 1]):
            lit = lits[li]
            occ[occ_start[lit] + counts[lit]] = ci
            counts[lit] += 1


def _sls_init(
    lits,
    start,
    n_clauses,
    assign,
    flippable,
    num_true,
    unsat_stack,
    unsat_pos,
    rng,
    randomize,
):
    """(Re)start state: random truth values on free vars, truth counters,
    unsat stack.  Returns (unsat_count, rng)."""
    if randomize:
        for v in range(assign.size):
            if flippable[v]:
                rng = _xs32(rng)
                assign[v] = rng & 1
    unsat_count = 0
    for ci in range(n_clauses):
        cnt = 0
        for li in range(start[ci], start[ci + 1]):
            lit = lits[li]
            if assign[lit >> 1] == 1 - (lit & 1):
                cnt += 1
        num_true[ci] = cnt
        if cnt == 0:
            unsat_pos[ci] = unsat_count
            unsat_stack[unsat_count] = ci
            unsat_count += 1
        else:
            unsat_pos[ci] = -1
    return unsat_count, rng


def _sls_run(
    lits,
    start,
    assign,
    flippable,
    num_true,
    unsat_stack,
    unsat_pos,
    occ,
    occ_start,
    weights,
    unsat_count,
    max_steps,
    rng,
    cand_v,
    cand_w,
):
    """probSAT inner loop: break-only exponential weighting.

    Returns (solved, steps_used, unsat_count, rng); resumable, the caller
    chunks calls to keep wall-clock control outside the kernel.
    """
    wmax = weights.size - 1
    steps = 0
    while steps < max_steps:
        if unsat_count == 0:
            return 1, steps, unsat_count, rng
        rng = _xs32(rng)
        ci = unsat_stack[rng % unsat_count]
        total = 0.0
        n_cand = 0
        for li in range(start[ci], start[ci + 1]):
            v = lits[li] >> 1
            if not flippable[v]:
                continue
            tl = 2 * v + 1 - assign[v]
            brk = 0
            for oi in range(occ_start[tl], occ_start[tl + 1]):
                if num_true[occ[oi]] == 1:
                    brk += 1
            if brk > wmax:
                brk = wmax
            w = weights[brk]
            cand_v[n_cand] = v
            cand_w[n_cand] = w
            n_cand += 1
            total += w
        steps += 1
        if n_cand == 0:
            continue
        rng = _xs32(rng)
        r = (rng * (1.0 / 4294967296.0)) * total
        pick = n_cand - 1
        acc = 0.0
        for i in range(n_cand):
            acc += cand_w[i]
            if r < acc:
                pick = i
                break
        v = cand_v[pick]
        old = assign[v]
        t_old = 2 * v + 1 - old
        t_new = 2 * v + old
        assign[v] = 1 - old
        for oi in range(occ_start[t_old], occ_start[t_old + 1]):
            k = occ[oi]
            num_true[k] -= 1
            if num_true[k] == 0:
                unsat_pos[k] = unsat_count
                unsat_stack[unsat_count] = k
                unsat_count += 1
        for oi in range(occ_start[t_new], occ_start[t_new + 1]):
            k = occ[oi]
            if num_true[k] == 0:
                p = unsat_pos[k]
                last = unsat_stack[unsat_count - 1]
                unsat_stack[p] = last
                unsat_pos[last] = p
                unsat_count -= 1
                unsat_pos[k] = -1
            num_true[k] += 1
    return 0, steps, unsat_count, rng


def _eval_clauses(lits, start, n_clauses, assign):
    """Index of the first unsatisfied clause, or -1."""
    for ci in range(n_clauses):
        sat = False
        for li in range(start[ci], start[ci + 1]):
            lit = lits[li]
            if assign[lit >> 1] == 1 - (lit & 1):
                sat = True
                break
        if not sat:
            return ci
    return -1


if BACKEND == "numba":
    from numba import njit

    _opts = dict(nogil=True, cache=True)
    _xs32 = njit(**_opts)(_xs32)
    propagate = njit(**_opts)(_propagate)
    reduce_formula = njit(**_opts)(_reduce_formula)
    build_occ = njit(**_opts)(_build_occ)
    sls_init = njit(**_opts)(_sls_init)
    sls_run = njit(**_opts)(_sls_run)
    eval_clauses = njit(**_opts)(_eval_clauses)
else:
    propagate = _propagate
    reduce_formula = _reduce_formula
    build_occ = _build_occ
    sls_init = _sls_init
    sls_run = _sls_run
    eval_clauses = _eval_clauses
