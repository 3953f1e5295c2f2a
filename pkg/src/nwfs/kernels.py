"""Jitted integer kernels for the no-wait flowshop evaluation hot paths.

Everything here works on the precomputed pairwise-delay matrix ``d`` and the
per-job processing-time totals ``jt`` (both int64 arrays). Sequences are int64
arrays of job ids and all arithmetic is exact. The stochastic kernels draw
from the compiled code's own random stream, seeded through :func:`seed_rng`;
one seed fully determines one run, but the stream is process-global, so
never interleave two seeded runs in one process.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_warmed_up = False


@njit(cache=True)
def seq_makespan(d, jt, seq):
    """Makespan of a sequence: sum of consecutive delays plus the last job's total."""
    mk = np.int64(0)
    for t in range(1, seq.shape[0]):
        mk += d[seq[t - 1], seq[t]]
    return mk + jt[seq[seq.shape[0] - 1]]


@njit(cache=True)
def completion_times(d, jt, seq, out):
    """Fill ``out`` with per-position completion times; returns the makespan."""
    acc = np.int64(0)
    out[0] = jt[seq[0]]
    for t in range(1, seq.shape[0]):
        acc += d[seq[t - 1], seq[t]]
        out[t] = acc + jt[seq[t]]
    return out[seq.shape[0] - 1]


@njit(cache=True)
def removal_delta(d, jt, seq, i):
    """Makespan change from deleting the job at position ``i`` (len(seq) >= 2)."""
    n = seq.shape[0]
    if i == 0:
        return -d[seq[0], seq[1]]
    if i == n - 1:
        return -d[seq[n - 2], seq[n - 1]] - jt[seq[n - 1]] + jt[seq[n - 2]]
    return -d[seq[i - 1], seq[i]] - d[seq[i], seq[i + 1]] + d[seq[i - 1], seq[i + 1]]


@njit(cache=True)
def insertion_delta(d, jt, seq, i, k):
    """Makespan change of the insertion move i -> k, touching O(1) matrix entries.

    ``k`` is the moved job's position in the resulting sequence. Requires
    0 <= i, k < len(seq) and i != k.
    """
    n = seq.shape[0]
    job = seq[i]
    delta = removal_delta(d, jt, seq, i)
    # Neighbors of slot k in the sequence with position i deleted.
    if k == 0:
        r = seq[1] if i == 0 else seq[0]
        return delta + d[job, r]
    if k == n - 1:
        last = seq[n - 2] if n - 2 < i else seq[n - 1]
        return delta + d[last, job] + jt[job] - jt[last]
    l = seq[k - 1] if k - 1 < i else seq[k]
    r = seq[k] if k < i else seq[k + 1]
    return delta + d[l, job] + d[job, r] - d[l, r]


@njit(cache=True)
def reinsert_scan(d, jt, seq, i, mk):
    """Best final position for the job at ``i`` over all reinsertion slots.

    Returns (position, makespan); the original position is included, so the
    returned makespan never exceeds ``mk``. Ties go to the smallest position.
    """
    n = seq.shape[0]
    job = seq[i]
    mk_rm = mk + removal_delta(d, jt, seq, i)

    s0 = seq[1] if i == 0 else seq[0]
    best_pos = 0
    best_mk = mk_rm + d[job, s0]
    for p in range(1, n - 1):
        l = seq[p - 1] if p - 1 < i else seq[p]
        r = seq[p] if p < i else seq[p + 1]
        cand = mk_rm + d[l, job] + d[job, r] - d[l, r]
        if cand < best_mk:
            best_mk = cand
            best_pos = p
    last = seq[n - 2] if n - 2 < i else seq[n - 1]
    cand = mk_rm + d[last, job] + jt[job] - jt[last]
    if cand < best_mk:
        best_mk = cand
        best_pos = n - 1
    return best_pos, best_mk


@njit(cache=True)
def shift_move(seq, i, k):
    """Relocate seq[i] to position k in place, shifting the jobs in between."""
    job = seq[i]
    if k > i:
        for t in range(i, k):
            seq[t] = seq[t + 1]
    else:
        for t in range(i, k, -1):
            seq[t] = seq[t - 1]
    seq[k] = job


@njit(cache=True)
def reinsertion_pass(d, jt, seq, mk, order):
    """One best-reinsertion sweep: each job of ``order`` moves to its best slot.

    Mutates ``seq``; only strictly improving relocations are applied. Returns
    the updated makespan.
    """
    n = seq.shape[0]
    if n < 2:
        return mk
    for t in range(order.shape[0]):
        job = order[t]
        i = 0
        while seq[i] != job:
            i += 1
        pos, best_mk = reinsert_scan(d, jt, seq, i, mk)
        if best_mk < mk:
            shift_move(seq, i, pos)
            mk = best_mk
    return mk


@njit(cache=True)
def first_improvement_pass(d, jt, seq, mk, order):
    """One first-improvement sweep: each job takes the first strictly better slot."""
    n = seq.shape[0]
    if n < 2:
        return mk
    for t in range(order.shape[0]):
        job = order[t]
        i = 0
        while seq[i] != job:
            i += 1
        mk_rm = mk + removal_delta(d, jt, seq, i)
        s0 = seq[1] if i == 0 else seq[0]
        cand = mk_rm + d[job, s0]
        if cand < mk:
            shift_move(seq, i, 0)
            mk = cand
            continue
        moved = False
        for p in range(1, n - 1):
            l = seq[p - 1] if p - 1 < i else seq[p]
            r = seq[p] if p < i else seq[p + 1]
            cand = mk_rm + d[l, job] + d[job, r] - d[l, r]
            if cand < mk:
                shift_move(seq, i, p)
                mk = cand
                moved = True
                break
        if moved:
            continue
        last = seq[n - 2] if n - 2 < i else seq[n - 1]
        cand = mk_rm + d[last, job] + jt[job] - jt[last]
        if cand < mk:
            shift_move(seq, i, n - 1)
            mk = cand
    return mk


@njit(cache=True)
def insert_job_scan(d, jt, seq, job, base_mk):
    """Cheapest slot for an outside ``job`` in a partial sequence of makespan ``base_mk``.

    Returns (position, makespan) over the len(seq)+1 candidate slots; ties go
    to the smallest position.
    """
    n = seq.shape[0]
    if n == 0:
        return 0, jt[job]
    best_pos = 0
    best_mk = base_mk + d[job, seq[0]]
    for p in range(1, n):
        cand = base_mk + d[seq[p - 1], job] + d[job, seq[p]] - d[seq[p - 1], seq[p]]
        if cand < best_mk:
            best_mk = cand
            best_pos = p
    cand = base_mk + d[seq[n - 1], job] + jt[job] - jt[seq[n - 1]]
    if cand < best_mk:
        best_mk = cand
        best_pos = n
    return best_pos, best_mk


@njit(cache=True)
def has_improving_insertion(d, jt, seq, mk):
    """True when some insertion move strictly lowers the makespan."""
    n = seq.shape[0]
    if n < 2:
        return False
    for i in range(n):
        job = seq[i]
        mk_rm = mk + removal_delta(d, jt, seq, i)
        s0 = seq[1] if i == 0 else seq[0]
        if mk_rm + d[job, s0] < mk:
            return True
        for p in range(1, n - 1):
            l = seq[p - 1] if p - 1 < i else seq[p]
            r = seq[p] if p < i else seq[p + 1]
            if mk_rm + d[l, job] + d[job, r] - d[l, r] < mk:
                return True
        last = seq[n - 2] if n - 2 < i else seq[n - 1]
        if mk_rm + d[last, job] + jt[job] - jt[last] < mk:
            return True
    return False


@njit(cache=True)
def seed_rng(seed):
    """Seed the compiled code's random stream (separate from numpy's own)."""
    np.random.seed(seed)


@njit(cache=True)
def shuffle_ids(order):
    """Fisher-Yates over a job-id buffer, driven by the compiled random stream."""
    for i in range(order.shape[0] - 1, 0, -1):
        j = np.random.randint(0, i + 1)
        order[i], order[j] = order[j], order[i]


@njit(cache=True)
def descend(d, jt, seq, mk, order):
    """Best-reinsertion sweeps with a fresh random job order per pass.

    Stops when a full pass yields no strictly improving relocation; ``seq``
    ends at an insertion-local optimum.
    """
    while True:
        shuffle_ids(order)
        new_mk = reinsertion_pass(d, jt, seq, mk, order)
        if new_mk == mk:
            return mk
        mk = new_mk


@njit(cache=True)
def ig_chunk(
    d,
    jt,
    cur,
    cur_mk,
    best,
    best_mk,
    dsize,
    temperature,
    compare_best,
    max_iter_chunk,
    no_improve,
    no_improve_cap,
    positions,
    order,
    partial,
    removed,
    removed_mask,
    trace_iters,
    trace_mks,
    iter_base,
):
    """Run up to ``max_iter_chunk`` destruct-construct-descend-accept rounds.

    All state buffers are caller-owned and mutated in place so consecutive
    chunks continue one deterministic run; the wall clock is the caller's
    business. ``no_improve_cap < 0`` disables the stagnation stop. Returns
    (cur_mk, best_mk, iterations_done, no_improve, trace_len, stagnated).
    """
    n = cur.shape[0]
    keep = n - dsize
    n_trace = 0
    it = 0
    while it < max_iter_chunk:
        if no_improve_cap >= 0 and no_improve >= no_improve_cap:
            return cur_mk, best_mk, it, no_improve, n_trace, True
        it += 1

        # destruct: dsize distinct positions, uniformly, in draw order
        for t in range(n):
            positions[t] = t
        for t in range(dsize):
            r = t + np.random.randint(0, n - t)
            positions[t], positions[r] = positions[r], positions[t]
        for t in range(dsize):
            p = positions[t]
            removed[t] = cur[p]
            removed_mask[p] = True
        w = 0
        for p in range(n):
            if removed_mask[p]:
                removed_mask[p] = False
            else:
                partial[w] = cur[p]
                w += 1

        # construct: greedy best insertion, one removed job at a time
        mk = np.int64(0)
        for t in range(1, keep):
            mk += d[partial[t - 1], partial[t]]
        if keep > 0:
            mk += jt[partial[keep - 1]]
        length = keep
        for t in range(dsize):
            job = removed[t]
            pos, mk = insert_job_scan(d, jt, partial[:length], job, mk)
            for s in range(length, pos, -1):
                partial[s] = partial[s - 1]
            partial[pos] = job
            length += 1

        mk = descend(d, jt, partial, mk, order)

        if mk < best_mk:
            best_mk = mk
            for t in range(n):
                best[t] = partial[t]
            trace_iters[n_trace] = iter_base + it
            trace_mks[n_trace] = mk
            n_trace += 1
            no_improve = 0
        else:
            no_improve += 1

        reference = best_mk if compare_best else cur_mk
        ok = mk <= reference
        if not ok and temperature > 0.0:
            ok = np.random.random() < np.exp(-(mk - reference) / temperature)
        if ok:
            cur_mk = mk
            for t in range(n):
                cur[t] = partial[t]
    return cur_mk, best_mk, it, no_improve, n_trace, False


def warmup() -> None:
    """Force-compile (or cache-load) every kernel before entering timed code."""
    global _warmed_up
    if _warmed_up:
        return
    d = np.array([[0, 2], [1, 0]], dtype=np.int64)
    jt = np.array([3, 2], dtype=np.int64)
    seq = np.array([0, 1], dtype=np.int64)
    order = seq.copy()
    out = np.zeros(2, dtype=np.int64)
    seq_makespan(d, jt, seq)
    completion_times(d, jt, seq, out)
    insertion_delta(d, jt, seq, 0, 1)
    reinsert_scan(d, jt, seq, 0, seq_makespan(d, jt, seq))
    reinsertion_pass(d, jt, seq.copy(), seq_makespan(d, jt, seq), order)
    first_improvement_pass(d, jt, seq.copy(), seq_makespan(d, jt, seq), order)
    insert_job_scan(d, jt, seq[:1], 1, int(jt[0]))
    has_improving_insertion(d, jt, seq, seq_makespan(d, jt, seq))
    seed_rng(1)
    shuffle_ids(order.copy())
    descend(d, jt, seq.copy(), seq_makespan(d, jt, seq), order.copy())
    ig_chunk(
        d, jt, seq.copy(), seq_makespan(d, jt, seq), seq.copy(),
        seq_makespan(d, jt, seq), 1, 0.5, False, 2, 0, -1,
        np.zeros(2, dtype=np.int64), seq.copy(), np.zeros(2, dtype=np.int64),
        np.zeros(1, dtype=np.int64), np.zeros(2, dtype=np.bool_),
        np.zeros(2, dtype=np.int64), np.zeros(2, dtype=np.int64), 0,
    )
    _warmed_up = True
