"""Insertion-operator neighborhood: moves, O(1) deltas, local search, enumeration.

The insertion operator removes the job at one position and reinserts it at
another, shifting the jobs in between; a permutation has (n-1)^2 distinct
neighbors. Thanks to the pairwise-delay structure, the makespan change of any
move follows from a handful of delay-matrix entries.
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .model import DelayMatrix, Instance, build_delay_matrix, check_permutation


@dataclass(frozen=True)
class InsertionMove:
    """Relocate the job at ``from_pos`` so it ends up at ``to_pos``."""

    from_pos: int
    to_pos: int


@dataclass(frozen=True)
class LocalOptimaReport:
    """Outcome of exhaustively enumerating a small instance's search space."""

    global_optimum: tuple[tuple[int, ...], int]
    local_optima: list[tuple[tuple[int, ...], int]]
    n_enumerated: int
    n_local_optima: int


def _check_move(n: int, mv: InsertionMove) -> None:
    if not (0 <= mv.from_pos < n and 0 <= mv.to_pos < n):
        raise ValueError(f"move {mv} out of range for {n} positions")
    if mv.from_pos == mv.to_pos:
        raise ValueError("insertion move needs two distinct positions")


def apply_insertion(perm: Sequence[int], mv: InsertionMove) -> list[int]:
    """Return the neighbor obtained by applying ``mv`` to ``perm``."""
    out = list(perm)
    _check_move(len(out), mv)
    job = out.pop(mv.from_pos)
    out.insert(mv.to_pos, job)
    return out


def delta_makespan(dm: DelayMatrix, perm: Sequence[int], mv: InsertionMove) -> int:
    """Makespan difference of the neighbor, from O(1) delay-matrix lookups."""
    arr = check_permutation(perm, dm.n_jobs)
    _check_move(arr.shape[0], mv)
    return int(kernels.insertion_delta(dm.d, dm.job_total, arr, mv.from_pos, mv.to_pos))


def best_insertion(dm: DelayMatrix, partial: Sequence[int], job: int) -> tuple[int, list[int], int]:
    """Cheapest slot for ``job`` in a partial sequence.

    Evaluates all len(partial)+1 candidate positions and returns
    (position, new sequence, new makespan); ties break to the smallest
    position.
    """
    arr = np.asarray(partial, dtype=np.int64)
    if not 0 <= job < dm.n_jobs:
        raise ValueError(f"job id {job} out of range for {dm.n_jobs} jobs")
    if (arr == job).any():
        raise ValueError(f"job {job} is already in the partial sequence")
    base = int(kernels.seq_makespan(dm.d, dm.job_total, arr)) if arr.shape[0] else 0
    pos, mk = kernels.insert_job_scan(dm.d, dm.job_total, arr, job, base)
    out = list(partial)
    out.insert(int(pos), job)
    return int(pos), out, int(mk)


def local_search(dm: DelayMatrix, perm: Sequence[int], rng: random.Random) -> list[int]:
    """Iterative improvement to a local optimum of the insertion neighborhood.

    Every pass visits all jobs in a fresh random order and relocates each to
    its best position; the search stops once a full pass yields no strictly
    improving move.
    """
    arr = check_permutation(perm, dm.n_jobs).copy()
    kernels.warmup()
    mk = int(kernels.seq_makespan(dm.d, dm.job_total, arr))
    _local_search_inplace(dm.d, dm.job_total, arr, mk, rng)
    return [int(x) for x in arr]


def _local_search_inplace(d, jt, arr: np.ndarray, mk: int, rng: random.Random) -> int:
    order = np.arange(arr.shape[0], dtype=np.int64)
    while True:
        _shuffle(order, rng)
        new_mk = int(kernels.reinsertion_pass(d, jt, arr, mk, order))
        if new_mk == mk:
            return mk
        mk = new_mk


def _shuffle(order: np.ndarray, rng: random.Random) -> None:
    # Fisher-Yates driven by the caller's random stream, so runs are replayable.
    for i in range(order.shape[0] - 1, 0, -1):
        j = rng.randrange(i + 1)
        order[i], order[j] = order[j], order[i]


def enumerate_local_optima(
    inst: Instance,
    keep: int = 10,
    *,
    cap: int = 10,
    allow_large: bool = False,
) -> LocalOptimaReport:
    """Enumerate all n! permutations, classifying insertion-local optima.

    Refuses instances above ``cap`` jobs unless ``allow_large`` is set (12 jobs
    already means hours of scanning). Permutations are streamed; only the
    ``keep`` best local optima are retained, ordered by makespan then
    lexicographically.
    """
    n = inst.n_jobs
    if n > 12:
        raise ValueError(f"enumeration of {n} jobs is not supported (12 max)")
    if n > cap and not allow_large:
        raise ValueError(
            f"enumeration of {n} jobs exceeds the cap of {cap}; pass allow_large=True to override"
        )
    if keep < 0:
        raise ValueError("keep must be non-negative")
    kernels.warmup()
    dm = build_delay_matrix(inst)
    d, jt = dm.d, dm.job_total

    best_perm: tuple[int, ...] | None = None
    best_mk = None
    # Max-heap (negated makespan) of the `keep` best local optima seen so far.
    heap: list[tuple[int, tuple[int, ...]]] = []
    n_local = 0
    n_enum = 0
    buf = np.empty(n, dtype=np.int64)
    for perm in itertools.permutations(range(n)):
        n_enum += 1
        buf[:] = perm
        mk = int(kernels.seq_makespan(d, jt, buf))
        if best_mk is None or mk < best_mk or (mk == best_mk and perm < best_perm):
            best_perm, best_mk = perm, mk
        if n >= 2 and kernels.has_improving_insertion(d, jt, buf, mk):
            continue
        n_local += 1
        # Keep one extra entry: the global optimum is itself a local optimum
        # and is dropped from the list below.
        entry = (-mk, _neg_lex(perm))
        if len(heap) <= keep:
            heapq.heappush(heap, (entry, perm, mk))
        elif entry > heap[0][0]:
            heapq.heapreplace(heap, (entry, perm, mk))

    optima = sorted(((mk, perm) for _, perm, mk in heap))
    local = [(perm, mk) for mk, perm in optima if perm != best_perm][:keep]
    return LocalOptimaReport(
        global_optimum=(best_perm, best_mk),
        local_optima=local,
        n_enumerated=n_enum,
        n_local_optima=n_local,
    )


def _neg_lex(perm: tuple[int, ...]) -> tuple[int, ...]:
    # Heap keeps the *worst* entry at the root; among equal makespans that is
    # the lexicographically largest permutation, hence the negated key.
    return tuple(-x for x in perm)
