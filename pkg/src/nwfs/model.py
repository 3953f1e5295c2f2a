"""Problem data and the delay-based makespan evaluation for no-wait flowshops.

A problem instance is a job x machine matrix of positive integer processing
times. Because consecutive jobs are separated by a start-up delay on the first
machine that depends only on the job pair (never on their positions), the
makespan of a permutation collapses to a sum over a precomputed pairwise delay
matrix plus the last job's total processing time. That precomputation is what
makes O(1) neighbor evaluation possible downstream.

All makespans are exact int64 arithmetic: benchmark times are small integers
and the largest reachable value stays far below 2**63.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels


def _frozen_int_matrix(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Instance:
    """A no-wait flowshop instance: ``proc[i][j]`` is job i's time on machine j."""

    proc: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "proc", _frozen_int_matrix(self.proc, "proc"))
        if self.proc.shape[0] < 1 or self.proc.shape[1] < 1:
            raise ValueError(f"instance needs at least one job and one machine, got {self.proc.shape}")
        if (self.proc < 1).any():
            raise ValueError("all processing times must be >= 1")

    @property
    def n_jobs(self) -> int:
        return self.proc.shape[0]

    @property
    def n_machines(self) -> int:
        return self.proc.shape[1]


@dataclass(frozen=True)
class DelayMatrix:
    """Pairwise start-up delays plus per-job totals; the evaluation kernel's data.

    ``d[i][k]`` is the delay forced between consecutive jobs i and k; it is a
    property of the pair alone. The diagonal is unused and kept at zero.
    Instances are immutable after construction and safe to share across
    workers.
    """

    d: np.ndarray
    job_total: np.ndarray
    n_machines: int

    def __post_init__(self):
        object.__setattr__(self, "d", _frozen_int_matrix(self.d, "d"))
        jt = np.ascontiguousarray(np.asarray(self.job_total, dtype=np.int64))
        jt.setflags(write=False)
        object.__setattr__(self, "job_total", jt)
        n = self.d.shape[0]
        if self.d.shape != (n, n):
            raise ValueError(f"delay matrix must be square, got {self.d.shape}")
        if jt.shape != (n,):
            raise ValueError(f"job_total length {jt.shape} does not match {n} jobs")

    @property
    def n_jobs(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class Evaluation:
    """A makespan, optionally with the per-position completion times."""

    makespan: int
    completion: tuple[int, ...] | None = None


def check_job(inst_or_dm, i: int) -> None:
    n = inst_or_dm.n_jobs
    if not 0 <= i < n:
        raise ValueError(f"job id {i} out of range for {n} jobs")


def check_permutation(perm: Sequence[int], n_jobs: int) -> np.ndarray:
    """Validate that ``perm`` is a bijection on 0..n_jobs-1; return it as int64."""
    arr = np.asarray(perm, dtype=np.int64)
    if arr.ndim != 1 or arr.shape[0] != n_jobs:
        raise ValueError(f"permutation must list all {n_jobs} jobs, got shape {arr.shape}")
    seen = np.zeros(n_jobs, dtype=bool)
    for v in arr:
        if not 0 <= v < n_jobs:
            raise ValueError(f"job id {v} out of range for {n_jobs} jobs")
        if seen[v]:
            raise ValueError(f"job id {v} appears more than once")
        seen[v] = True
    return arr


def delay(inst: Instance, i: int, k: int) -> int:
    """Start-up delay between consecutive jobs i and k (i first)."""
    check_job(inst, i)
    check_job(inst, k)
    if i == k:
        raise ValueError("delay needs two distinct jobs")
    p = inst.proc
    m = inst.n_machines
    best = 0
    gap = 0
    # For each prefix of machines, how far job k's chain would overrun job i's.
    for r in range(1, m):
        gap += int(p[i, r]) - int(p[k, r - 1])
        if gap > best:
            best = gap
    return int(p[i, 0]) + best


def build_delay_matrix(inst: Instance) -> DelayMatrix:
    """Precompute all pairwise delays and per-job totals in O(n^2 * m)."""
    p = inst.proc
    n, m = p.shape
    # head[i, r] = sum of p[i, 1..r]; lead[k, r] = sum of p[k, 0..r-1]  (r = 0..m-1)
    head = np.zeros((n, m), dtype=np.int64)
    lead = np.zeros((n, m), dtype=np.int64)
    if m > 1:
        head[:, 1:] = np.cumsum(p[:, 1:], axis=1)
        lead[:, 1:] = np.cumsum(p[:, :-1], axis=1)
    d = p[:, 0][:, None] + np.max(head[:, None, :] - lead[None, :, :], axis=2)
    np.fill_diagonal(d, 0)
    return DelayMatrix(d=d, job_total=p.sum(axis=1), n_machines=m)


def makespan(dm: DelayMatrix, perm: Sequence[int], *, with_completion: bool = False) -> Evaluation:
    """Evaluate a permutation against the delay matrix in O(n)."""
    arr = check_permutation(perm, dm.n_jobs)
    if with_completion:
        out = np.empty(arr.shape[0], dtype=np.int64)
        mk = kernels.completion_times(dm.d, dm.job_total, arr, out)
        return Evaluation(makespan=int(mk), completion=tuple(int(c) for c in out))
    return Evaluation(makespan=int(kernels.seq_makespan(dm.d, dm.job_total, arr)))


def makespan_simulate(inst: Instance, perm: Sequence[int], *, with_completion: bool = False) -> Evaluation:
    """Independent oracle: simulate the schedule from machine availability.

    Each job starts as early as machine exclusivity allows given that its
    operations chain through the machines with zero waiting. No pairwise
    delays are consulted, so this cross-checks the delay-based evaluation.
    """
    arr = check_permutation(perm, inst.n_jobs)
    p = inst.proc
    m = inst.n_machines
    # offset[x, j] = start of job x's machine-j operation relative to its own start
    offset = np.zeros((inst.n_jobs, m), dtype=np.int64)
    if m > 1:
        offset[:, 1:] = np.cumsum(p[:, :-1], axis=1)
    total = p.sum(axis=1)
    free = np.zeros(m, dtype=np.int64)
    completions = []
    for x in arr:
        start = max(0, int((free - offset[x]).max()))
        free = start + offset[x] + p[x]
        completions.append(start + int(total[x]))
    if with_completion:
        return Evaluation(makespan=completions[-1], completion=tuple(completions))
    return Evaluation(makespan=completions[-1])
