"""Iterated Greedy: destruction-construction with simulated-annealing acceptance.

The loop perturbs the incumbent by removing a few random jobs and greedily
reinserting each at its best position, re-optimizes with the insertion local
search, and accepts worsening candidates with a Boltzmann probability at a
constant temperature. The best solution ever seen is tracked separately from
the incumbent and is what gets returned.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .model import DelayMatrix, check_permutation

ACCEPTANCE_MODES = ("incumbent", "best-ever")


@dataclass
class IgConfig:
    """Knobs for one Iterated Greedy run.

    ``max_time_ms`` / ``max_no_improve`` are the two stop rules; ``None``
    disables one of them, and at least one must be active. ``acceptance``
    selects what a candidate is compared against in the annealing test.
    """

    destruction_size: int = 4
    temperature: float = 0.0
    max_time_ms: float | None = None
    max_no_improve: int | None = None
    seed: int | None = None
    acceptance: str = "incumbent"

    def __post_init__(self):
        if self.destruction_size < 1:
            raise ValueError("destruction_size must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_time_ms is None and self.max_no_improve is None:
            raise ValueError("at least one stop rule (max_time_ms / max_no_improve) must be set")
        if self.acceptance not in ACCEPTANCE_MODES:
            raise ValueError(f"acceptance must be one of {ACCEPTANCE_MODES}")


@dataclass
class IgResult:
    best: list[int]
    best_makespan: int
    iterations: int
    elapsed_ms: float
    improvement_trace: list[tuple[int, int]] = field(default_factory=list)


def default_temperature(dm: DelayMatrix, tau: float = 0.4) -> float:
    """Constant acceptance temperature scaled from the mean processing time.

    tau = 0 degenerates to accepting improving candidates only.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    total = int(dm.job_total.sum())
    return total / (dm.n_jobs * dm.n_machines * 10) * tau


def destruct(perm: Sequence[int], d: int, rng: random.Random) -> tuple[list[int], list[int]]:
    """Remove ``d`` jobs at uniformly random positions.

    Returns (surviving partial sequence, removed jobs in draw order).
    """
    seq = list(perm)
    n = len(seq)
    if not 1 <= d < n:
        raise ValueError(f"destruction size {d} must be in [1, {n - 1}]")
    positions = rng.sample(range(n), d)
    removed = [seq[p] for p in positions]
    hit = set(positions)
    partial = [job for p, job in enumerate(seq) if p not in hit]
    return partial, removed


def construct(dm: DelayMatrix, partial: Sequence[int], removed: Sequence[int]) -> list[int]:
    """Greedily reinsert each removed job, in order, at its best position."""
    part = set(partial)
    gone = set(removed)
    if part & gone:
        raise ValueError("partial and removed sequences overlap")
    if len(part) != len(partial) or len(gone) != len(removed):
        raise ValueError("duplicate job ids")
    if len(part) + len(gone) != dm.n_jobs:
        raise ValueError("partial plus removed must cover the whole job set")
    arr = np.asarray(partial, dtype=np.int64)
    base = int(kernels.seq_makespan(dm.d, dm.job_total, arr)) if arr.shape[0] else 0
    arr, _ = _construct_arr(dm.d, dm.job_total, arr, base, removed)
    return [int(x) for x in arr]


def _construct_arr(d, jt, arr: np.ndarray, base: int, removed: Sequence[int]) -> tuple[np.ndarray, int]:
    for job in removed:
        pos, base = kernels.insert_job_scan(d, jt, arr, job, base)
        arr = np.insert(arr, int(pos), job)
    return arr, int(base)


def accept(candidate_mk: int, current_mk: int, temperature: float, rng: random.Random) -> bool:
    """Annealing-style test: always keep ties/improvements, else Boltzmann draw."""
    if candidate_mk <= current_mk:
        return True
    if temperature == 0:
        return False
    return rng.random() < math.exp(-(candidate_mk - current_mk) / temperature)


def iterated_greedy(dm: DelayMatrix, init: Sequence[int], cfg: IgConfig) -> IgResult:
    """Run Iterated Greedy from ``init`` until a stop rule fires.

    The initial solution is first driven to a local optimum; every candidate
    thereafter is one as well. The whole iteration loop runs compiled, in
    chunks sized to keep wall-clock checks around every 25 ms; the random
    stream is derived from ``cfg.seed`` alone, so stagnation-stopped runs
    replay bit-identically. The destruction size is clamped to n-1 on small
    (e.g. reduced) problems, and a single-job problem returns immediately.
    """
    kernels.warmup()
    arr = check_permutation(init, dm.n_jobs).copy()
    kernels.seed_rng(random.Random(cfg.seed).getrandbits(32))
    d, jt = dm.d, dm.job_total
    n = dm.n_jobs
    t0 = time.perf_counter()

    order = np.arange(n, dtype=np.int64)
    mk = int(kernels.seq_makespan(d, jt, arr))
    mk = int(kernels.descend(d, jt, arr, mk, order))
    best = arr.copy()
    best_mk = mk
    trace = [(0, best_mk)]
    if n == 1:
        return IgResult([int(best[0])], best_mk, 0, (time.perf_counter() - t0) * 1000.0, trace)

    dsize = min(cfg.destruction_size, n - 1)
    cur = arr
    cur_mk = mk
    iterations = 0
    no_improve = 0
    cap = -1 if cfg.max_no_improve is None else cfg.max_no_improve
    compare_best = cfg.acceptance == "best-ever"
    positions = np.empty(n, dtype=np.int64)
    partial = np.empty(n, dtype=np.int64)
    removed = np.empty(dsize, dtype=np.int64)
    removed_mask = np.zeros(n, dtype=np.bool_)
    chunk = 64
    while True:
        if cap >= 0 and no_improve >= cap:
            break
        if cfg.max_time_ms is not None:
            remaining_ms = cfg.max_time_ms - (time.perf_counter() - t0) * 1000.0
            if remaining_ms <= 0:
                break
        trace_iters = np.empty(chunk, dtype=np.int64)
        trace_mks = np.empty(chunk, dtype=np.int64)
        tc = time.perf_counter()
        cur_mk, best_mk, done, no_improve, n_trace, stagnated = kernels.ig_chunk(
            d, jt, cur, cur_mk, best, best_mk, dsize, cfg.temperature, compare_best,
            chunk, no_improve, cap, positions, order, partial, removed, removed_mask,
            trace_iters, trace_mks, iterations,
        )
        cur_mk, best_mk = int(cur_mk), int(best_mk)
        iterations += int(done)
        for t in range(int(n_trace)):
            trace.append((int(trace_iters[t]), int(trace_mks[t])))
        if stagnated:
            break
        spent = time.perf_counter() - tc
        if done and spent > 0:
            rate = done / spent
            budget_s = 0.025
            if cfg.max_time_ms is not None:
                left = cfg.max_time_ms / 1000.0 - (time.perf_counter() - t0)
                budget_s = min(budget_s, max(left, 0.001))
            chunk = int(min(max(rate * budget_s, 16), 1 << 16))

    elapsed = (time.perf_counter() - t0) * 1000.0
    return IgResult([int(x) for x in best], best_mk, iterations, elapsed, trace)
