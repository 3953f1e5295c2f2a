"""Confidence-scheduled super-job search and its iterated, pool-refining wrapper.

The staged solver mines blocks from a pool of good local optima at the lowest
confidence level, builds a constructive meta-solution, then repeatedly
re-mines at higher confidence (finer blocks) and improves with Iterated
Greedy on the reduced problem. The incumbent survives phase changes by being
re-expressed over the finer partition, which is always possible because a
higher threshold can only split blocks, never merge them.

The iterated wrapper repeats the whole staged solver, feeding each round's
results back in as the next round's pool.
"""

from __future__ import annotations

import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .ig import IgConfig, default_temperature, iterated_greedy
from .model import DelayMatrix
from .superjobs import Pool, ReducedProblem, SuperJob, SuperJobSet, identify, project, reduce_problem


@dataclass(frozen=True)
class ConfidenceSchedule:
    """Strictly increasing confidence levels; a final ``inf`` disables mining."""

    levels: tuple[float, ...]

    def __post_init__(self):
        levels = tuple(float(x) for x in self.levels)
        if not levels:
            raise ValueError("schedule needs at least one confidence level")
        for x in levels:
            if not (math.isinf(x) and x > 0) and not 0 < x <= 100:
                raise ValueError(f"confidence {x} must be in (0, 100] or infinity")
        if any(a >= b for a, b in zip(levels, levels[1:])):
            raise ValueError(f"confidence levels must be strictly increasing, got {levels}")
        object.__setattr__(self, "levels", levels)

    def __iter__(self):
        return iter(self.levels)


SIGMA_COARSE = ConfidenceSchedule((60.0, 80.0, math.inf))
SIGMA_FINE = ConfidenceSchedule((60.0, 70.0, 80.0, 90.0, math.inf))


@dataclass
class IgsjConfig:
    """Staged-solver knobs; per-phase budgets derive from the meta-job count.

    A phase with ``n`` meta-jobs runs its inner Iterated Greedy for at most
    ``time_factor * n**2`` ms and ``noimprove_factor * n`` stagnant
    iterations; ``None`` disables that rule (at least one must be active).
    """

    schedule: ConfidenceSchedule = SIGMA_COARSE
    time_factor: float | None = 10.0
    noimprove_factor: float | None = 50.0
    destruction_size: int = 4
    tau: float = 0.4
    acceptance: str = "incumbent"
    seed: int | None = None

    def __post_init__(self):
        if isinstance(self.schedule, (tuple, list)):
            self.schedule = ConfidenceSchedule(tuple(self.schedule))
        if self.time_factor is None and self.noimprove_factor is None:
            raise ValueError("at least one of time_factor / noimprove_factor must be set")
        if self.time_factor is not None and self.time_factor <= 0:
            raise ValueError("time_factor must be positive")
        if self.noimprove_factor is not None and self.noimprove_factor <= 0:
            raise ValueError("noimprove_factor must be positive")

    def phase_ig(self, n_sj: int, temperature: float, seed: int) -> IgConfig:
        return IgConfig(
            destruction_size=self.destruction_size,
            temperature=temperature,
            max_time_ms=None if self.time_factor is None else self.time_factor * n_sj * n_sj,
            max_no_improve=None if self.noimprove_factor is None else int(self.noimprove_factor * n_sj),
            seed=seed,
            acceptance=self.acceptance,
        )


@dataclass
class IigsjConfig:
    """Iterated-wrapper knobs: rounds, pool width, and the learning sample size."""

    iterations: int = 5
    pool_width: int = 20
    sample_size: int = 10
    inner: IgsjConfig = field(default_factory=lambda: IgsjConfig(schedule=SIGMA_FINE, time_factor=1.0, noimprove_factor=25.0))
    seed: int | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 1 <= self.sample_size <= self.pool_width:
            raise ValueError("sample_size must be in [1, pool_width]")


@dataclass(frozen=True)
class PhaseRecord:
    """One line of a staged run's trace."""

    label: str
    sigma: float
    n_sj: int
    makespan: int
    elapsed_ms: float

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "sigma": None if math.isinf(self.sigma) else self.sigma,
            "n_sj": self.n_sj,
            "makespan": self.makespan,
            "elapsed_ms": round(self.elapsed_ms, 3),
        }


PhaseTrace = list[PhaseRecord]


def _sigma_label(sigma: float) -> str:
    return "inf" if math.isinf(sigma) else f"{sigma:g}"


def _derived_rng(seed, *path) -> random.Random:
    # String seeding hashes with SHA-512 under the hood, so child streams are
    # reproducible across processes and platforms regardless of launch order.
    return random.Random(":".join(str(x) for x in (seed, *path)))


def initial_solution(reduced: ReducedProblem, rng: random.Random) -> list[int]:
    """Constructive meta-solution: insertion build plus first-improvement descent.

    Blocks are inserted in decreasing order of their standalone completion
    time, each at the position minimizing the partial evaluation; the result
    is then hill-climbed (first improving reinsertion, random scan order per
    pass) to a meta-local optimum.
    """
    kernels.warmup()
    meta = reduced.as_delay_matrix()
    d, jt = meta.d, meta.job_total
    b = reduced.n_blocks
    weight = reduced.internal + reduced.tail
    order = sorted(range(b), key=lambda s: (-int(weight[s]), s))

    arr = np.empty(0, dtype=np.int64)
    mk = 0
    for s in order:
        pos, mk = kernels.insert_job_scan(d, jt, arr, s, mk)
        arr = np.insert(arr, int(pos), s)

    scan = np.arange(b, dtype=np.int64)
    while b >= 2:
        for i in range(b - 1, 0, -1):
            j = rng.randrange(i + 1)
            scan[i], scan[j] = scan[j], scan[i]
        new_mk = int(kernels.first_improvement_pass(d, jt, arr, mk, scan))
        if new_mk == mk:
            break
        mk = new_mk
    return [int(x) for x in arr]


def generate_pool(
    dm: DelayMatrix,
    count: int = 10,
    budget_per_run_ms: float | None = None,
    rng: random.Random | None = None,
    *,
    max_no_improve: int | None = None,
    destruction_size: int = 4,
    tau: float = 0.4,
    acceptance: str = "incumbent",
    workers: int = 1,
    source: str = "ig-run",
) -> Pool:
    """Independent Iterated Greedy runs whose best solutions form a pool.

    Each run starts from its own constructive solution and is capped at
    ``budget_per_run_ms`` (default: 10 ms per squared job count; ``inf``
    disables the time stop, making the pool replayable when a stagnation cap
    is given). Runs may be fanned out over processes; member order and seeds
    stay deterministic either way.
    """
    if count < 1:
        raise ValueError("pool size must be >= 1")
    if budget_per_run_ms is None:
        budget_per_run_ms = 10.0 * dm.n_jobs * dm.n_jobs
    elif math.isinf(budget_per_run_ms):
        budget_per_run_ms = None
        if max_no_improve is None:
            raise ValueError("an unbounded time budget needs a stagnation cap")
    rng = rng if rng is not None else random.Random()
    seeds = [rng.getrandbits(63) for _ in range(count)]
    temperature = default_temperature(dm, tau)
    args = [
        (dm, seed, budget_per_run_ms, max_no_improve, destruction_size, temperature, acceptance)
        for seed in seeds
    ]
    if workers > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=min(workers, count)) as pool:
            members = list(pool.map(_pool_run, args))
    else:
        members = [_pool_run(a) for a in args]
    return Pool(solutions=tuple(tuple(m) for m in members), source=source)


def _pool_run(args) -> list[int]:
    dm, seed, budget_ms, max_no_improve, dsize, temperature, acceptance = args
    kernels.warmup()
    singles = SuperJobSet(tuple(SuperJob((j,)) for j in range(dm.n_jobs)), math.inf)
    start = initial_solution(reduce_problem(dm, singles), _derived_rng(seed, "init"))
    cfg = IgConfig(
        destruction_size=dsize,
        temperature=temperature,
        max_time_ms=budget_ms,
        max_no_improve=max_no_improve,
        seed=seed,
        acceptance=acceptance,
    )
    return iterated_greedy(dm, start, cfg).best


def igsj(dm: DelayMatrix, pool: Pool, cfg: IgsjConfig) -> tuple[list[int], PhaseTrace]:
    """Staged solve: mine blocks, build, then improve at each confidence level.

    Returns the best full permutation found across all phases together with
    the per-phase trace. The incumbent is projected onto each finer partition,
    so every phase resumes from the previous one's best solution.
    """
    if pool.n_jobs != dm.n_jobs:
        raise ValueError(f"pool is over {pool.n_jobs} jobs, instance has {dm.n_jobs}")
    kernels.warmup()
    levels = list(cfg.schedule)
    temperature = default_temperature(dm, cfg.tau)
    trace: PhaseTrace = []

    t0 = time.perf_counter()
    sjs = identify(pool, levels[0])
    reduced = reduce_problem(dm, sjs)
    meta_order = initial_solution(reduced, _derived_rng(cfg.seed, "init"))
    incumbent = reduced.expand(meta_order)
    best = list(incumbent)
    best_mk = reduced.evaluate(meta_order)
    trace.append(
        PhaseRecord("init", levels[0], reduced.n_blocks, best_mk, (time.perf_counter() - t0) * 1000.0)
    )

    for idx, sigma in enumerate(levels):
        t0 = time.perf_counter()
        if idx > 0:
            sjs = identify(pool, sigma)
            reduced = reduce_problem(dm, sjs)
        blocks_index = {block: s for s, block in enumerate(sjs.blocks)}
        meta_order = [blocks_index[b] for b in project(incumbent, sjs)]
        n_sj = reduced.n_blocks
        ig_cfg = cfg.phase_ig(n_sj, temperature, _derived_rng(cfg.seed, "phase", idx).getrandbits(63))
        result = iterated_greedy(reduced.as_delay_matrix(dm.n_machines), meta_order, ig_cfg)
        incumbent = reduced.expand(result.best)
        if result.best_makespan < best_mk:
            best_mk = result.best_makespan
            best = list(incumbent)
        trace.append(
            PhaseRecord(
                f"ig-{_sigma_label(sigma)}",
                sigma,
                n_sj,
                best_mk,
                (time.perf_counter() - t0) * 1000.0,
            )
        )
    return best, trace


def iigsj(dm: DelayMatrix, p0: Pool, cfg: IigsjConfig) -> tuple[list[int], list[Pool]]:
    """Iterate the staged solver, re-learning from each round's solutions.

    Every round runs ``pool_width`` staged solves, each over ``sample_size``
    solutions drawn without replacement from the previous round's pool, and
    collects their results as the next pool. Returns the best permutation
    seen and all pools (input pool first).
    """
    if len(p0) < cfg.sample_size:
        raise ValueError(f"initial pool has {len(p0)} solutions, need at least {cfg.sample_size}")
    kernels.warmup()
    evals = [int(kernels.seq_makespan(dm.d, dm.job_total, np.asarray(s, dtype=np.int64))) for s in p0.solutions]
    best_idx = min(range(len(p0)), key=lambda i: (evals[i], i))
    best = list(p0.solutions[best_idx])
    best_mk = evals[best_idx]

    pools = [p0]
    prev = p0
    for i in range(1, cfg.iterations + 1):
        members: list[tuple[int, ...]] = []
        for k in range(cfg.pool_width):
            slot_rng = _derived_rng(cfg.seed, i, k)
            sample = slot_rng.sample(prev.solutions, cfg.sample_size)
            tmp = Pool(solutions=tuple(sample), source=f"iteration-{i}")
            inner_cfg = replace(cfg.inner, seed=slot_rng.getrandbits(63))
            pi, _ = igsj(dm, tmp, inner_cfg)
            members.append(tuple(pi))
            mk = int(kernels.seq_makespan(dm.d, dm.job_total, np.asarray(pi, dtype=np.int64)))
            if mk < best_mk:
                best_mk = mk
                best = list(pi)
        prev = Pool(solutions=tuple(members), source=f"iteration-{i}")
        pools.append(prev)
    return best, pools
