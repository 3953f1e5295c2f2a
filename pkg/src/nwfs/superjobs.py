"""Mining shared sub-sequences from solution pools and reducing the problem.

Good local optima of the same instance tend to agree on runs of consecutive
jobs. Pairs that co-occur often enough across a pool are chained into maximal
blocks ("super-jobs"); treating each block as one meta-job yields a smaller
problem whose evaluation equals the expanded makespan exactly, because the
pairwise delays inside a block are position-independent.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .model import DelayMatrix, check_permutation


class ProjectionError(ValueError):
    """A block of the partition is not contiguous (in order) in the permutation."""


@dataclass(frozen=True)
class Pool:
    """Solutions mined for shared structure; all are permutations of one job set."""

    solutions: tuple[tuple[int, ...], ...]
    source: str = "ig-run"

    def __post_init__(self):
        if not self.solutions:
            raise ValueError("pool needs at least one solution")
        sols = tuple(tuple(int(x) for x in s) for s in self.solutions)
        n = len(sols[0])
        for s in sols:
            check_permutation(s, n)
        object.__setattr__(self, "solutions", sols)

    @property
    def n_jobs(self) -> int:
        return len(self.solutions[0])

    def __len__(self) -> int:
        return len(self.solutions)


@dataclass(frozen=True)
class SuperJob:
    """An ordered block of distinct jobs treated as a single meta-job."""

    jobs: tuple[int, ...]

    def __post_init__(self):
        jobs = tuple(int(x) for x in self.jobs)
        if not jobs:
            raise ValueError("a super-job holds at least one job")
        if len(set(jobs)) != len(jobs):
            raise ValueError(f"duplicate jobs in super-job {jobs}")
        object.__setattr__(self, "jobs", jobs)

    @property
    def first(self) -> int:
        return self.jobs[0]

    @property
    def last(self) -> int:
        return self.jobs[-1]

    def __len__(self) -> int:
        return len(self.jobs)


@dataclass(frozen=True)
class SuperJobSet:
    """A partition of the whole job set into ordered blocks.

    ``sigma`` records the confidence level the blocks were mined at;
    ``math.inf`` means no mining happened and every block is a singleton.
    """

    blocks: tuple[SuperJob, ...]
    sigma: float

    def __post_init__(self):
        blocks = tuple(self.blocks)
        object.__setattr__(self, "blocks", blocks)
        covered = [j for b in blocks for j in b.jobs]
        n = len(covered)
        if sorted(covered) != list(range(n)):
            raise ValueError("blocks must partition the job set 0..n-1")

    @property
    def n_jobs(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)


def adjacency_frequency(pool: Pool) -> dict[tuple[int, int], int]:
    """Count, per ordered pair (a, b), the pool solutions where b follows a."""
    counts: Counter[tuple[int, int]] = Counter()
    for sol in pool.solutions:
        for a, b in zip(sol, sol[1:]):
            counts[(a, b)] += 1
    return dict(counts)


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if math.isinf(sigma) and sigma > 0:
        return sigma
    if not 0 < sigma <= 100:
        raise ValueError(f"confidence must be in (0, 100] or infinity, got {sigma}")
    return sigma


def identify(pool: Pool, sigma: float) -> SuperJobSet:
    """Mine the longest sub-sequences appearing in at least ``sigma``% of the pool.

    Pairs above the frequency threshold are chained into maximal paths; a job
    with several surviving successors (or predecessors) keeps only the most
    frequent one (ties to the smaller partner id), and any cycle is broken at
    its least frequent edge. Every job not in a chain becomes a singleton.
    """
    sigma = _check_sigma(sigma)
    n = pool.n_jobs
    if math.isinf(sigma):
        return SuperJobSet(tuple(SuperJob((j,)) for j in range(n)), sigma)

    threshold = math.ceil(sigma * len(pool) / 100.0)
    counts = adjacency_frequency(pool)
    kept = {pair: c for pair, c in counts.items() if c >= threshold}

    succ_pick: dict[int, tuple[int, int]] = {}
    pred_pick: dict[int, tuple[int, int]] = {}
    for (a, b), c in kept.items():
        cur = succ_pick.get(a)
        if cur is None or (c, -b) > (cur[1], -cur[0]):
            succ_pick[a] = (b, c)
        cur = pred_pick.get(b)
        if cur is None or (c, -a) > (cur[1], -cur[0]):
            pred_pick[b] = (a, c)
    succ = {
        a: b
        for a, (b, _) in succ_pick.items()
        if pred_pick[b][0] == a
    }
    pred = {b: a for a, b in succ.items()}

    # Chains start at jobs without a surviving predecessor; whatever remains
    # reachable only through successors is a cycle.
    visited = set()
    chains: list[list[int]] = []
    for start in sorted(succ):
        if start in pred:
            continue
        chain = [start]
        visited.add(start)
        while chain[-1] in succ:
            nxt = succ[chain[-1]]
            chain.append(nxt)
            visited.add(nxt)
        chains.append(chain)
    for a in sorted(succ):
        if a in visited:
            continue
        cycle = [a]
        visited.add(a)
        while succ[cycle[-1]] != a:
            cycle.append(succ[cycle[-1]])
            visited.add(cycle[-1])
        drop = min(
            zip(cycle, cycle[1:] + [a]),
            key=lambda e: (kept[e], e),
        )
        chain = [drop[1]]
        while chain[-1] != drop[0]:
            chain.append(succ[chain[-1]])
        chains.append(chain)

    in_chain = {j for chain in chains for j in chain}
    blocks = [SuperJob(tuple(chain)) for chain in chains]
    blocks.extend(SuperJob((j,)) for j in range(n) if j not in in_chain)
    blocks.sort(key=lambda b: b.first)
    return SuperJobSet(tuple(blocks), sigma)


@dataclass(frozen=True)
class ReducedProblem:
    """The meta-problem that treats every block as a single job.

    ``meta_delay[s, t]`` is the original delay between the last job of block s
    and the first of block t; ``internal[s]`` the fixed delay cost inside s;
    ``tail[s]`` the total processing time of s's last job. For any ordering of
    the blocks, ``evaluate`` equals the makespan of the expanded permutation.
    """

    blocks: SuperJobSet
    meta_delay: np.ndarray
    internal: np.ndarray
    tail: np.ndarray
    internal_sum: int

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def evaluate(self, order: Sequence[int]) -> int:
        """Exact expanded makespan of the block ordering ``order``."""
        arr = check_permutation(order, self.n_blocks)
        return self.internal_sum + int(kernels.seq_makespan(self.meta_delay, self.tail, arr))

    def as_delay_matrix(self, n_machines: int = 1) -> DelayMatrix:
        """Recast as a delay matrix whose makespans equal expanded makespans.

        Folding each block's internal cost into its outgoing delays and its
        tail keeps the meta-problem evaluable by the ordinary kernel with no
        constant to carry around.
        """
        d = self.meta_delay + self.internal[:, None]
        np.fill_diagonal(d, 0)
        return DelayMatrix(d=d, job_total=self.tail + self.internal, n_machines=n_machines)

    def expand(self, order: Sequence[int]) -> list[int]:
        """Concatenate the blocks in the given order into a full permutation."""
        arr = check_permutation(order, self.n_blocks)
        return [j for idx in arr for j in self.blocks.blocks[idx].jobs]


def reduce_problem(dm: DelayMatrix, sjs: SuperJobSet) -> ReducedProblem:
    """Build the meta-problem for a block partition of ``dm``'s job set."""
    if sjs.n_jobs != dm.n_jobs:
        raise ValueError(f"partition covers {sjs.n_jobs} jobs, instance has {dm.n_jobs}")
    firsts = np.array([b.first for b in sjs.blocks], dtype=np.int64)
    lasts = np.array([b.last for b in sjs.blocks], dtype=np.int64)
    meta = dm.d[np.ix_(lasts, firsts)].copy()
    np.fill_diagonal(meta, 0)
    internal = np.array(
        [int(dm.d[np.array(b.jobs[:-1]), np.array(b.jobs[1:])].sum()) if len(b) > 1 else 0 for b in sjs.blocks],
        dtype=np.int64,
    )
    tail = dm.job_total[lasts]
    return ReducedProblem(
        blocks=sjs,
        meta_delay=meta,
        internal=internal,
        tail=tail,
        internal_sum=int(internal.sum()),
    )


def expand(meta_perm: Iterable[SuperJob]) -> list[int]:
    """Concatenate blocks into a permutation; blocks must not share jobs."""
    out: list[int] = []
    for block in meta_perm:
        out.extend(block.jobs)
    if len(set(out)) != len(out):
        raise ValueError("blocks overlap: a job appears in more than one")
    return out


def project(perm: Sequence[int], sjs: SuperJobSet) -> list[SuperJob]:
    """Re-express a full permutation as an ordering of the partition's blocks.

    Raises :class:`ProjectionError` when some block does not occur as a
    contiguous in-order run, which signals that the permutation was not built
    from (a refinement of) this partition.
    """
    arr = check_permutation(perm, sjs.n_jobs)
    start_of = {b.first: b for b in sjs.blocks}
    out: list[SuperJob] = []
    t = 0
    n = arr.shape[0]
    while t < n:
        block = start_of.get(int(arr[t]))
        if block is None:
            raise ProjectionError(
                f"job {int(arr[t])} at position {t} does not start any block"
            )
        run = tuple(int(x) for x in arr[t : t + len(block)])
        if run != block.jobs:
            raise ProjectionError(
                f"block {list(block.jobs)} is not contiguous at position {t} (found {list(run)})"
            )
        out.append(block)
        t += len(block)
    return out


def format_blocks(blocks: Iterable[SuperJob] | SuperJobSet) -> str:
    """Render blocks in the bracketed text form ``[a b c] [d] [e f]``."""
    if isinstance(blocks, SuperJobSet):
        blocks = blocks.blocks
    return " ".join("[" + " ".join(str(j) for j in b.jobs) + "]" for b in blocks)
