import itertools
import math
import random

import pytest

from nwfs.model import build_delay_matrix, makespan
from nwfs.superjobs import (
    Pool,
    ProjectionError,
    SuperJob,
    SuperJobSet,
    adjacency_frequency,
    expand,
    format_blocks,
    identify,
    project,
    reduce_problem,
)

from conftest import random_instance


def random_partition(rng: random.Random, n: int, max_blocks: int | None = None) -> SuperJobSet:
    jobs = list(range(n))
    rng.shuffle(jobs)
    blocks, start = [], 0
    while start < n:
        size = rng.randint(1, n - start)
        blocks.append(SuperJob(tuple(jobs[start : start + size])))
        start += size
    if max_blocks is not None:
        while len(blocks) > max_blocks:
            merged = SuperJob(blocks[-2].jobs + blocks[-1].jobs)
            blocks = blocks[:-2] + [merged]
    return SuperJobSet(tuple(blocks), sigma=math.inf)


class TestAdjacencyFrequency:
    def test_single_solution(self):
        pool = Pool(solutions=((0, 1, 2),))
        assert adjacency_frequency(pool) == {(0, 1): 1, (1, 2): 1}

    def test_curated_pool_counts(self, twelve_job_pool):
        counts = adjacency_frequency(twelve_job_pool)
        assert counts[(11, 2)] == 11
        assert counts[(0, 4)] == 11
        assert counts[(9, 1)] == 10

    def test_total_count(self, twelve_job_pool):
        counts = adjacency_frequency(twelve_job_pool)
        assert sum(counts.values()) == len(twelve_job_pool) * (twelve_job_pool.n_jobs - 1)


class TestIdentify:
    def test_infinite_confidence_gives_singletons(self, twelve_job_pool):
        sjs = identify(twelve_job_pool, math.inf)
        assert all(len(b) == 1 for b in sjs.blocks)
        assert len(sjs) == 12

    def test_full_confidence(self, twelve_job_pool):
        sjs = identify(twelve_job_pool, 100)
        multi = {b.jobs for b in sjs.blocks if len(b) > 1}
        assert multi == {(11, 2), (0, 4)}
        assert len(sjs) == 10

    def test_ninety_percent(self, twelve_job_pool):
        sjs = identify(twelve_job_pool, 90)
        multi = {b.jobs for b in sjs.blocks if len(b) > 1}
        assert multi == {(11, 2), (0, 4), (9, 1)}

    def test_identical_pool_collapses_to_one_block(self):
        pool = Pool(solutions=((3, 1, 0, 2),) * 4)
        sjs = identify(pool, 100)
        assert len(sjs) == 1
        assert sjs.blocks[0].jobs == (3, 1, 0, 2)

    def test_chains_merge_shared_endpoint(self):
        # (0,1) and (1,2) both above threshold merge into [0 1 2]
        pool = Pool(solutions=((0, 1, 2, 3), (3, 0, 1, 2)))
        sjs = identify(pool, 100)
        assert SuperJob((0, 1, 2)) in sjs.blocks

    def test_successor_conflict_resolved_by_count_then_id(self):
        # 0 is followed by 1 twice and by 2 once; at 30% both pairs survive
        pool = Pool(solutions=((0, 1, 2), (0, 1, 2), (0, 2, 1)))
        sjs = identify(pool, 30)
        blocks = {b.jobs for b in sjs.blocks}
        assert (0, 1, 2) in blocks

    def test_cycle_broken_at_weakest_edge(self):
        # rotations make (0,1), (1,2), (2,0) equally frequent: a 3-cycle
        pool = Pool(solutions=((0, 1, 2), (1, 2, 0), (2, 0, 1)))
        sjs = identify(pool, 60)
        assert len(sjs) == 1  # one chain after dropping one edge
        assert len(sjs.blocks[0]) == 3

    def test_partition_property_random(self):
        rng = random.Random(67)
        for _ in range(30):
            n = rng.randint(2, 12)
            sols = []
            for _ in range(rng.randint(1, 8)):
                s = list(range(n))
                rng.shuffle(s)
                sols.append(tuple(s))
            pool = Pool(solutions=tuple(sols))
            sigma = rng.choice([20, 40, 50, 60, 75, 90, 100, math.inf])
            sjs = identify(pool, sigma)
            assert sorted(j for b in sjs.blocks for j in b.jobs) == list(range(n))

    def test_monotone_refinement(self):
        rng = random.Random(71)
        for _ in range(25):
            n = rng.randint(3, 10)
            base = list(range(n))
            sols = []
            for _ in range(rng.randint(2, 7)):
                s = base[:]
                # mutate a few positions so shared structure survives
                for _ in range(rng.randint(0, 3)):
                    i, k = rng.sample(range(n), 2)
                    s.insert(k, s.pop(i))
                sols.append(tuple(s))
            pool = Pool(solutions=tuple(sols))
            coarse = identify(pool, 60)
            fine = identify(pool, 90)
            coarse_runs = {b.jobs: None for b in coarse.blocks}
            for block in fine.blocks:
                assert any(
                    _is_contiguous_run(block.jobs, big) for big in coarse_runs
                ), f"{block.jobs} not inside any of {list(coarse_runs)}"

    def test_rejects_bad_sigma(self, twelve_job_pool):
        for bad in (0, -5, 101, 150):
            with pytest.raises(ValueError):
                identify(twelve_job_pool, bad)

    def test_threshold_uses_ceiling(self):
        # 65% of 10 solutions means at least 7 occurrences
        sols = [(0, 1, 2)] * 7 + [(1, 0, 2)] * 3
        sjs = identify(Pool(solutions=tuple(sols)), 65)
        blocks = {b.jobs for b in sjs.blocks}
        assert (0, 1, 2) in blocks
        sols = [(0, 1, 2)] * 6 + [(1, 0, 2)] * 4
        sjs = identify(Pool(solutions=tuple(sols)), 65)
        assert (0, 1) not in {b.jobs for b in sjs.blocks if len(b) > 1}


def _is_contiguous_run(small: tuple, big: tuple) -> bool:
    if len(small) > len(big):
        return False
    return any(big[t : t + len(small)] == small for t in range(len(big) - len(small) + 1))


class TestReduce:
    def test_all_singletons_degenerates_to_original(self):
        rng = random.Random(73)
        inst = random_instance(rng, 5, 3)
        dm = build_delay_matrix(inst)
        sjs = SuperJobSet(tuple(SuperJob((j,)) for j in range(5)), sigma=math.inf)
        red = reduce_problem(dm, sjs)
        assert red.internal_sum == 0
        assert (red.meta_delay == dm.d).all()
        assert (red.tail == dm.job_total).all()
        perm = [3, 1, 4, 0, 2]
        assert red.evaluate(perm) == makespan(dm, perm).makespan

    def test_evaluate_equals_expanded_makespan_exhaustively(self):
        rng = random.Random(79)
        for _ in range(15):
            n = rng.randint(3, 8)
            inst = random_instance(rng, n, rng.randint(1, 4))
            dm = build_delay_matrix(inst)
            sjs = random_partition(rng, n, max_blocks=6)
            red = reduce_problem(dm, sjs)
            for order in itertools.permutations(range(len(sjs))):
                full = red.expand(order)
                assert red.evaluate(order) == makespan(dm, full).makespan

    def test_folded_matrix_matches_evaluate(self):
        rng = random.Random(83)
        inst = random_instance(rng, 7, 3)
        dm = build_delay_matrix(inst)
        sjs = random_partition(rng, 7, max_blocks=4)
        red = reduce_problem(dm, sjs)
        meta_dm = red.as_delay_matrix()
        for order in itertools.permutations(range(len(sjs))):
            assert makespan(meta_dm, order).makespan == red.evaluate(order)

    def test_rejects_non_partition(self, tiny_instance):
        dm = build_delay_matrix(tiny_instance)
        with pytest.raises(ValueError):
            reduce_problem(dm, SuperJobSet((SuperJob((0,)),), sigma=math.inf))


class TestExpandProject:
    def test_expand_examples(self):
        assert expand([SuperJob((2,)), SuperJob((0,)), SuperJob((1,))]) == [2, 0, 1]
        assert expand([SuperJob((9, 1)), SuperJob((0, 4))]) == [9, 1, 0, 4]

    def test_expand_rejects_overlap(self):
        with pytest.raises(ValueError):
            expand([SuperJob((0, 1)), SuperJob((1, 2))])

    def test_project_round_trip(self):
        blocks = SuperJobSet((SuperJob((9, 1)), SuperJob((0, 4)), *(SuperJob((j,)) for j in (2, 3, 5, 6, 7, 8))), sigma=100.0)
        order = [blocks.blocks[0], blocks.blocks[1]] + list(blocks.blocks[2:])
        perm = expand(order)
        assert project(perm, blocks) == order

    def test_project_detects_split_block(self):
        blocks = SuperJobSet((SuperJob((9, 1)), SuperJob((0, 4)), *(SuperJob((j,)) for j in (2, 3, 5, 6, 7, 8))), sigma=100.0)
        with pytest.raises(ProjectionError):
            project([1, 9, 0, 4, 2, 3, 5, 6, 7, 8], blocks)

    def test_project_identity_on_singletons(self):
        sjs = SuperJobSet(tuple(SuperJob((j,)) for j in range(4)), sigma=math.inf)
        assert [b.jobs[0] for b in project([2, 0, 3, 1], sjs)] == [2, 0, 3, 1]


class TestTypesAndFormat:
    def test_pool_validation(self):
        with pytest.raises(ValueError):
            Pool(solutions=())
        with pytest.raises(ValueError):
            Pool(solutions=((0, 1), (0, 0)))
        with pytest.raises(ValueError):
            Pool(solutions=((0, 1), (0, 1, 2)))

    def test_superjob_validation(self):
        with pytest.raises(ValueError):
            SuperJob(())
        with pytest.raises(ValueError):
            SuperJob((1, 1))

    def test_partition_validation(self):
        with pytest.raises(ValueError):
            SuperJobSet((SuperJob((0,)), SuperJob((0, 1))), sigma=50.0)

    def test_format_blocks(self):
        sjs = SuperJobSet((SuperJob((0, 4)), SuperJob((1,)), SuperJob((2, 3))), sigma=80.0)
        assert format_blocks(sjs) == "[0 4] [1] [2 3]"
