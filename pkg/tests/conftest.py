import random

import numpy as np
import pytest

from nwfs.model import Instance
from nwfs.superjobs import Pool


def random_instance(rng: random.Random, n_jobs: int, n_machines: int, lo: int = 1, hi: int = 9) -> Instance:
    proc = [[rng.randint(lo, hi) for _ in range(n_machines)] for _ in range(n_jobs)]
    return Instance(proc=np.array(proc, dtype=np.int64))


@pytest.fixture
def tiny_instance() -> Instance:
    # 2 jobs x 2 machines, delays 4 and 1, makespans 7 ([0,1]) and 6 ([1,0])
    return Instance(proc=np.array([[2, 3], [1, 2]], dtype=np.int64))


# Curated pool: eleven insertion-local optima of one 12-job instance. The
# pairs (11,2) and (0,4) are adjacent in all eleven solutions, (9,1) in ten.
TWELVE_JOB_SOLUTIONS = (
    (8, 3, 7, 5, 10, 9, 1, 0, 4, 6, 11, 2),
    (8, 3, 7, 11, 2, 5, 10, 9, 1, 0, 4, 6),
    (8, 10, 9, 1, 0, 4, 7, 5, 3, 11, 2, 6),
    (8, 3, 5, 10, 6, 0, 4, 7, 11, 2, 9, 1),
    (8, 3, 5, 10, 6, 0, 4, 7, 9, 1, 11, 2),
    (8, 10, 6, 0, 4, 7, 5, 3, 9, 1, 11, 2),
    (8, 3, 7, 11, 2, 5, 10, 9, 6, 0, 4, 1),
    (8, 3, 5, 10, 9, 1, 11, 2, 7, 6, 0, 4),
    (8, 10, 6, 0, 4, 7, 5, 3, 11, 2, 9, 1),
    (8, 10, 9, 1, 0, 4, 7, 3, 5, 6, 11, 2),
    (8, 3, 7, 10, 9, 1, 11, 2, 5, 6, 0, 4),
)


@pytest.fixture
def twelve_job_pool() -> Pool:
    return Pool(solutions=TWELVE_JOB_SOLUTIONS, source="file")
