"""No-wait flowshop scheduling toolkit.

Delay-based makespan evaluation, insertion-neighborhood local search,
Iterated Greedy, and the super-job solvers that mine shared sub-sequences
from solution pools, plus a benchmark harness around the 120 classic
instances.
"""

from .ig import IgConfig, IgResult, accept, construct, default_temperature, destruct, iterated_greedy
from .igsj import (
    SIGMA_COARSE,
    SIGMA_FINE,
    ConfidenceSchedule,
    IgsjConfig,
    IigsjConfig,
    PhaseRecord,
    generate_pool,
    igsj,
    iigsj,
    initial_solution,
)
from .model import (
    DelayMatrix,
    Evaluation,
    Instance,
    build_delay_matrix,
    delay,
    makespan,
    makespan_simulate,
)
from .neighborhood import (
    InsertionMove,
    LocalOptimaReport,
    apply_insertion,
    best_insertion,
    delta_makespan,
    enumerate_local_optima,
    local_search,
)
from .superjobs import (
    Pool,
    ProjectionError,
    ReducedProblem,
    SuperJob,
    SuperJobSet,
    adjacency_frequency,
    expand,
    format_blocks,
    identify,
    project,
    reduce_problem,
)
from .taillard import (
    BENCHMARK,
    ParseError,
    TaillardHeader,
    benchmark_instance,
    format_taillard,
    generate_instance,
    parse_taillard,
    resolve_instance,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
