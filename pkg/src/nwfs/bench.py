"""Experiment runner: replicated solver runs, persisted records, summaries.

Each run produces one :class:`RunRecord`, appended as a JSON line and as a
CSV row so interrupted batches keep everything finished so far. Quality is
reported as the relative percentage deviation from the best-known makespan;
negative means a new best.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import kernels
from .ig import IgConfig, default_temperature, iterated_greedy
from .igsj import (
    ConfidenceSchedule,
    IgsjConfig,
    IigsjConfig,
    _derived_rng,
    generate_pool,
    igsj,
    iigsj,
)
from .model import build_delay_matrix, makespan
from .registry import BestKnownRegistry, load_best_known
from .taillard import resolve_instance

ALGORITHMS = ("ig", "igsj", "iigsj")


def rpd(cmax: int, best: int) -> float:
    """Relative percentage deviation of ``cmax`` from the best-known ``best``."""
    if best <= 0:
        raise ValueError(f"best-known makespan must be positive, got {best}")
    return (cmax - best) / best * 100.0


@dataclass
class RunRecord:
    """Everything one solver run produced, JSON-round-trippable."""

    instance: str
    size: str
    algorithm: str
    replication: int
    seed: int
    config: dict
    makespan: int
    rpd: float | None
    phases: list[dict]
    elapsed_ms: float
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "size": self.size,
            "algorithm": self.algorithm,
            "replication": self.replication,
            "seed": self.seed,
            "config": self.config,
            "makespan": self.makespan,
            "rpd": self.rpd,
            "phases": self.phases,
            "elapsed_ms": self.elapsed_ms,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "RunRecord":
        return cls(**raw)


@dataclass
class ExperimentSpec:
    """A batch: one algorithm across instances x replications, seeded."""

    algorithm: str
    instances: tuple[str, ...]
    replications: int
    base_seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.replications < 0:
            raise ValueError("replications must be >= 0")


def execute_run(
    instance_spec: str,
    algorithm: str,
    seed: int,
    params: dict | None = None,
    replication: int = 0,
    registry: BestKnownRegistry | None = None,
) -> RunRecord:
    """Resolve the instance, run one solver, and package the outcome."""
    params = dict(params or {})
    kernels.warmup()
    name, inst = resolve_instance(instance_spec)
    dm = build_delay_matrix(inst)
    n = dm.n_jobs
    t0 = time.perf_counter()

    pool_size = int(params.pop("pool_size", 10))
    pool_budget = params.pop("pool_budget_ms", None)
    pool_no_improve = params.pop("pool_no_improve", None)
    phases: list[dict] = []

    if algorithm == "ig":
        cfg = IgConfig(
            destruction_size=int(params.pop("destruction_size", 4)),
            temperature=params.pop(
                "temperature",
                default_temperature(dm, float(params.pop("temperature_factor", 0.4))),
            ),
            max_time_ms=params.pop("max_time_ms", 10.0 * n * n),
            max_no_improve=params.pop("max_no_improve", None),
            seed=seed,
            acceptance=params.pop("acceptance", "incumbent"),
        )
        start = _constructive_start(dm, seed)
        result = iterated_greedy(dm, start, cfg)
        final = result.best_makespan
        config = {"destruction_size": cfg.destruction_size, "temperature": cfg.temperature,
                  "max_time_ms": cfg.max_time_ms, "max_no_improve": cfg.max_no_improve,
                  "acceptance": cfg.acceptance}
        phases = [{"label": "ig", "iteration": it, "makespan": mk} for it, mk in result.improvement_trace]
    elif algorithm == "igsj":
        cfg = _igsj_config(params, seed)
        pool = generate_pool(dm, pool_size, pool_budget, _derived_rng(seed, "pool"),
                             max_no_improve=pool_no_improve,
                             workers=int(params.pop("pool_workers", 1)))
        best, trace = igsj(dm, pool, cfg)
        final = makespan(dm, best).makespan
        config = _igsj_config_dict(cfg) | {"pool_size": pool_size}
        phases = [p.as_dict() for p in trace]
    elif algorithm == "iigsj":
        inner = _igsj_config(params, None)
        icfg = IigsjConfig(
            iterations=int(params.pop("iterations", 5)),
            pool_width=int(params.pop("pool_width", 20)),
            sample_size=int(params.pop("sample_size", 10)),
            inner=inner,
            seed=seed,
        )
        pool = generate_pool(dm, icfg.pool_width, pool_budget, _derived_rng(seed, "pool"),
                             max_no_improve=pool_no_improve,
                             workers=int(params.pop("pool_workers", 1)))
        best, pools = iigsj(dm, pool, icfg)
        final = makespan(dm, best).makespan
        config = _igsj_config_dict(inner) | {
            "iterations": icfg.iterations, "pool_width": icfg.pool_width,
            "sample_size": icfg.sample_size,
        }
        phases = [
            {"label": f"iteration-{i}", "pool_best": min(makespan(dm, s).makespan for s in p.solutions)}
            for i, p in enumerate(pools)
        ]
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")

    if params:
        raise ValueError(f"unused parameters: {sorted(params)}")
    registry = registry if registry is not None else load_best_known()
    best_known = registry.get(name)
    return RunRecord(
        instance=name,
        size=f"{inst.n_jobs}x{inst.n_machines}",
        algorithm=algorithm,
        replication=replication,
        seed=seed,
        config=config,
        makespan=int(final),
        rpd=None if best_known is None else rpd(int(final), best_known),
        phases=phases,
        elapsed_ms=(time.perf_counter() - t0) * 1000.0,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )


def _constructive_start(dm, seed):
    import math

    from .igsj import initial_solution
    from .superjobs import SuperJob, SuperJobSet, reduce_problem

    singles = SuperJobSet(tuple(SuperJob((j,)) for j in range(dm.n_jobs)), math.inf)
    return initial_solution(reduce_problem(dm, singles), _derived_rng(seed, "init"))


def _igsj_config(params: dict, seed) -> IgsjConfig:
    schedule = params.pop("schedule", (60.0, 80.0, float("inf")))
    if not isinstance(schedule, ConfidenceSchedule):
        schedule = ConfidenceSchedule(tuple(schedule))
    return IgsjConfig(
        schedule=schedule,
        time_factor=params.pop("time_factor", 10.0),
        noimprove_factor=params.pop("noimprove_factor", 50.0),
        destruction_size=int(params.pop("destruction_size", 4)),
        tau=float(params.pop("temperature_factor", 0.4)),
        acceptance=params.pop("acceptance", "incumbent"),
        seed=seed,
    )


def _igsj_config_dict(cfg: IgsjConfig) -> dict:
    return {
        "schedule": [None if lvl == float("inf") else lvl for lvl in cfg.schedule],
        "time_factor": cfg.time_factor,
        "noimprove_factor": cfg.noimprove_factor,
        "destruction_size": cfg.destruction_size,
        "temperature_factor": cfg.tau,
        "acceptance": cfg.acceptance,
    }


def _run_one(args) -> RunRecord:
    instance_spec, algorithm, seed, params, replication = args
    return execute_run(instance_spec, algorithm, seed, params, replication)


def run_experiment(
    spec: ExperimentSpec,
    out_dir: str | Path | None = None,
    workers: int = 1,
    registry: BestKnownRegistry | None = None,
) -> list[RunRecord]:
    """Run the whole batch, persisting every record as it lands.

    Replications fan out to ``workers`` processes; records are written by this
    process only, appended to ``records.jsonl`` and ``runs.csv`` under
    ``out_dir``. A failed run is recorded (makespan 0, error note) without
    aborting the batch.
    """
    registry = registry if registry is not None else load_best_known()
    jobs = [
        (name, spec.algorithm, _derived_rng(spec.base_seed, name, rep).getrandbits(63), dict(spec.params), rep)
        for name in spec.instances
        for rep in range(spec.replications)
    ]
    records: list[RunRecord] = []
    sink = _RecordSink(out_dir)
    try:
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_one, job) for job in jobs]
                outcomes = [(job, fut) for job, fut in zip(jobs, futures)]
        else:
            outcomes = [(job, None) for job in jobs]
        for job, fut in outcomes:
            try:
                rec = fut.result() if fut is not None else _run_one(job)
                best = registry.get(rec.instance)
                rec.rpd = None if best is None else rpd(rec.makespan, best)
            except Exception as exc:  # keep the batch alive, note the failure
                rec = RunRecord(
                    instance=job[0], size="?", algorithm=spec.algorithm,
                    replication=job[4], seed=job[2], config={"error": str(exc)},
                    makespan=0, rpd=None, phases=[], elapsed_ms=0.0,
                    timestamp=datetime.now(timezone.utc).isoformat(),
                )
            records.append(rec)
            sink.write(rec)
    finally:
        sink.close()
    return records


class _RecordSink:
    """Append-only JSONL + CSV writers; no-op when no output directory given."""

    CSV_FIELDS = (
        "instance", "size", "algorithm", "replication", "seed",
        "makespan", "rpd", "elapsed_ms", "phase_breakdown",
    )

    def __init__(self, out_dir: str | Path | None):
        self._jsonl = self._csv = None
        self._writer = None
        if out_dir is None:
            return
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self._jsonl = (out / "records.jsonl").open("a")
        csv_path = out / "runs.csv"
        fresh = not csv_path.exists() or csv_path.stat().st_size == 0
        self._csv = csv_path.open("a", newline="")
        self._writer = csv.DictWriter(self._csv, fieldnames=self.CSV_FIELDS)
        if fresh:
            self._writer.writeheader()

    def write(self, rec: RunRecord) -> None:
        if self._jsonl is None:
            return
        self._jsonl.write(json.dumps(rec.to_dict()) + "\n")
        self._jsonl.flush()
        row = {k: getattr(rec, k) for k in self.CSV_FIELDS if k != "phase_breakdown"}
        row["phase_breakdown"] = ";".join(
            f"{p.get('label')}={p.get('makespan', p.get('pool_best', ''))}" for p in rec.phases
        )
        self._writer.writerow(row)
        self._csv.flush()

    def close(self) -> None:
        if self._jsonl is not None:
            self._jsonl.close()
            self._csv.close()


def summarize(records: list[RunRecord]) -> list[dict]:
    """Mean deviation, time, and per-phase time per instance size."""
    groups: dict[str, list[RunRecord]] = {}
    for rec in records:
        groups.setdefault(rec.size, []).append(rec)
    rows = []
    for size in sorted(groups, key=_size_key):
        recs = groups[size]
        rpds = [r.rpd for r in recs if r.rpd is not None]
        phase_ms: dict[str, list[float]] = {}
        for rec in recs:
            for p in rec.phases:
                if "elapsed_ms" in p:
                    phase_ms.setdefault(p["label"], []).append(p["elapsed_ms"])
        rows.append(
            {
                "size": size,
                "runs": len(recs),
                "mean_rpd": sum(rpds) / len(rpds) if rpds else None,
                "best_makespan": min(r.makespan for r in recs),
                "mean_elapsed_ms": sum(r.elapsed_ms for r in recs) / len(recs),
                "mean_phase_ms": {
                    label: sum(vals) / len(vals) for label, vals in phase_ms.items()
                },
            }
        )
    return rows


def _size_key(size: str) -> tuple[int, int]:
    try:
        n, m = size.split("x")
        return int(n), int(m)
    except ValueError:
        return (1 << 30, 0)
