"""Command-line interface: solve, pool, enumerate, analyze, bench, gen."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import kernels
from .bench import ExperimentSpec, execute_run, run_experiment, summarize
from .igsj import _derived_rng, generate_pool
from .model import build_delay_matrix, makespan
from .neighborhood import enumerate_local_optima
from .superjobs import Pool, adjacency_frequency, format_blocks, identify
from .taillard import format_taillard, generate_instance, resolve_instance


def _parse_sigma_list(raw: str) -> tuple[float, ...]:
    out = []
    for tok in raw.split(","):
        tok = tok.strip().lower()
        out.append(math.inf if tok in ("inf", "infinity") else float(tok))
    return tuple(out)


def _add_instance_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", required=True, help="instance file path or benchmark name (ta001..ta120)")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master random seed")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--threads", type=int, default=1, help="worker processes for batched runs")


def cmd_solve(args) -> int:
    params = {
        "schedule": _parse_sigma_list(args.sigma),
        "time_factor": args.time_factor,
        "noimprove_factor": args.noimprove_factor,
        "destruction_size": args.destruction_size,
        "temperature_factor": args.temperature_factor,
        "acceptance": args.acceptance,
        "pool_size": args.pool_size,
        "pool_workers": args.threads,
    }
    if args.algo == "ig":
        params = {
            "destruction_size": args.destruction_size,
            "temperature_factor": args.temperature_factor,
            "acceptance": args.acceptance,
            "max_time_ms": args.max_time_ms,
            "max_no_improve": args.max_no_improve,
        }
        if params["max_time_ms"] is None and params["max_no_improve"] is None:
            params.pop("max_time_ms")  # fall back to the default time budget
            params.pop("max_no_improve")
    elif args.algo == "iigsj":
        params.update(iterations=args.iterations, pool_width=args.R, sample_size=args.rho)
        params["pool_size"] = args.R
    rec = execute_run(args.instance, args.algo, args.seed, params)
    for phase in rec.phases:
        print(json.dumps(phase))
    print(json.dumps({"instance": rec.instance, "algorithm": rec.algorithm,
                      "makespan": rec.makespan, "rpd": rec.rpd,
                      "elapsed_ms": round(rec.elapsed_ms, 1)}))
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"{rec.instance}-{rec.algorithm}-{rec.seed}.json").write_text(
            json.dumps(rec.to_dict(), indent=2) + "\n"
        )
    return 0


def cmd_pool(args) -> int:
    name, inst = resolve_instance(args.instance)
    dm = build_delay_matrix(inst)
    pool = generate_pool(
        dm,
        count=args.size,
        budget_per_run_ms=args.budget_ms,
        rng=_derived_rng(args.seed, "pool"),
        workers=args.threads,
    )
    payload = {
        "instance": name,
        "solutions": [list(s) for s in pool.solutions],
        "makespans": [makespan(dm, s).makespan for s in pool.solutions],
    }
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / f"{name}-pool.json"
        path.write_text(text)
        print(path)
    else:
        print(text, end="")
    return 0


def cmd_enumerate(args) -> int:
    _, inst = resolve_instance(args.instance)
    report = enumerate_local_optima(inst, keep=args.keep, cap=args.cap, allow_large=args.allow_large)
    perm, mk = report.global_optimum
    print(json.dumps({"global_optimum": {"makespan": mk, "permutation": list(perm)},
                      "enumerated": report.n_enumerated,
                      "local_optima_total": report.n_local_optima}))
    for perm, mk in report.local_optima:
        print(json.dumps({"makespan": mk, "permutation": list(perm)}))
    return 0


def cmd_analyze(args) -> int:
    payload = json.loads(Path(args.pool).read_text())
    pool = Pool(solutions=tuple(tuple(s) for s in payload["solutions"]), source="file")
    counts = adjacency_frequency(pool)
    for sigma in _parse_sigma_list(args.sigma):
        sjs = identify(pool, sigma)
        label = "inf" if math.isinf(sigma) else f"{sigma:g}"
        n_super = sum(1 for b in sjs.blocks if len(b) > 1)
        print(f"sigma={label}: {len(sjs)} jobs after merging, {n_super} super-jobs")
        print(f"  {format_blocks(sjs)}")
    if args.top:
        print("most frequent pairs:")
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[: args.top]
        for (a, b), c in ranked:
            print(f"  [{a} {b}] in {c}/{len(pool)} solutions")
    return 0


def cmd_bench(args) -> int:
    spec = ExperimentSpec(
        algorithm=args.algo,
        instances=tuple(s.strip() for s in args.instances.split(",")),
        replications=args.replications,
        base_seed=args.seed,
        params={
            "schedule": _parse_sigma_list(args.sigma),
            "time_factor": args.time_factor,
            "noimprove_factor": args.noimprove_factor,
            "pool_size": args.pool_size,
        }
        if args.algo != "ig"
        else {},
    )
    records = run_experiment(spec, out_dir=args.out, workers=args.threads)
    for row in summarize(records):
        mean_rpd = "n/a" if row["mean_rpd"] is None else f"{row['mean_rpd']:.3f}"
        print(
            f"{row['size']:>8}: {row['runs']} runs, mean RPD {mean_rpd}, "
            f"best {row['best_makespan']}, mean time {row['mean_elapsed_ms'] / 1000.0:.1f}s"
        )
        if row["mean_phase_ms"]:
            breakdown = "  ".join(f"{k}={v / 1000.0:.2f}s" for k, v in row["mean_phase_ms"].items())
            print(f"          phases: {breakdown}")
    return 0


def cmd_gen(args) -> int:
    if args.name:
        name, inst = resolve_instance(args.name)
        seed = None
    else:
        if args.jobs is None or args.machines is None:
            print("gen: need --name, or both --jobs and --machines", file=sys.stderr)
            return 2
        inst = generate_instance(args.jobs, args.machines, args.seed)
        name, seed = f"u{args.jobs}x{args.machines}s{args.seed}", args.seed
    text = format_taillard(inst, seed=seed)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / f"{name}.txt"
        path.write_text(text)
        print(path)
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nwfs", description="No-wait flowshop scheduling toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solver on one instance")
    _add_instance_arg(p)
    _add_common(p)
    p.add_argument("--algo", choices=("ig", "igsj", "iigsj"), default="igsj")
    p.add_argument("--sigma", default="60,80,inf", help="comma-separated confidence levels")
    p.add_argument("--pool-size", type=int, default=10)
    p.add_argument("--R", type=int, default=20, help="solutions built per outer iteration")
    p.add_argument("--rho", type=int, default=10, help="solutions sampled for learning")
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--time-factor", type=float, default=10.0)
    p.add_argument("--noimprove-factor", type=float, default=50.0)
    p.add_argument("--destruction-size", type=int, default=4)
    p.add_argument("--temperature-factor", type=float, default=0.4)
    p.add_argument("--max-time-ms", type=float, default=None, help="ig only: wall-clock budget")
    p.add_argument("--max-no-improve", type=int, default=None, help="ig only: stagnation budget")
    p.add_argument("--acceptance", choices=("incumbent", "best-ever"), default="incumbent")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("pool", help="generate a pool of good local optima")
    _add_instance_arg(p)
    _add_common(p)
    p.add_argument("--size", type=int, default=10)
    p.add_argument("--budget-ms", type=float, default=None, help="per-run budget (default 10ms * n^2)")
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("enumerate", help="exhaustively enumerate a small instance")
    _add_instance_arg(p)
    p.add_argument("--keep", type=int, default=10)
    p.add_argument("--cap", type=int, default=10)
    p.add_argument("--allow-large", action="store_true", help="permit up to 12 jobs (hours of compute)")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("analyze", help="report super-jobs mined from a saved pool")
    p.add_argument("--pool", required=True, help="pool JSON written by the pool command")
    p.add_argument("--sigma", default="60,80,90,100")
    p.add_argument("--top", type=int, default=0, help="also list the most frequent pairs")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bench", help="replicated batch with a summary table")
    _add_common(p)
    p.add_argument("--algo", choices=("ig", "igsj", "iigsj"), default="igsj")
    p.add_argument("--instances", required=True, help="comma-separated names/paths")
    p.add_argument("--replications", type=int, default=30)
    p.add_argument("--sigma", default="60,80,inf")
    p.add_argument("--pool-size", type=int, default=10)
    p.add_argument("--time-factor", type=float, default=10.0)
    p.add_argument("--noimprove-factor", type=float, default=50.0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="write a benchmark-format instance file")
    p.add_argument("--name", default=None, help="regenerate a named instance (ta001..ta120)")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--machines", type=int, default=None)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    kernels.warmup()
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
