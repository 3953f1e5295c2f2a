"""Benchmark instance I/O: the published text format and the portable generator.

Benchmark files are machine-major: a header line ``n_jobs n_machines [seed ub
lb]``, an optional ``processing times`` banner, then one row per machine with
one integer per job. Instances keep the matrix job-major because the delay
formula walks one job's machines.

The generator is the benchmark's minimal-standard linear congruential
generator (multiplier 16807 on 2**31 - 1 with the Schrage split), drawing
uniform times in [1, 99] machine by machine, so the published per-instance
seeds reproduce the published files byte for byte.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import Instance

_LCG_A = 16807
_LCG_M = 2**31 - 1
_LCG_Q = 127773
_LCG_R = 2836


@dataclass(frozen=True)
class TaillardHeader:
    """The benchmark file header; seed and bounds are optional."""

    n_jobs: int
    n_machines: int
    seed: int | None = None
    upper_bound: int | None = None
    lower_bound: int | None = None


class ParseError(ValueError):
    """Malformed benchmark text, with 1-based line/column context."""

    def __init__(self, message: str, line: int, column: int | None = None):
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{message} ({where})")
        self.line = line
        self.column = column


def _int_tokens(raw: str, line_no: int) -> list[int]:
    out = []
    for tok in raw.split():
        try:
            out.append(int(tok))
        except ValueError:
            col = raw.index(tok) + 1
            raise ParseError(f"expected an integer, got {tok!r}", line_no, col) from None
    return out


def _parse(text: str) -> tuple[TaillardHeader, Instance]:
    lines = text.splitlines()
    rows: list[tuple[int, str]] = [
        (i + 1, raw) for i, raw in enumerate(lines) if raw.strip()
    ]
    if not rows:
        raise ParseError("empty instance text", 1)

    line_no, raw = rows[0]
    header_vals = _int_tokens(raw, line_no)
    if not 2 <= len(header_vals) <= 5:
        raise ParseError(
            f"header must hold 2-5 integers (n_jobs n_machines [seed ub lb]), got {len(header_vals)}",
            line_no,
        )
    n_jobs, n_machines = header_vals[0], header_vals[1]
    if n_jobs < 1 or n_machines < 1:
        raise ParseError(f"job/machine counts must be positive, got {n_jobs}x{n_machines}", line_no)
    extras = header_vals[2:] + [None] * (3 - len(header_vals[2:]))
    header = TaillardHeader(n_jobs, n_machines, *extras)

    body = rows[1:]
    if body and "processing times" in body[0][1].lower():
        body = body[1:]
    if len(body) != n_machines:
        raise ParseError(
            f"expected {n_machines} machine rows, found {len(body)}",
            body[-1][0] if body else line_no,
        )
    matrix = np.empty((n_machines, n_jobs), dtype=np.int64)
    for r, (row_no, raw_row) in enumerate(body):
        vals = _int_tokens(raw_row, row_no)
        if len(vals) != n_jobs:
            raise ParseError(f"expected {n_jobs} times on a machine row, found {len(vals)}", row_no)
        for c, v in enumerate(vals):
            if v < 1:
                col = raw_row.index(str(v)) + 1
                raise ParseError(f"processing time {v} must be >= 1", row_no, col)
            matrix[r, c] = v
    return header, Instance(proc=matrix.T)


def parse_taillard(text: str) -> Instance:
    """Parse benchmark text into a (job-major) instance."""
    return _parse(text)[1]


def parse_header(text: str) -> TaillardHeader:
    """Parse only the header line of benchmark text."""
    return _parse(text)[0]


def format_taillard(inst: Instance, seed: int | None = None) -> str:
    """Serialize an instance to the benchmark text format (machine-major)."""
    head = f"{inst.n_jobs} {inst.n_machines}" + (f" {seed}" if seed is not None else "")
    rows = [" ".join(str(int(v)) for v in inst.proc[:, j]) for j in range(inst.n_machines)]
    return "\n".join([head, "processing times"] + rows) + "\n"


def _lcg_next(seed: int) -> int:
    hi, lo = divmod(seed, _LCG_Q)
    seed = _LCG_A * lo - _LCG_R * hi
    return seed if seed > 0 else seed + _LCG_M


def generate_instance(n_jobs: int, m_machines: int, seed: int) -> Instance:
    """Draw an instance with i.i.d. uniform [1, 99] times from the portable LCG.

    Times are drawn machine-major (all jobs of machine 1, then machine 2, ...)
    to match the published files. The integer scaling below is exactly the
    reference trunc(seed / (2**31 - 1) * 99) at these magnitudes.
    """
    if n_jobs < 1 or m_machines < 1:
        raise ValueError(f"need at least one job and one machine, got {n_jobs}x{m_machines}")
    if not 0 < seed < _LCG_M:
        raise ValueError(f"seed must be in [1, {_LCG_M - 1}], got {seed}")
    matrix = np.empty((m_machines, n_jobs), dtype=np.int64)
    for j in range(m_machines):
        for i in range(n_jobs):
            seed = _lcg_next(seed)
            matrix[j, i] = 1 + seed * 99 // _LCG_M
    return Instance(proc=matrix.T)


# The 120 published instances: 10 per size class, with their published
# generator seeds. Named ta001..ta120 in file order.
SIZE_CLASSES: tuple[tuple[int, int], ...] = (
    (20, 5), (20, 10), (20, 20),
    (50, 5), (50, 10), (50, 20),
    (100, 5), (100, 10), (100, 20),
    (200, 10), (200, 20),
    (500, 20),
)

_BENCH_SEEDS: tuple[tuple[int, ...], ...] = (
    (873654221, 379008056, 1866992158, 216771124, 495070989,
     402959317, 1369363414, 2021925980, 573109518, 88325120),
    (587595453, 1401007982, 873136276, 268827376, 1634173168,
     691823909, 73807235, 1273398721, 2065119309, 1672900551),
    (479340445, 268827376, 1958948863, 918272953, 555010963,
     2010851491, 1519833303, 1748670931, 1923497586, 1829909967),
    (1328042058, 200382020, 496319842, 1203030903, 1730708564,
     450926852, 1303135678, 1273398721, 587288402, 248421594),
    (1958948863, 575633267, 655816003, 1977864101, 93805469,
     1803345551, 49612559, 1899802599, 2013025619, 578962478),
    (1539989115, 691823909, 655816003, 1315102446, 1949668355,
     1923497586, 1805594913, 1861070898, 715643788, 464843328),
    (896678084, 1179439976, 1122278347, 416756875, 267829958,
     1835213917, 1328833962, 1418570761, 161033112, 304212574),
    (1539989115, 655816003, 960914243, 1915696806, 2013025619,
     1168140026, 1923497586, 167698528, 1528387973, 993794175),
    (450926852, 1462772409, 1021685265, 83696007, 508154254,
     1861070898, 26482542, 444956424, 2115448041, 118254244),
    (471503978, 1215892992, 135346136, 1602504050, 160037322,
     551454346, 519485142, 383947510, 1968171878, 540872513),
    (2013025619, 475051709, 914834335, 810642687, 1019331795,
     2056065863, 1342855162, 1325809384, 1988803007, 765656702),
    (1368624604, 450181436, 1927888393, 1759567256, 606425239,
     19268348, 1298201670, 2041736264, 379756761, 28837162),
)

BENCHMARK: dict[str, tuple[int, int, int]] = {
    f"ta{10 * ci + k + 1:03d}": (n, m, seed)
    for ci, ((n, m), seeds) in enumerate(zip(SIZE_CLASSES, _BENCH_SEEDS))
    for k, seed in enumerate(seeds)
}


def benchmark_instance(name: str) -> Instance:
    """Regenerate a named benchmark instance from its published seed."""
    try:
        n, m, seed = BENCHMARK[name.lower()]
    except KeyError:
        raise ValueError(f"unknown benchmark instance {name!r} (expected ta001..ta120)") from None
    return generate_instance(n, m, seed)


def data_dir() -> Path | None:
    """Directory for user-supplied instance/registry files, if configured."""
    root = os.environ.get("NWFS_DATA")
    return Path(root) if root else None


def resolve_instance(spec: str) -> tuple[str, Instance]:
    """Load an instance from a path, the data directory, or the built-in table.

    ``spec`` may be a file path, or a benchmark name which is looked up first
    as ``$NWFS_DATA/<name>[.txt]`` and otherwise regenerated from the seed
    table. Returns (display name, instance).
    """
    path = Path(spec)
    if path.is_file():
        return path.stem, parse_taillard(path.read_text())
    root = data_dir()
    if root is not None:
        for candidate in (root / spec, root / f"{spec}.txt"):
            if candidate.is_file():
                return candidate.stem, parse_taillard(candidate.read_text())
    if spec.lower() in BENCHMARK:
        return spec.lower(), benchmark_instance(spec)
    raise ValueError(f"cannot resolve instance {spec!r}: not a file, not in NWFS_DATA, not a known name")
