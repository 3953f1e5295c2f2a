"""Best-known makespans for the 120 benchmark instances.

The registry ships as a JSON data file and is read-only at solve time: runs
report negative deviations when they beat an entry, they never write back.
A ``best_known.json`` in the ``NWFS_DATA`` directory overrides the packaged
table.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .taillard import data_dir

BestKnownRegistry = dict[str, int]


def load_best_known(path: str | Path | None = None) -> BestKnownRegistry:
    """Load the best-known table from ``path``, ``NWFS_DATA``, or the package."""
    if path is not None:
        text = Path(path).read_text()
    else:
        root = data_dir()
        override = root / "best_known.json" if root else None
        if override is not None and override.is_file():
            text = override.read_text()
        else:
            text = resources.files("nwfs.data").joinpath("best_known.json").read_text()
    raw = json.loads(text)
    registry: BestKnownRegistry = {}
    for name, value in raw.items():
        value = int(value)
        if value <= 0:
            raise ValueError(f"best-known value for {name} must be positive, got {value}")
        registry[str(name).lower()] = value
    return registry
