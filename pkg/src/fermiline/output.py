"""Deterministic run outputs: CSV series and the run manifest.

CSV files carry comment-prefixed metadata headers (leading '#') with the
configuration digest, then one row per time with full-precision decimal
floats. Identical configurations produce byte-identical CSVs; anything
time-of-day dependent lives only in the manifest.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import config_digest

MANIFEST_NAME = "manifest.json"


def format_float(x) -> str:
    return format(float(x), ".17g")


def write_csv(path, columns: dict, meta: dict | None = None) -> None:
    """Column dict -> CSV with '#' metadata headers, full precision."""
    path = Path(path)
    names = list(columns)
    arrays = [np.asarray(columns[name]) for name in names]
    n = arrays[0].size
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key} = {value}")
    lines.append(f"# columns: {','.join(names)}")
    lines.append(",".join(names))
    for i in range(n):
        lines.append(",".join(format_float(a[i]) for a in arrays))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path) -> dict:
    """Inverse of :func:`write_csv` (metadata ignored)."""
    names = None
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#"):
            continue
        if names is None:
            names = line.split(",")
            continue
        rows.append([float(v) for v in line.split(",")])
    data = np.asarray(rows)
    return {name: data[:, j] for j, name in enumerate(names or [])}


def write_manifest(
    outdir,
    command: str,
    raw_config: dict,
    outputs: list,
    started: datetime,
    resolved: dict | None = None,
) -> Path:
    """One manifest per output directory, carrying the config digest."""
    outdir = Path(outdir)
    manifest = {
        "artifact_version": __version__,
        "command": command,
        "config_digest": config_digest(raw_config),
        "config": raw_config,
        "discretization_resolved": resolved or {},
        "started_utc": started.isoformat(),
        "finished_utc": datetime.now(timezone.utc).isoformat(),
        "outputs": sorted(str(p) for p in outputs),
    }
    path = outdir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def verify_manifest(path) -> bool:
    """Recompute the stored config's digest and compare."""
    body = json.loads(Path(path).read_text(encoding="utf-8"))
    return config_digest(body["config"]) == body["config_digest"]
