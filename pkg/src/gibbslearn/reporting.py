"""Artifact plumbing shared by the command-line tools.

CSV output is deterministic by construction: comma-separated, one header
row, LF line endings, floats printed at 12 significant digits.  Replaying a
manifest must reproduce every CSV byte for byte, so anything that varies
between runs (wall-clock timings, timestamps) is kept out of CSV files and
lands in JSON sidecars instead.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone

import numpy as np

__all__ = [
    "fmt_cell",
    "csv_body",
    "write_csv",
    "write_json",
    "read_json",
    "trial_seed",
    "utc_now",
    "new_manifest",
    "is_manifest",
]

MANIFEST_KEY = "gibbslearn_manifest"


def fmt_cell(value) -> str:
    """One CSV cell: floats at 12 significant digits, everything else as str."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return "%.12g" % float(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def csv_body(header, rows) -> str:
    lines = [",".join(str(h) for h in header)]
    lines.extend(",".join(fmt_cell(c) for c in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows) -> None:
    body = csv_body(header, rows)
    with open(path, "w", newline="") as fh:  # body already uses LF only
        fh.write(body)


def write_json(path, obj) -> None:
    with open(path, "w", newline="") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)!r}")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def trial_seed(master_seed: int, index: int) -> int:
    """Substream seed for one trial, independent of execution order."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(seq.generate_state(1, np.uint64)[0])


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def new_manifest(command: str, config: dict, master_seed: int, version: str) -> dict:
    """Skeleton manifest; the caller appends output paths and trial seeds."""
    return {
        MANIFEST_KEY: 1,
        "command": command,
        "config": config,
        "master_seed": int(master_seed),
        "tool_version": version,
        "created_utc": utc_now(),
        "outputs": [],
        "trial_seeds": [],
    }


def is_manifest(obj: dict) -> bool:
    return isinstance(obj, dict) and MANIFEST_KEY in obj
