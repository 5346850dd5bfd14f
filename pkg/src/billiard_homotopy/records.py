"""Atomic JSON / CSV / JSON-lines writers and the run manifest."""
from __future__ import annotations

import csv
import io
import json
import os
import platform
import sys
import tempfile
from pathlib import Path


def _atomic_write(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path, obj) -> Path:
    return _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_csv(path, header, rows) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return _atomic_write(path, buf.getvalue())


def write_jsonl(path, objs) -> Path:
    return _atomic_write(path, "".join(json.dumps(o, sort_keys=True) + "\n" for o in objs))


def trajectory_dict(tr) -> dict:
    return {
        "r0": float(tr.r0),
        "duration": float(tr.duration),
        "vertices": [[float(x) for x in p] for p in tr.vertices],
        "events": [ev.as_dict() for ev in tr.events],
        "word": tr.word,
        "counts": tr.counts,
    }


def versions() -> dict:
    import mpmath
    import numpy
    import scipy

    from . import __version__
    return {
        "package": __version__,
        "python": sys.version.split()[0],
        "platform": platform.platform(terse=True),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "mpmath": mpmath.__version__,
    }


def manifest(config: dict, seed, wall_time: float, outputs) -> dict:
    return {
        "config": config,
        "seed": seed,
        "versions": versions(),
        "wall_time": wall_time,
        "outputs": sorted(str(p) for p in outputs),
    }
