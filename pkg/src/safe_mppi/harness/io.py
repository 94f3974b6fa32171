"""CSV / JSON-lines persistence with atomic writes."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .episode import EpisodeRecord, SnapshotRecord

EPISODE_HEADER = ["step", "t", "x", "y", "theta", "v", "omega", "q", "min_h", "safe_frac", "fallback"]
SNAPSHOT_HEADER = ["sample", "step", "x", "y", "theta", "cost", "safe"]


def fmt(value) -> str:
    """Decimal text with 9 significant digits; integers and flags stay exact."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".9g")


def _read_umask() -> int:
    umask = os.umask(0)
    os.umask(umask)
    return umask


# read once: os.umask is process-global and not safe to toggle from worker threads
_FILE_MODE = 0o666 & ~_read_umask()


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    atomic_write_bytes(path, text.encode("utf-8"))


def atomic_write_bytes(path, data: bytes) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.chmod(tmp, _FILE_MODE)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def table_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def write_table_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    atomic_write_text(path, table_text(header, rows))


def write_episode_csv(record: EpisodeRecord, path) -> None:
    rows = (
        (r.step, r.t, r.x, r.y, r.theta, r.v, r.omega, r.q, r.min_h, r.safe_frac, r.fallback)
        for r in record.rows
    )
    write_table_csv(path, EPISODE_HEADER, rows)


def write_snapshot_csv(snapshot: Optional[SnapshotRecord], path) -> None:
    rows = []
    if snapshot is not None:
        X = snapshot.trajectories
        for k in range(X.shape[0]):
            for t in range(X.shape[1]):
                rows.append((k, t, X[k, t, 0], X[k, t, 1], X[k, t, 2], snapshot.costs[k], bool(snapshot.safe[k])))
    write_table_csv(path, SNAPSHOT_HEADER, rows)


def read_table_csv(path, header: Sequence[str]) -> List[dict]:
    """Parse a CSV written by this module; values come back as floats."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            got = next(reader, None)
            if got != list(header):
                raise ValueError(f"{path}: unexpected header {got}")
            return [dict(zip(header, map(float, row))) for row in reader]
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read {path}: {exc.strerror}") from exc


def read_episode_csv(path) -> List[dict]:
    return read_table_csv(path, EPISODE_HEADER)


def read_snapshot_csv(path):
    """Return ``(trajectories (K, T+1, 3), costs (K,), safe (K,))``."""
    rows = read_table_csv(path, SNAPSHOT_HEADER)
    if not rows:
        return np.zeros((0, 0, 3)), np.zeros(0), np.zeros(0, dtype=bool)
    K = int(max(r["sample"] for r in rows)) + 1
    T1 = int(max(r["step"] for r in rows)) + 1
    X = np.zeros((K, T1, 3))
    costs = np.zeros(K)
    safe = np.zeros(K, dtype=bool)
    for r in rows:
        k, t = int(r["sample"]), int(r["step"])
        X[k, t] = (r["x"], r["y"], r["theta"])
        costs[k] = r["cost"]
        safe[k] = bool(r["safe"])
    return X, costs, safe


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_jsonl(path, records: Iterable[dict]) -> None:
    lines = [json.dumps(_json_safe(r), sort_keys=True) for r in records]
    atomic_write_text(path, "".join(line + "\n" for line in lines))


def read_jsonl(path) -> List[dict]:
    try:
        with open(path) as fh:
            return [json.loads(line) for line in fh if line.strip()]
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read {path}: {exc.strerror}") from exc
