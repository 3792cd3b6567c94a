"""File formats: distribution / counts CSV, constraint JSON, atomic writes.

Distribution CSV::

    cell_index,bitmask,prob
    0,000,0.125
    ...

``bitmask`` is the cell written in binary with J digits, symptom J-1
leftmost. Probabilities are written with 17 significant digits so that a
float64 survives the round trip exactly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Optional

import numpy as np

from .model import (
    ConstraintSet,
    Distribution,
    EmpiricalCounts,
    ExpertMixError,
    MarginalBound,
    OutcomeSpace,
)

SCHEMA_VERSION = 1


def format_float(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".17g")


def atomic_write_text(path, text: str) -> None:
    """Write to a temp file next to ``path`` then rename over it."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def json_safe(obj):
    # strict JSON has no inf/nan
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else format_float(obj)
    if isinstance(obj, dict):
        return {k: json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return json_safe(obj.item())
    return obj


def json_dumps(obj: dict) -> str:
    return json.dumps(json_safe({"schema": SCHEMA_VERSION, **obj}), indent=2, sort_keys=True,
                      allow_nan=False) + "\n"


def write_json(path, obj: dict) -> None:
    atomic_write_text(path, json_dumps(obj))


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def distribution_to_csv(dist: Distribution) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cell_index", "bitmask", "prob"])
    for i, p in enumerate(dist.probs):
        w.writerow([i, dist.space.bitmask(i), format_float(p)])
    return buf.getvalue()


def write_distribution_csv(dist: Distribution, path) -> None:
    atomic_write_text(path, distribution_to_csv(dist))


def _rows(path, header):
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            first = next(reader, None)
            if first is None or [c.strip() for c in first] != header:
                raise ExpertMixError(f"{path}: expected header {','.join(header)}", source=str(path))
            return [r for r in reader if r]
    except OSError as exc:
        raise ExpertMixError(f"{path}: {exc.strerror}", source=str(path)) from exc


def _cell_indices(path, rows):
    try:
        idx = [int(r[0]) for r in rows]
    except (ValueError, IndexError) as exc:
        raise ExpertMixError(f"{path}: malformed cell_index column", source=str(path)) from exc
    if idx != list(range(len(idx))):
        bad = next(k for k, i in enumerate(idx) if i != k)
        raise ExpertMixError(f"{path}: row {bad + 2}: cell_index {idx[bad]} out of order",
                             source=str(path))
    return idx


def read_distribution_csv(path, space: Optional[OutcomeSpace] = None) -> Distribution:
    rows = _rows(path, ["cell_index", "bitmask", "prob"])
    _cell_indices(path, rows)
    if space is None:
        try:
            space = OutcomeSpace.from_cell_count(len(rows))
        except ExpertMixError as exc:
            raise ExpertMixError(f"{path}: {exc}", source=str(path)) from exc
    elif len(rows) != space.cell_count:
        raise ExpertMixError(f"{path}: {len(rows)} rows but {space.cell_count} cells expected",
                             source=str(path))
    probs = np.empty(len(rows))
    for k, r in enumerate(rows):
        if len(r) != 3 or r[1] != space.bitmask(k):
            raise ExpertMixError(f"{path}: row {k + 2}: bitmask {r[1:2]} does not match cell {k}",
                                 source=str(path))
        try:
            probs[k] = float(r[2])
        except ValueError as exc:
            raise ExpertMixError(f"{path}: row {k + 2}: bad probability {r[2]!r}",
                                 source=str(path)) from exc
    try:
        return Distribution(probs, space)
    except ExpertMixError as exc:
        raise ExpertMixError(f"{path}: {exc}", source=str(path)) from exc


def counts_to_csv(counts: EmpiricalCounts) -> str:
    lines = ["cell_index,count"] + [f"{i},{c}" for i, c in enumerate(counts.counts)]
    return "\n".join(lines) + "\n"


def write_counts_csv(counts: EmpiricalCounts, path) -> None:
    atomic_write_text(path, counts_to_csv(counts))


def read_counts_csv(path, n: Optional[int] = None) -> EmpiricalCounts:
    """Read counts; ``n``, if given, must equal the column sum."""
    rows = _rows(path, ["cell_index", "count"])
    _cell_indices(path, rows)
    try:
        counts = [int(r[1]) for r in rows]
    except (ValueError, IndexError) as exc:
        raise ExpertMixError(f"{path}: malformed count column", source=str(path)) from exc
    try:
        return EmpiricalCounts(np.array(counts, dtype=np.int64), n)
    except ExpertMixError as exc:
        raise ExpertMixError(f"{path}: {exc}", source=str(path)) from exc


def constraints_to_dict(constraints: ConstraintSet, space: OutcomeSpace) -> dict:
    labels = list(space.labels) if space.labels else [f"B{j + 1}" for j in range(space.symptom_count)]
    return {
        "symptoms": labels,
        "marginals": [{"index": b.index, "lo": b.lo, "hi": b.hi} for b in constraints.marginal_bounds],
        "forbidden_cells": sorted(constraints.forbidden_cells),
        "min_present": constraints.min_present,
    }


def write_constraints_json(constraints: ConstraintSet, space: OutcomeSpace, path) -> None:
    atomic_write_text(path, json.dumps(constraints_to_dict(constraints, space), indent=2) + "\n")


def parse_constraints(obj: dict, source: str = "<constraints>"):
    """Build ``(ConstraintSet, OutcomeSpace)`` from the JSON object form."""
    def fail(msg):
        raise ExpertMixError(f"{source}: {msg}", source=source)

    if not isinstance(obj, dict):
        fail("top level must be an object")
    symptoms = obj.get("symptoms")
    if not isinstance(symptoms, list) or not symptoms:
        fail("field 'symptoms' must be a non-empty list")
    try:
        space = OutcomeSpace(len(symptoms), tuple(symptoms))
        bounds = []
        for k, m in enumerate(obj.get("marginals") or []):
            try:
                bounds.append(MarginalBound(int(m["index"]), float(m["lo"]), float(m["hi"])))
            except (KeyError, TypeError, ValueError):
                fail(f"field 'marginals[{k}]' needs numeric index, lo, hi")
        mp = obj.get("min_present")
        cs = ConstraintSet(tuple(bounds), frozenset(obj.get("forbidden_cells") or []),
                           None if mp is None else int(mp))
        cs.validate(space)
    except ExpertMixError as exc:
        if exc.source:
            raise
        fail(str(exc))
    return cs, space


def read_constraints_json(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ExpertMixError(f"{path}: {exc.strerror}", source=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise ExpertMixError(f"{path}: invalid JSON ({exc.msg}, line {exc.lineno})",
                             source=str(path)) from exc
    return parse_constraints(obj, str(path))
