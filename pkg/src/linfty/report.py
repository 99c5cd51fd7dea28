"""Verification reports and their JSON/CSV serialisation.

A :class:`Report` carries per-point data next to the aggregates computed
from it, so every summary number can be recomputed from the file.  JSON
output has the same top-level keys for every command; non-finite reals are
written as ``null``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import csv
import io
import json
import math

import numpy as np

PASS = "pass"
FAIL = "fail"


@dataclass(frozen=True)
class PointData:
    """Per-point rows: coordinates, raw and normalised residual, flags."""

    x: np.ndarray
    residual: np.ndarray
    normalized: np.ndarray
    flags: list

    def __len__(self):
        return self.residual.size


def point_rows(points, residual, normalized, flags):
    return PointData(np.asarray(points, dtype=float), np.asarray(residual, dtype=float),
                     np.asarray(normalized, dtype=float), [list(f) for f in flags])


def _clean(obj):
    # JSON has no inf/nan; numpy scalars and arrays become plain Python
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


@dataclass(frozen=True)
class Report:
    """Outcome of one residual, inclusion or demo run."""

    map: str
    operator: str
    params: dict
    n: int
    samples: dict
    points: PointData | None = None
    aggregates: dict = field(default_factory=dict)
    boundary: dict | None = None
    inclusion: dict | None = None
    oracle: dict | None = None
    tolerances: dict = field(default_factory=dict)
    members: tuple = ()
    distances: dict | None = None
    verdict: str = FAIL

    @property
    def passed(self):
        return self.verdict == PASS

    @staticmethod
    def aggregate(values, include):
        """Max, mean and 99th percentile of the finite included ``values``."""
        values = np.asarray(values, dtype=float)
        include = np.asarray(include, dtype=bool)
        used = values[include]
        finite = used[np.isfinite(used)]
        out = {"count": int(values.size), "included": int(include.sum()),
               "excluded": int(values.size - include.sum()),
               "non_finite": int(used.size - finite.size)}
        if finite.size:
            out.update(max=float(finite.max()), mean=float(finite.mean()),
                       p99=float(np.percentile(finite, 99)))
        else:
            out.update(max=None, mean=None, p99=None)
        return out

    def to_dict(self):
        samples = dict(self.samples)
        if self.points is not None:
            samples.update(x=self.points.x, residual=self.points.residual,
                           normalized_residual=self.points.normalized, flags=self.points.flags)
        return _clean({
            "map": self.map,
            "operator": self.operator,
            "params": self.params,
            "n": self.n,
            "samples": samples,
            "aggregates": self.aggregates,
            "boundary": self.boundary,
            "inclusion": self.inclusion,
            "oracle": self.oracle,
            "tolerances": self.tolerances,
            "members": [m.to_dict() for m in self.members],
            "distances": self.distances,
            "verdict": self.verdict,
        })

    def to_json(self, path=None, indent=2):
        text = json.dumps(self.to_dict(), indent=indent, sort_keys=False)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    def csv_rows(self):
        """Header and rows ``x0..x{n-1}, residual, normalized_residual, flags``.

        Demo reports prepend a ``member`` column and stack the members' rows.
        """
        head = [f"x{i}" for i in range(self.n)] + ["residual", "normalized_residual", "flags"]
        if self.members:
            rows = []
            for k, m in enumerate(self.members):
                _, sub = m.csv_rows()
                rows.extend([k] + r for r in sub)
            return ["member"] + head, rows
        rows = []
        if self.points is not None:
            p = self.points
            for i in range(len(p)):
                rows.append([repr(float(v)) for v in p.x[i]]
                            + [repr(float(p.residual[i])), repr(float(p.normalized[i])),
                               ";".join(p.flags[i])])
        return head, rows

    def to_csv(self, path=None):
        head, rows = self.csv_rows()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(head)
        w.writerows(rows)
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def summary(self):
        """One greppable line: verdict first."""
        agg = self.aggregates or {}
        worst = agg.get("max")
        worst = "n/a" if worst is None else f"{worst:.3e}"
        line = f"{self.verdict.upper()} {self.operator} map={self.map} n={self.n} max={worst}"
        if self.inclusion:
            line += f" membership={self.inclusion['membership_fraction']:.4f}"
        return line
