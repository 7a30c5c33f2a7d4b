"""Verification reports and their JSON/CSV serialization."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np


def _plain(obj):
    """Convert numpy containers and scalars to JSON-ready Python objects."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


@dataclass
class VerificationReport:
    """Outcome of one claim.

    ``polarity`` is ``"holds"`` when passing means the property held on every
    sample and ``"violation"`` when passing means a counterexample was found.
    """

    claim: str
    anchor: str
    passed: bool
    min_value: float = float("nan")
    max_value: float = float("nan")
    worst: dict = field(default_factory=dict)
    n_samples: int = 0
    elapsed_ms: float = 0.0
    tolerance: float = 0.0
    polarity: str = "holds"
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.anchor:
            raise ValueError("every report needs an anchor")
        self.passed = bool(self.passed)

    def as_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return _plain(d)

    def summary(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.claim}: min={self.min_value:.3e} max={self.max_value:.3e} "
                f"n={self.n_samples} tol={self.tolerance:.1e}")


def reports_to_json(reports, path=None):
    """One object per claim; keys sorted so repeated runs diff cleanly."""
    text = json.dumps([r.as_dict() for r in reports], indent=2, sort_keys=True)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def emit_csv(rows, columns, path):
    """Header row then one row per sample, floats at 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])
