"""Experiment report records and the assertion bookkeeping used by runners."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

REPORT_SCHEMA = "nqsim-report/1"

PROVENANCES = ("paper", "trivial", "derived")


@dataclass
class Assertion:
    name: str
    expected: float
    observed: float
    tolerance: float
    provenance: str
    section: str = None
    passed: bool = False

    def to_dict(self) -> dict:
        d = {"name": self.name, "expected": self.expected, "observed": self.observed,
             "tolerance": self.tolerance, "provenance": self.provenance,
             "pass": self.passed}
        if self.section:
            d["section"] = self.section
        return d


@dataclass
class ExperimentReport:
    id: str
    seed: int
    inputs: dict = field(default_factory=dict)
    scans: list = field(default_factory=list)
    derived: dict = field(default_factory=dict)
    assertions: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "id": self.id,
            "seed": self.seed,
            "inputs": _jsonable(self.inputs),
            "scans": [_jsonable(s) for s in self.scans],
            "derived": _jsonable(self.derived),
            "assertions": [a.to_dict() for a in self.assertions],
            "pass": self.passed,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


class RunContext:
    """Mutable assembly helper handed to experiment runners."""

    def __init__(self, exp_id, config, seed):
        self.report = ExperimentReport(exp_id, seed, inputs=dict(config))
        self.config = config
        self.seed = seed

    def __getitem__(self, key):
        return self.config[key]

    def derived(self, name, value):
        self.report.derived[name] = value
        return value

    def add_scan(self, scan, fit=None, label=None):
        entry = {
            "param": scan.param,
            "xs": scan.xs,
            "counts_o": scan.counts_o,
        }
        if label:
            entry["label"] = label
        if scan.counts_h is not None:
            entry["counts_h"] = scan.counts_h
        if scan.intensity_o is not None:
            entry["intensity_o"] = scan.intensity_o
        if scan.intensity_h is not None:
            entry["intensity_h"] = scan.intensity_h
        entry["mean_counts"] = scan.mean_counts
        if fit is not None:
            entry["fit"] = fit.to_dict()
        self.report.scans.append(entry)

    def check(self, name, expected, observed, tolerance, provenance, section=None):
        """Record an assertion |observed - expected| <= tolerance."""
        if provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {provenance!r}")
        ok = abs(observed - expected) <= tolerance
        self.report.assertions.append(Assertion(
            name, float(expected), float(observed), float(tolerance),
            provenance, section, bool(ok)))
        return ok

    def check_bound(self, name, observed, bound, provenance, section=None, below=True):
        """Record a one-sided assertion (observed <= bound, or >= when below=False)."""
        if provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {provenance!r}")
        ok = observed <= bound if below else observed >= bound
        self.report.assertions.append(Assertion(
            name, float(bound), float(observed), 0.0, provenance, section, bool(ok)))
        return ok
