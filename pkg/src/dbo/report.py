"""Structured results shared by the norms scanner, the operator engine,
the experiment harness and the CLI."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np


def jsonable(obj: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(obj.real), jsonable(obj.imag)]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


@dataclass
class ScanResult:
    """Supremum of a scanned quotient over the cube of radius ``radius``."""

    value: float
    argmax: Optional[tuple]
    radius: int
    boundary_ratio: float
    count: int = 0

    def as_dict(self) -> dict:
        return {"value": self.value, "argmax": self.argmax, "radius": self.radius,
                "boundaryRatio": self.boundary_ratio, "count": self.count}


@dataclass
class Report:
    kind: str
    params: dict = field(default_factory=dict)
    value: Optional[float] = None
    argmax: Optional[Any] = None
    radius: Optional[int] = None
    boundary_ratio: Optional[float] = None
    verdict: str = "pass"
    witness: Optional[Any] = None
    details: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict in PASSING

    def as_dict(self) -> dict:
        return jsonable({
            "kind": self.kind, "params": self.params, "value": self.value,
            "argmax": self.argmax, "radius": self.radius,
            "boundaryRatio": self.boundary_ratio, "verdict": self.verdict,
            "witness": self.witness, "details": self.details, "config": self.config,
        })

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"


PASSING = {"pass", "consistent-with-membership", "hypothesis-unmet", "no-violation", "ok"}
FAILING = {"fail", "violation"}
