"""Check reports shared by the verification modules."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any


@dataclass
class CheckReport:
    """Per-check maximum residuals with a tolerance verdict.

    ``witnesses`` maps a check name to the sample point where its residual
    peaked, so a failure can be reproduced by hand.
    """

    residuals: dict[str, float]
    n_samples: int
    tol: float
    witnesses: dict[str, Any] = field(default_factory=dict)
    notes: dict[str, Any] = field(default_factory=dict)

    @property
    def failed(self) -> list[str]:
        return [k for k, v in self.residuals.items() if not (v < self.tol)]

    @property
    def passed(self) -> bool:
        # NaN compares False, so it fails
        return not self.failed

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "tolerance": self.tol,
            "n_samples": self.n_samples,
            "max_residual": {k: _jsonable(v) for k, v in self.residuals.items()},
            "witnesses": {k: _jsonable(v) for k, v in self.witnesses.items()},
            "notes": {k: _jsonable(v) for k, v in self.notes.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def summary_lines(self) -> list[str]:
        return [
            f"{'PASS' if v < self.tol else 'FAIL'} {k}: max residual {v:.3e} (tol {self.tol:.1e})"
            for k, v in self.residuals.items()
        ]


def _jsonable(v):
    try:
        import numpy as np
    except ImportError:  # pragma: no cover
        np = None
    if np is not None and isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if np is not None and isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, float) and (math.isnan(v) or math.isinf(v)):
        return str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v
