"""Verification tasks, reports and their JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np

from ..errors import InvalidTask
from ..jsonio import array_from_json, array_to_json, cplx_from_json

SCHEMA = 1
CHECKS = (
    "reciprocity",
    "reciprocity1",
    "reciprocity2",
    "flatness",
    "curvature",
    "twistor",
    "torsion-oracle",
    "gm-curvature",
)
DEFAULT_TOL = {
    "reciprocity": 1e-8,
    "reciprocity1": 1e-8,
    "reciprocity2": 1e-8,
    "flatness": 1e-8,
    "curvature": 1e-12,
    "twistor": 1e-12,
    "torsion-oracle": 1e-4,
    "gm-curvature": 1e-6,
}
DEFAULT_GRID = {"gm-curvature": 3, "torsion-oracle": 4, "twistor": 10}


@dataclass
class VerificationTask:
    check: str
    tau: Optional[complex] = None
    omega: Optional[np.ndarray] = None
    grid: int = 5
    tol: float = 0.0
    seed: int = 0
    lambdas: Optional[list] = None
    slow: bool = False
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.check not in CHECKS:
            raise InvalidTask(f"unknown check {self.check!r}; expected one of {', '.join(CHECKS)}")
        if not self.tol:
            self.tol = DEFAULT_TOL[self.check]
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise InvalidTask("tolerance must be positive")
        if int(self.grid) < 1:
            raise InvalidTask("grid count must be >= 1")
        self.grid = int(self.grid)
        self.seed = int(self.seed)
        if self.tau is not None:
            self.tau = complex(self.tau)

    def period(self):
        """Period matrix of the task (``tau`` as a 1 x 1 matrix when given)."""
        if self.omega is not None:
            return np.asarray(self.omega, dtype=complex)
        return np.array([[self.tau if self.tau is not None else 1j]])

    def to_json(self) -> dict:
        d = {"check": self.check, "grid": self.grid, "tol": self.tol, "seed": self.seed, "slow": self.slow}
        if self.tau is not None:
            d["tau"] = [self.tau.real, self.tau.imag]
        if self.omega is not None:
            d["omega"] = array_to_json(self.omega)
        if self.lambdas is not None:
            d["lambda"] = [[complex(x).real, complex(x).imag] for x in self.lambdas]
        if self.params:
            d["params"] = self.params
        return d

    @classmethod
    def from_json(cls, d: dict) -> "VerificationTask":
        if not isinstance(d, dict) or "check" not in d:
            raise InvalidTask("task record needs a 'check' field")
        try:
            params = dict(d.get("params", {}))
            for key in ("section", "function", "t", "s"):
                if key in d:
                    params[key] = d[key]
            grid = d.get("grid", DEFAULT_GRID.get(d["check"], 5))
            if isinstance(grid, dict):
                params["grid_box"] = grid
                grid = grid.get("n", DEFAULT_GRID.get(d["check"], 5))
            lam = d.get("lambda")
            return cls(
                check=d["check"],
                tau=cplx_from_json(d["tau"]) if "tau" in d else None,
                omega=array_from_json(d["omega"]) if "omega" in d else None,
                grid=grid,
                tol=float(d.get("tol", 0.0)),
                seed=int(d.get("seed", 0)),
                lambdas=[cplx_from_json(x) for x in lam] if lam is not None else None,
                slow=bool(d.get("slow", False)),
                params=params,
            )
        except InvalidTask:
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise InvalidTask(f"malformed task record: {exc}") from exc


@dataclass
class VerificationReport:
    task: dict
    points: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    limits: list = field(default_factory=list)
    error: Optional[str] = None
    status: str = "pending"

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    @property
    def mean_residual(self) -> float:
        return float(np.mean(self.residuals)) if self.residuals else 0.0

    @property
    def argmax(self) -> Any:
        if not self.residuals:
            return None
        return self.points[int(np.argmax(self.residuals))]

    @property
    def passed(self) -> bool:
        if self.error is not None:
            return False
        tol = self.task["tol"]
        ok = all(r <= tol for r in self.residuals)
        return ok and all(item["value"] <= item["tol"] for item in self.limits)

    def add(self, point, residual: float) -> None:
        self.points.append(point)
        self.residuals.append(float(residual))

    def finish(self) -> "VerificationReport":
        if self.status == "pending":
            self.status = "pass" if self.passed else "fail"
        return self

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "task": self.task,
            "status": self.status,
            "pass": self.passed,
            "max": self.max_residual,
            "mean": self.mean_residual,
            "argmax": _jsonable(self.argmax),
            "points": [{"point": _jsonable(p), "residual": r} for p, r in zip(self.points, self.residuals)],
            "constants": _jsonable(self.constants),
            "limits": _jsonable(self.limits),
            "error": self.error,
        }

    @classmethod
    def from_json(cls, d: dict) -> "VerificationReport":
        if d.get("schema") != SCHEMA:
            raise InvalidTask(f"unsupported report schema {d.get('schema')!r}")
        rep = cls(
            task=d["task"],
            points=[p["point"] for p in d.get("points", [])],
            residuals=[float(p["residual"]) for p in d.get("points", [])],
            constants=d.get("constants", {}),
            limits=d.get("limits", []),
            error=d.get("error"),
            status=d.get("status", "pending"),
        )
        return rep


def _jsonable(x):
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def exit_code(reports: list) -> int:
    """0 when every report passes, 2 if any task was invalid, otherwise 1."""
    if any(r.status == "invalid" for r in reports):
        return 2
    return 0 if all(r.passed for r in reports) else 1


def write_reports(path: str, reports: list) -> None:
    payload = {"schema": SCHEMA, "reports": [r.to_json() for r in reports], "exit_code": exit_code(reports)}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)


def read_reports(path: str) -> list:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("schema") != SCHEMA:
        raise InvalidTask(f"{path}: unsupported report schema {payload.get('schema')!r}")
    return [VerificationReport.from_json(r) for r in payload["reports"]]


def merge_reports(paths: list) -> list:
    out = []
    for p in paths:
        out.extend(read_reports(p))
    return out


def summary_line(r: VerificationReport) -> str:
    name = r.task.get("check", "?")
    if r.error:
        return f"{r.status.upper():7s} {name}: {r.error}"
    line = f"{r.status.upper():7s} {name}: max={r.max_residual:.3e} tol={r.task['tol']:.1e} n={len(r.residuals)}"
    for item in r.limits:
        line += f" {item['name']}={item['value']:.2e}/{item['tol']:.0e}"
    return line
