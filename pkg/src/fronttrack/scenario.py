"""Scenario files: system choice, piecewise-constant data and run parameters.

A scenario is a JSON document::

    {"name": "burgers-reflection",
     "system": {"id": "burgers", "params": {}},
     "coordinates": "u",
     "u0": {"breaks": [0.3], "values": [[-0.1], [0.2]]},
     "ub": {"breaks": [0.5], "values": [[0.2], [-0.05]]},
     "eps": 0.01, "r_eps": null, "omega_eps": null, "lambda_hat": "auto",
     "constants": "calibrate",
     "t_end": 1.0, "x_max": 2.0, "snapshot_times": [0.5, 1.0], "seed": 0}

``u0`` breakpoints are positions and ``ub`` breakpoints are times; states
are in the conservative-variable coordinates ``u`` unless ``coordinates``
is ``"v"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .functionals import FunctionalConstants
from .systems import ConservationSystem, make_system
from .tracker import DEFAULT_EVENT_CAP, EpsilonParams, PiecewiseConstant


class ScenarioError(ValueError):
    """Malformed scenario file."""


def _step(data: dict, what: str) -> tuple[np.ndarray, np.ndarray]:
    if not isinstance(data, dict) or "values" not in data:
        raise ScenarioError(f"{what}: expected an object with 'values'")
    breaks = np.asarray(data.get("breaks", []), dtype=float).reshape(-1)
    values = np.asarray(data["values"], dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] != breaks.size + 1:
        raise ScenarioError(f"{what}: need len(values) == len(breaks) + 1")
    if np.any(np.diff(breaks) <= 0):
        raise ScenarioError(f"{what}: breakpoints must be strictly increasing")
    if np.any(breaks < 0):
        raise ScenarioError(f"{what}: breakpoints must be non-negative")
    return breaks, values


@dataclass
class Scenario:
    name: str
    system_id: str
    system_params: dict
    u0_breaks: np.ndarray
    u0_values: np.ndarray
    ub_breaks: np.ndarray
    ub_values: np.ndarray
    coordinates: str = "u"
    eps: float = 0.01
    r_eps: float | None = None
    omega_eps: float | None = None
    lambda_hat: float | str | None = "auto"
    constants: dict | str = "calibrate"
    t_end: float = 1.0
    x_max: float = 2.0
    snapshot_times: list = field(default_factory=list)
    seed: int = 0
    event_cap: int = DEFAULT_EVENT_CAP
    description: str = ""
    verify_times: list = field(default_factory=list)

    # -- construction ----------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        try:
            system = data["system"]
            u0b, u0v = _step(data["u0"], "u0")
            ubb, ubv = _step(data["ub"], "ub")
            coords = data.get("coordinates", "u")
            if coords not in ("u", "v"):
                raise ScenarioError("coordinates must be 'u' or 'v'")
            if "seed" not in data:
                raise ScenarioError("a jitter seed is required")
            sc = cls(name=str(data.get("name", "scenario")), system_id=str(system["id"]),
                     system_params=dict(system.get("params", {})),
                     u0_breaks=u0b, u0_values=u0v, ub_breaks=ubb, ub_values=ubv,
                     coordinates=coords, eps=float(data.get("eps", 0.01)),
                     r_eps=data.get("r_eps"), omega_eps=data.get("omega_eps"),
                     lambda_hat=data.get("lambda_hat", "auto"),
                     constants=data.get("constants", "calibrate"),
                     t_end=float(data.get("t_end", 1.0)), x_max=float(data.get("x_max", 2.0)),
                     snapshot_times=[float(t) for t in data.get("snapshot_times", [])],
                     seed=int(data["seed"]),
                     event_cap=int(data.get("event_cap", DEFAULT_EVENT_CAP)),
                     description=str(data.get("description", "")),
                     verify_times=[float(t) for t in data.get("verify_times", [])])
        except (KeyError, TypeError) as exc:
            raise ScenarioError(f"missing or invalid field: {exc}") from exc
        if sc.eps <= 0 or sc.t_end <= 0 or sc.x_max <= 0:
            raise ScenarioError("eps, t_end and x_max must be positive")
        return sc

    @classmethod
    def load(cls, path) -> "Scenario":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {"name": self.name, "description": self.description,
                "system": {"id": self.system_id, "params": self.system_params},
                "coordinates": self.coordinates,
                "u0": {"breaks": self.u0_breaks.tolist(), "values": self.u0_values.tolist()},
                "ub": {"breaks": self.ub_breaks.tolist(), "values": self.ub_values.tolist()},
                "eps": self.eps, "r_eps": self.r_eps, "omega_eps": self.omega_eps,
                "lambda_hat": self.lambda_hat, "constants": self.constants,
                "t_end": self.t_end, "x_max": self.x_max,
                "snapshot_times": self.snapshot_times, "seed": self.seed,
                "event_cap": self.event_cap, "verify_times": self.verify_times}

    def with_eps(self, eps: float) -> "Scenario":
        return replace(self, eps=float(eps))

    # -- derived objects ---------------------------------------------------

    def make_system(self) -> ConservationSystem:
        return make_system(self.system_id, **self.system_params)

    def data(self, system: ConservationSystem) -> tuple[PiecewiseConstant, PiecewiseConstant]:
        u0v, ubv = self.u0_values, self.ub_values
        if self.coordinates == "v":
            u0v = np.array([system.from_v(v) for v in u0v])
            ubv = np.array([system.from_v(v) for v in ubv])
        for u in list(u0v) + list(ubv):
            if not system.in_box(u):
                raise ScenarioError(f"state {np.asarray(u).tolist()} outside the working box")
        return PiecewiseConstant(self.u0_breaks, u0v), PiecewiseConstant(self.ub_breaks, ubv)

    def epsilon_params(self, eps: float | None = None) -> EpsilonParams:
        e = self.eps if eps is None else float(eps)
        scale = e / self.eps
        r_eps = None if self.r_eps is None else float(self.r_eps) * scale
        omega = None if self.omega_eps is None else float(self.omega_eps) * scale ** 2
        lam = None if self.lambda_hat in (None, "auto") else float(self.lambda_hat)
        return EpsilonParams(e, r_eps, omega, lam)

    def functional_constants(self) -> FunctionalConstants | None:
        if isinstance(self.constants, dict):
            return FunctionalConstants.from_dict(self.constants)
        return None


def load_scenarios(directory) -> list[Scenario]:
    """All scenarios in a directory, sorted by file name."""
    return [Scenario.load(p) for p in sorted(Path(directory).glob("*.json"))]
