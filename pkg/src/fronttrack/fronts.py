"""Front records shared by the solvers and the tracking engine."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

SHOCK = "shock"
RAREFACTION = "rarefaction"
CONTACT = "contact"
NON_PHYSICAL = "non-physical"


@dataclass
class Front:
    """One discontinuity line ``x = position + speed (t - birth_time)``.

    ``family`` runs from 1 to N for physical fronts and equals N + 1 for
    non-physical ones. For physical fronts ``left_state = t_family(right_state,
    strength)``; for non-physical fronts ``strength = |right - left|``.
    """

    family: int
    kind: str
    strength: float
    left_state: np.ndarray
    right_state: np.ndarray
    speed: float
    position: float = 0.0
    birth_time: float = 0.0
    generation: int = 1
    id: int = -1
    meta: dict = field(default_factory=dict)

    @property
    def physical(self) -> bool:
        return self.kind != NON_PHYSICAL

    def position_at(self, t: float) -> float:
        return self.position + self.speed * (t - self.birth_time)

    def amplitude(self) -> float:
        return float(np.sum(np.abs(self.right_state - self.left_state)))

    def copy(self, **changes) -> "Front":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {"id": self.id, "family": self.family, "kind": self.kind,
                "strength": self.strength, "speed": self.speed,
                "position": self.position, "birth_time": self.birth_time,
                "generation": self.generation,
                "left_state": self.left_state.tolist(),
                "right_state": self.right_state.tolist()}
