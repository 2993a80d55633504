"""Parameter container for the single-qubit QNN."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class QnnParams:
    """Angles of a depth-``depth`` single-qubit QNN (radians).

    ``theta = (theta_0, ..., theta_depth)`` and
    ``phi = (global phi, phi_0, ..., phi_depth)``.
    """

    depth: int
    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float).reshape(-1)
        phi = np.array(self.phi, dtype=float).reshape(-1)
        if self.depth < 0:
            raise ValueError(f"depth must be nonnegative, got {self.depth}")
        if theta.size != self.depth + 1:
            raise ValueError(f"theta has {theta.size} entries, depth {self.depth} needs {self.depth + 1}")
        if phi.size != self.depth + 2:
            raise ValueError(f"phi has {phi.size} entries, depth {self.depth} needs {self.depth + 2}")
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(phi))):
            raise ValueError("all angles must be finite")
        theta.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    def __eq__(self, other):
        if not isinstance(other, QnnParams):
            return NotImplemented
        return (
            self.depth == other.depth
            and np.array_equal(self.theta, other.theta)
            and np.array_equal(self.phi, other.phi)
        )

    def __hash__(self):
        return hash((self.depth, self.theta.tobytes(), self.phi.tobytes()))

    @property
    def n_params(self) -> int:
        return self.theta.size + self.phi.size

    def normalized(self) -> "QnnParams":
        """Same circuit with the global phase angle moved into ``[0, 2*pi)``.

        ``R_Z(a + 2*pi) = -R_Z(a)``, so an odd number of ``2*pi`` shifts is
        compensated on ``phi_0``.
        """
        phi = self.phi.copy()
        turns = math.floor(phi[0] / (2.0 * math.pi))
        phi[0] -= 2.0 * math.pi * turns
        if phi[0] >= 2.0 * math.pi:
            phi[0] = 0.0
            turns += 1
        if turns % 2:
            phi[1] += 2.0 * math.pi
        return QnnParams(self.depth, self.theta, phi)

    def to_dict(self) -> dict:
        return {"depth": self.depth, "theta": self.theta.tolist(), "phi": self.phi.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "QnnParams":
        return cls(int(data["depth"]), data["theta"], data["phi"])
