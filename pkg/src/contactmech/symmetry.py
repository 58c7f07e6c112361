"""Momentum maps of the supported rotation actions and their exponential decay.

For a strictly invariant action and ``H = H0 + gamma s`` every momentum
component obeys ``J(t) = J(0) exp(-gamma t)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContactState, ContractViolation
from .rigid_body import RigidBodyState

__all__ = [
    "PlanarRotation",
    "BodyRotation",
    "momentum_value",
    "time_dependent_level",
    "check_momentum_decay",
]


@dataclass(frozen=True)
class PlanarRotation:
    """SO(2) acting on R^2 configurations; generator ``xi_Q(q) = (-q2, q1)``."""


@dataclass(frozen=True)
class BodyRotation:
    """Rotation about ``axis`` for the rigid body.

    ``spatial=False`` pairs the axis with the body momentum M; ``spatial=True``
    uses the spatial momentum ``R M`` (the Noether quantity of left rotations).
    """

    axis: tuple = (0.0, 0.0, 1.0)
    spatial: bool = False

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float).reshape(-1)
        if a.shape != (3,) or abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise ContractViolation(f"axis must be a unit 3-vector, got {self.axis}")
        object.__setattr__(self, "axis", tuple(a))


def momentum_value(gen, x) -> float:
    if isinstance(gen, PlanarRotation):
        if not isinstance(x, ContactState) or x.n != 2:
            raise ContractViolation("PlanarRotation needs a ContactState with n = 2")
        return float(x.q[0] * x.p[1] - x.q[1] * x.p[0])
    if isinstance(gen, BodyRotation):
        if not isinstance(x, RigidBodyState):
            raise ContractViolation("BodyRotation needs a RigidBodyState")
        M = x.R @ x.M if gen.spatial else x.M
        return float(np.dot(gen.axis, M))
    raise ContractViolation(f"unsupported generator {gen!r}")


def time_dependent_level(mu0, gamma, t):
    """Momentum level ``mu0 exp(-gamma t)`` tracked by the dissipative flow."""
    out = mu0 * np.exp(-gamma * np.asarray(t, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def check_momentum_decay(traj, gen, gamma: float, eps: float = 1e-30) -> float:
    """``max_t |J(t) - J(0) exp(-gamma t)| / max(|J(0)|, eps)`` along a trajectory.

    The caller is responsible for the Hamiltonian being invariant under ``gen``.
    """
    if len(traj) == 0:
        raise ContractViolation("empty trajectory")
    J = np.array([momentum_value(gen, x) for x in traj.states])
    expected = time_dependent_level(J[0], gamma, np.asarray(traj.times))
    return float(np.max(np.abs(J - expected)) / max(abs(J[0]), eps))
