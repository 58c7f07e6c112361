"""Ready-made separated Hamiltonians used by the experiments and tests."""
from __future__ import annotations

import numpy as np

from .core import SeparatedHamiltonian

# coupling constant of the cubic term in the 2-DOF particle potential
PARTICLE2D_COUPLING = 0.1


def quadratic_potential(q):
    return 0.5 * float(np.dot(q, q))


def quadratic_potential_grad(q):
    return np.array(q, dtype=float)


def harmonic_oscillator(gamma: float = 0.0, mass: float = 1.0) -> SeparatedHamiltonian:
    """Isotropic oscillator ``|p|^2/2m + |q|^2/2 + gamma s`` on R^n (rotation invariant)."""
    return SeparatedHamiltonian(quadratic_potential, quadratic_potential_grad, gamma=gamma, mass=mass)


def free_particle(gamma: float = 0.0, mass: float = 1.0) -> SeparatedHamiltonian:
    return SeparatedHamiltonian(
        lambda q: 0.0, lambda q: np.zeros_like(np.asarray(q, dtype=float)), gamma=gamma, mass=mass
    )


def particle2d_potential(q):
    return 0.5 * (q[0] ** 2 + q[1] ** 2) + PARTICLE2D_COUPLING * q[0] ** 2 * q[1]


def particle2d_potential_grad(q):
    c = PARTICLE2D_COUPLING
    return np.array([q[0] + 2 * c * q[0] * q[1], q[1] + c * q[0] ** 2])


def particle2d(gamma: float = 0.1, mass: float = 1.0) -> SeparatedHamiltonian:
    """Planar particle in ``V = (q1^2 + q2^2)/2 + 0.1 q1^2 q2``; not rotation invariant."""
    return SeparatedHamiltonian(particle2d_potential, particle2d_potential_grad, gamma=gamma, mass=mass, dim=2)
