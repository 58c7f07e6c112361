"""Contact phase space T*R^n x R, separated contact Hamiltonians and their vector field.

The canonical contact form is ``eta = ds - p.dq``, the Reeb field is ``d/ds``.
For ``H(q, p, s) = T(p) + V(q) + Gamma(s)`` the contact Hamilton equations read::

    dq/dt = dT/dp
    dp/dt = -grad V(q) - Gamma'(s) p
    ds/dt = p.dT/dp - T(p) - V(q) - Gamma(s)

and the mechanical energy ``H0 = T + V`` obeys ``dH0/dt = -Gamma'(s) |p|^2 / m``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ContractViolation",
    "NumericalError",
    "ContactState",
    "SeparatedHamiltonian",
    "eval_total_H",
    "eval_mechanical_energy",
    "contact_rhs",
    "dissipation_rate",
    "gradient_check",
]


class ContractViolation(ValueError):
    """Raised when an argument breaks a documented precondition."""


class NumericalError(ArithmeticError):
    """Raised when a computation produces a non-finite value.

    ``index`` is the offending flat component (or step) index when known.
    """

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


def _frozen_vector(x, name: str) -> np.ndarray:
    a = np.array(x, dtype=float).reshape(-1)
    if a.size == 0:
        raise ContractViolation(f"{name} must have at least one component")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ContactState:
    """A point (q, p, s) of T*R^n x R. Arrays are copied and made read-only."""

    q: np.ndarray
    p: np.ndarray
    s: float = 0.0

    def __post_init__(self):
        q = _frozen_vector(self.q, "q")
        p = _frozen_vector(self.p, "p")
        if q.shape != p.shape:
            raise ContractViolation(f"dim(q)={q.size} differs from dim(p)={p.size}")
        s = float(self.s)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p)) and np.isfinite(s)):
            bad = np.flatnonzero(~np.isfinite(np.concatenate([q, p, [s]])))
            raise NumericalError(f"non-finite state component at index {bad[0]}", int(bad[0]))
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "s", s)

    @property
    def n(self) -> int:
        return self.q.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p, [self.s]])

    @classmethod
    def from_vector(cls, y) -> "ContactState":
        y = np.asarray(y, dtype=float)
        if y.size % 2 != 1 or y.size < 3:
            raise ContractViolation(f"packed state must have odd length 2n+1, got {y.size}")
        n = (y.size - 1) // 2
        return cls(y[:n], y[n : 2 * n], y[2 * n])


@dataclass(frozen=True)
class SeparatedHamiltonian:
    """``H = |p|^2 / (2 mass) + V(q) + gamma * s``.

    Only the quadratic kinetic energy is supported: the exact kinetic subflow
    needs ``p.dT/dp - T = T``, i.e. T homogeneous of degree two.

    ``dissipation`` / ``dissipation_slope`` optionally replace the linear
    ``Gamma(s) = gamma * s`` by a nonlinear pair ``(Gamma, Gamma')``. Only
    :func:`contact_rhs` and the energy observables honour them; the exact
    splitting subflows require the linear form.
    """

    potential: Callable[[np.ndarray], float]
    potential_grad: Callable[[np.ndarray], np.ndarray]
    gamma: float = 0.0
    mass: float = 1.0
    dim: Optional[int] = None  # fixed configuration dimension, None = any
    dissipation: Optional[Callable[[float], float]] = field(default=None, compare=False)
    dissipation_slope: Optional[Callable[[float], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise ContractViolation(f"gamma must be finite and >= 0, got {self.gamma}")
        if not (np.isfinite(self.mass) and self.mass > 0):
            raise ContractViolation(f"mass must be > 0, got {self.mass}")
        if (self.dissipation is None) != (self.dissipation_slope is None):
            raise ContractViolation("dissipation and dissipation_slope must be given together")

    @property
    def is_linear(self) -> bool:
        return self.dissipation is None

    def kinetic(self, p: np.ndarray) -> float:
        return 0.5 * float(np.dot(p, p)) / self.mass

    def kinetic_grad(self, p: np.ndarray) -> np.ndarray:
        return p / self.mass

    def Gamma(self, s: float) -> float:
        if self.dissipation is None:
            return self.gamma * s
        return float(self.dissipation(s))

    def Gamma_prime(self, s: float) -> float:
        if self.dissipation_slope is None:
            return self.gamma
        return float(self.dissipation_slope(s))


def _check_dims(h: SeparatedHamiltonian, x: ContactState) -> None:
    if not isinstance(x, ContactState):
        raise ContractViolation(f"expected ContactState, got {type(x).__name__}")
    if h.dim is not None and x.n != h.dim:
        raise ContractViolation(f"model is {h.dim}-dimensional, state has dimension {x.n}")
    g = np.asarray(h.potential_grad(x.q))
    if g.shape != x.q.shape:
        raise ContractViolation(f"grad V has shape {g.shape}, state has dimension {x.n}")


def eval_mechanical_energy(h: SeparatedHamiltonian, x: ContactState) -> float:
    """H0 = T(p) + V(q); independent of s."""
    _check_dims(h, x)
    return h.kinetic(x.p) + float(h.potential(x.q))


def eval_total_H(h: SeparatedHamiltonian, x: ContactState) -> float:
    return eval_mechanical_energy(h, x) + h.Gamma(x.s)


def contact_rhs(h: SeparatedHamiltonian, x: ContactState):
    """Right-hand side ``(dq, dp, ds)`` of the contact Hamilton equations."""
    _check_dims(h, x)
    T = h.kinetic(x.p)
    dT = h.kinetic_grad(x.p)
    V = float(h.potential(x.q))
    gradV = np.asarray(h.potential_grad(x.q), dtype=float)
    dq = dT
    dp = -gradV - h.Gamma_prime(x.s) * x.p
    ds = float(np.dot(x.p, dT)) - T - V - h.Gamma(x.s)
    packed = np.concatenate([dq, dp, [ds]])
    if not np.all(np.isfinite(packed)):
        i = int(np.flatnonzero(~np.isfinite(packed))[0])
        raise NumericalError(f"non-finite vector field component at index {i}", i)
    return dq, dp, ds


def dissipation_rate(h: SeparatedHamiltonian, x: ContactState) -> float:
    """Exact ``dH0/dt = -Gamma'(s) |p|^2 / m`` (non-positive for Gamma' >= 0)."""
    _check_dims(h, x)
    return -h.Gamma_prime(x.s) * float(np.dot(x.p, x.p)) / h.mass


def _central_diff(f, x: np.ndarray) -> np.ndarray:
    g = np.empty_like(x)
    for i in range(x.size):
        step = 1e-5 * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        g[i] = (f(xp) - f(xm)) / (2 * step)
    return g


def gradient_check(h: SeparatedHamiltonian, x: ContactState) -> float:
    """Largest relative mismatch between the analytic gradients of T, V and central differences."""
    worst = 0.0
    for f, grad, arg in (
        (h.kinetic, h.kinetic_grad, x.p),
        (lambda q: float(h.potential(q)), h.potential_grad, x.q),
    ):
        exact = np.asarray(grad(np.array(arg)), dtype=float)
        approx = _central_diff(f, np.array(arg, dtype=float))
        scale = max(1.0, float(np.max(np.abs(exact))))
        worst = max(worst, float(np.max(np.abs(exact - approx))) / scale)
    return worst
