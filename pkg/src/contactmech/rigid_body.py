"""Dissipative rigid body on SO(3) x R^3 x R.

Body momentum M, angular velocity ``Omega = I^{-1} M`` (diagonal inertia)::

    dR/dt = R hat(Omega)
    dM/dt = M x Omega - D M          (D = gamma Id in the isotropic case)
    ds/dt = M.Omega / 2 - gamma s    (isotropic only; s is frozen otherwise)

With isotropic damping the kinetic energy decays as ``H0(0) exp(-2 gamma t)``.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import ContractViolation, NumericalError

__all__ = [
    "InertiaTensor",
    "DampingModel",
    "RigidBodyState",
    "RigidBodyTrajectory",
    "Classification",
    "Equilibrium",
    "EquilibriumReport",
    "hat",
    "so3_exp",
    "gram_schmidt",
    "kinetic_energy",
    "rb_rhs",
    "rb_step",
    "integrate_rigid_body",
    "find_equilibria",
    "linearize",
    "classify_stability",
]


def hat(w) -> np.ndarray:
    """Skew matrix with ``hat(w) @ v == cross(w, v)``."""
    return np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


def _cross(a, b):
    return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])


def so3_exp(w) -> np.ndarray:
    """Rodrigues' formula for ``expm(hat(w))``, with Taylor coefficients near zero."""
    theta2 = float(np.dot(w, w))
    W = hat(w)
    if theta2 < 1e-12:
        a = 1.0 - theta2 / 6.0
        b = 0.5 - theta2 / 24.0
    else:
        theta = math.sqrt(theta2)
        a = math.sin(theta) / theta
        b = (1.0 - math.cos(theta)) / theta2
    return np.eye(3) + a * W + b * (W @ W)


def gram_schmidt(R) -> np.ndarray:
    """Re-orthonormalise the columns of a near-rotation, keeping det = +1."""
    c0 = R[:, 0] / np.linalg.norm(R[:, 0])
    c1 = R[:, 1] - np.dot(c0, R[:, 1]) * c0
    c1 /= np.linalg.norm(c1)
    c2 = _cross(c0, c1)
    return np.column_stack([c0, c1, c2])


@dataclass(frozen=True)
class InertiaTensor:
    """Diagonal body-frame inertia ``diag(I1, I2, I3)``."""

    principal_moments: tuple

    def __post_init__(self):
        m = tuple(float(v) for v in self.principal_moments)
        if len(m) != 3:
            raise ContractViolation("need exactly three principal moments")
        if not all(np.isfinite(v) and v > 0 for v in m):
            raise ContractViolation(f"principal moments must be positive, got {m}")
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            if m[j] + m[k] < m[i] * (1 - 1e-12):
                warnings.warn(f"moments {m} violate the triangle inequality", stacklevel=3)
                break
        object.__setattr__(self, "principal_moments", m)

    @property
    def moments(self) -> np.ndarray:
        return np.array(self.principal_moments)

    @property
    def inverse(self) -> np.ndarray:
        return 1.0 / self.moments

    def matrix(self) -> np.ndarray:
        return np.diag(self.moments)


@dataclass(frozen=True)
class DampingModel:
    """Isotropic ``gamma Id`` or a symmetric positive-semidefinite matrix ``D``.

    Build with :meth:`isotropic` or :meth:`anisotropic`; ``gamma`` is None for
    the anisotropic variant.
    """

    matrix: np.ndarray
    gamma: Optional[float] = None

    @classmethod
    def isotropic(cls, gamma: float) -> "DampingModel":
        gamma = float(gamma)
        if not (np.isfinite(gamma) and gamma >= 0):
            raise ContractViolation(f"gamma must be >= 0, got {gamma}")
        return cls(gamma * np.eye(3), gamma)

    @classmethod
    def anisotropic(cls, D) -> "DampingModel":
        return cls(np.asarray(D, dtype=float).reshape(3, 3), None)

    def __post_init__(self):
        D = np.array(self.matrix, dtype=float)
        if D.shape != (3, 3) or not np.all(np.isfinite(D)):
            raise ContractViolation("damping matrix must be a finite 3x3 array")
        if not np.allclose(D, D.T, rtol=0, atol=1e-12 * max(1.0, np.abs(D).max())):
            raise ContractViolation("damping matrix must be symmetric")
        if np.linalg.eigvalsh(D).min() < -1e-12:
            raise ContractViolation("damping matrix must be positive semidefinite")
        D.setflags(write=False)
        object.__setattr__(self, "matrix", D)

    @property
    def is_isotropic(self) -> bool:
        return self.gamma is not None

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


@dataclass(frozen=True)
class RigidBodyState:
    R: np.ndarray
    M: np.ndarray
    s: float = 0.0

    def __post_init__(self):
        R = np.array(self.R, dtype=float)
        M = np.array(self.M, dtype=float).reshape(-1)
        if R.shape != (3, 3) or M.shape != (3,):
            raise ContractViolation("R must be 3x3 and M a 3-vector")
        if not (np.all(np.isfinite(R)) and np.all(np.isfinite(M)) and np.isfinite(self.s)):
            raise NumericalError("non-finite rigid body state")
        if np.linalg.norm(R.T @ R - np.eye(3)) > 1e-9 or abs(np.linalg.det(R) - 1) > 1e-9:
            raise ContractViolation("R is not a rotation matrix")
        R.setflags(write=False)
        M.setflags(write=False)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "s", float(self.s))


def kinetic_energy(M, inertia: InertiaTensor) -> float:
    M = np.asarray(M, dtype=float)
    return 0.5 * float(np.dot(M, inertia.inverse * M))


def _m_field(M, s, Iinv, D, gamma):
    Om = Iinv * M
    dM = _cross(M, Om) - D @ M
    ds = 0.5 * float(np.dot(M, Om)) - gamma * s if gamma is not None else 0.0
    return dM, ds


def rb_rhs(x: RigidBodyState, inertia: InertiaTensor, damping: DampingModel):
    """Returns ``(dR, dM, ds)``; ``ds`` is 0 for anisotropic damping."""
    Om = inertia.inverse * x.M
    dM, ds = _m_field(x.M, x.s, inertia.inverse, damping.matrix, damping.gamma)
    return x.R @ hat(Om), dM, ds


def _rb_raw(h, R, M, s, Iinv, D, gamma):
    k1 = _m_field(M, s, Iinv, D, gamma)
    k2 = _m_field(M + 0.5 * h * k1[0], s + 0.5 * h * k1[1], Iinv, D, gamma)
    k3 = _m_field(M + 0.5 * h * k2[0], s + 0.5 * h * k2[1], Iinv, D, gamma)
    k4 = _m_field(M + h * k3[0], s + h * k3[1], Iinv, D, gamma)
    M1 = M + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    s1 = s + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    # attitude: Lie-group update with the midpoint angular velocity
    R1 = R @ so3_exp(h * Iinv * (0.5 * (M + M1)))
    return R1, M1, s1


def rb_step(h_step: float, x: RigidBodyState, inertia: InertiaTensor, damping: DampingModel) -> RigidBodyState:
    """RK4 on (M, s), then ``R <- R exp(h hat(Omega_mid))``."""
    if not (np.isfinite(h_step) and h_step > 0):
        raise ContractViolation(f"step must be > 0, got {h_step}")
    R, M, s = _rb_raw(h_step, x.R, x.M, x.s, inertia.inverse, damping.matrix, damping.gamma)
    return RigidBodyState(R, M, s)


@dataclass(frozen=True)
class RigidBodyTrajectory:
    times: np.ndarray
    R: np.ndarray  # (n, 3, 3)
    M: np.ndarray  # (n, 3)
    s: np.ndarray
    H0: np.ndarray

    def __len__(self):
        return len(self.times)

    @property
    def states(self):
        return [RigidBodyState(R, M, s) for R, M, s in zip(self.R, self.M, self.s)]

    def decay_residual(self, gamma: float) -> np.ndarray:
        """``|H0(t) - H0(0) exp(-2 gamma t)|`` at each sample."""
        return np.abs(self.H0 - self.H0[0] * np.exp(-2.0 * gamma * self.times))


REORTHONORMALIZE_EVERY = 10_000


def integrate_rigid_body(
    x0: RigidBodyState,
    inertia: InertiaTensor,
    damping: DampingModel,
    step: float,
    t_final: float,
    record_every: int = 1,
) -> RigidBodyTrajectory:
    if not (step > 0 and t_final > 0):
        raise ContractViolation("step and t_final must be positive")
    if record_every < 1:
        raise ContractViolation("record_every must be >= 1")
    n = max(1, math.ceil(t_final / step - 1e-9))
    Iinv, D, gamma = inertia.inverse, damping.matrix, damping.gamma
    R, M, s = np.array(x0.R), np.array(x0.M), x0.s
    times, Rs, Ms, ss = [0.0], [R], [M], [s]
    for k in range(1, n + 1):
        R, M, s = _rb_raw(step, R, M, s, Iinv, D, gamma)
        if k % REORTHONORMALIZE_EVERY == 0:
            R = gram_schmidt(R)
        if not (math.isfinite(s) and np.all(np.isfinite(M))):
            raise NumericalError(f"non-finite rigid body state after step {k}", k)
        if k % record_every == 0:
            times.append(k * step)
            Rs.append(R)
            Ms.append(M)
            ss.append(s)
    Ms = np.array(Ms)
    H0 = 0.5 * np.einsum("ij,j,ij->i", Ms, Iinv, Ms)
    return RigidBodyTrajectory(np.array(times), np.array(Rs), Ms, np.array(ss), H0)


# -- equilibria and stability --


class Classification(str, enum.Enum):
    ASYMPTOTICALLY_STABLE = "AsymptoticallyStable"
    SADDLE_UNSTABLE = "SaddleUnstable"
    ORIGIN_GLOBAL_SINK = "OriginGlobalSink"
    DEGENERATE_FAMILY = "DegenerateFamily"
    MARGINAL = "Marginal"


@dataclass(frozen=True)
class Equilibrium:
    axis: Optional[int]  # 1, 2, 3 or None for the origin
    M_star: np.ndarray
    classification: Classification
    eigenvalues: np.ndarray
    plane: Optional[np.ndarray] = None  # orthonormal basis rows for a degenerate family

    @property
    def is_origin(self) -> bool:
        return self.axis is None and self.plane is None


@dataclass(frozen=True)
class EquilibriumReport:
    equilibria: list = field(default_factory=list)

    def nonzero(self):
        return [e for e in self.equilibria if not e.is_origin]

    def axes(self):
        return sorted(e.axis for e in self.equilibria if e.axis is not None)

    def format(self) -> str:
        lines = []
        for e in self.equilibria:
            if e.is_origin:
                where = "origin"
            elif e.plane is not None:
                where = "family spanned by " + ", ".join(np.array2string(b, precision=6) for b in e.plane)
            else:
                where = f"axis {e.axis}"
            eig = ", ".join(f"{z.real:+.6e}{z.imag:+.6e}j" for z in e.eigenvalues)
            lines.append(f"{where:<12s} M*={np.array2string(e.M_star, precision=6)} {e.classification.value} [{eig}]")
        return "\n".join(lines)


def _equilibrium_residuals(M_star, inertia, damping):
    M = np.asarray(M_star, dtype=float)
    return float(np.linalg.norm(_cross(M, inertia.inverse * M))), float(np.linalg.norm(damping.matrix @ M))


def linearize(M_star, inertia: InertiaTensor, damping: DampingModel, tol: float = 1e-8) -> np.ndarray:
    """Jacobian ``A`` with ``A dM = dM x Omega* + M* x I^{-1} dM - D dM``."""
    M = np.asarray(M_star, dtype=float).reshape(3)
    gyro, diss = _equilibrium_residuals(M, inertia, damping)
    scale = max(1.0, float(np.dot(M, M)))
    if gyro > tol * scale or diss > tol * max(1.0, damping.norm) * max(1.0, float(np.linalg.norm(M))):
        raise ContractViolation(
            f"not an equilibrium: |M x I^-1 M| = {gyro:.3e}, |D M| = {diss:.3e}"
        )
    Om = inertia.inverse * M
    return -hat(Om) + hat(M) @ np.diag(inertia.inverse) - damping.matrix


def classify_stability(M_star, inertia: InertiaTensor, damping: DampingModel, tol: float = 1e-9):
    """Classify an equilibrium from the spectrum of :func:`linearize`.

    Returns ``(classification, eigenvalues)``. Eigenvalues with modulus below
    ``tol`` (the direction along a ray of equilibria) are ignored; purely
    imaginary pairs give ``MARGINAL`` since they cannot certify asymptotic
    stability.
    """
    A = linearize(M_star, inertia, damping)
    eig = np.linalg.eigvals(A)
    eig = eig[np.lexsort((eig.imag, eig.real))]
    re = eig.real
    if np.linalg.norm(M_star) <= tol:
        if np.all(re < -tol):
            return Classification.ORIGIN_GLOBAL_SINK, eig
        return Classification.MARGINAL, eig
    if np.any(re > tol):
        return Classification.SADDLE_UNSTABLE, eig
    active = np.abs(eig) > tol
    if np.any(active) and np.all(re[active] < -tol):
        return Classification.ASYMPTOTICALLY_STABLE, eig
    return Classification.MARGINAL, eig


def _null_space(A, tol):
    if A.shape[0] == 0:
        return np.eye(A.shape[1])
    _, sv, vt = np.linalg.svd(A)
    rank = int(np.sum(sv > tol))
    return vt[rank:]


def find_equilibria(
    inertia: InertiaTensor, damping: DampingModel, tol: float = 1e-10, magnitude: float = 1.0
) -> EquilibriumReport:
    """Origin plus each principal-axis ray lying in ker D, classified.

    Rays are represented by ``magnitude * e_i``. Coincident moments make the
    equilibria continuous families; such an eigenspace intersected with ker D
    is reported once as ``DEGENERATE_FAMILY``.
    """
    if tol <= 0:
        raise ContractViolation("tol must be positive")
    kernel_tol = tol * max(1.0, damping.norm)
    moments = inertia.moments
    origin_cls, origin_eig = classify_stability(np.zeros(3), inertia, damping)
    found = [Equilibrium(None, np.zeros(3), origin_cls, origin_eig)]

    # group axes with equal moments
    groups = []
    for i in range(3):
        for g in groups:
            if abs(moments[g[0]] - moments[i]) <= tol * moments.max():
                g.append(i)
                break
        else:
            groups.append([i])

    for g in groups:
        E = np.eye(3)[g]  # rows span the inertia eigenspace
        if len(g) == 1:
            e = E[0]
            if np.linalg.norm(damping.matrix @ e) <= kernel_tol:
                M = magnitude * e
                cls, eig = classify_stability(M, inertia, damping)
                found.append(Equilibrium(g[0] + 1, M, cls, eig))
            continue
        # ker D restricted to the eigenspace
        coeffs = _null_space(damping.matrix @ E.T, kernel_tol)
        if len(coeffs) == 0:
            continue
        basis = coeffs @ E
        M = magnitude * basis[0]
        eig = np.linalg.eigvals(linearize(M, inertia, damping))
        if len(basis) >= 2:
            found.append(Equilibrium(None, M, Classification.DEGENERATE_FAMILY, eig, plane=basis))
        else:
            cls, eig = classify_stability(M, inertia, damping)
            axis = g[int(np.argmax(np.abs(basis[0][g])))] + 1
            found.append(Equilibrium(axis, M, cls, eig))
    return EquilibriumReport(found)
