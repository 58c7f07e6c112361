"""Exact subflows of the kinetic / potential / damping parts, their compositions,
an RK4 reference stepper and the trajectory and convergence drivers.

Composition convention: ``X o Y`` applies ``Y`` first.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    ContactState,
    ContractViolation,
    NumericalError,
    SeparatedHamiltonian,
    contact_rhs,
)

__all__ = [
    "Method",
    "IntegratorConfig",
    "TrajectoryRecord",
    "a_flow",
    "b_flow",
    "c_flow",
    "strang_step",
    "bacb_step",
    "rk4_step",
    "integrate",
    "reference_energy",
    "convergence_study",
    "fitted_order",
    "herglotz_accumulation",
]


class Method(str, enum.Enum):
    CONTACT_STRANG = "strang"
    CONTACT_BACB = "bacb"
    RK4_REFERENCE = "rk4"


# -- raw steppers on (q, p, s) tuples; no validation, used in the hot loops --


def _a(h, q, p, s, model):
    return q + h * p / model.mass, p, s + h * model.kinetic(p)


def _b(h, q, p, s, model):
    return q, p - h * np.asarray(model.potential_grad(q), dtype=float), s - h * float(model.potential(q))


def _c(h, q, p, s, model):
    decay = math.exp(-model.gamma * h)
    return q, decay * p, decay * s


def _strang(h, q, p, s, model):
    x = _b(0.5 * h, q, p, s, model)
    x = _c(0.5 * h, *x, model)
    x = _a(h, *x, model)
    x = _c(0.5 * h, *x, model)
    return _b(0.5 * h, *x, model)


def _bacb(h, q, p, s, model):
    x = _b(0.5 * h, q, p, s, model)
    x = _c(h, *x, model)
    x = _a(h, *x, model)
    return _b(0.5 * h, *x, model)


def _field(model, q, p, s):
    gp = model.Gamma_prime(s)
    T = model.kinetic(p)
    dq = p / model.mass
    dp = -np.asarray(model.potential_grad(q), dtype=float) - gp * p
    ds = T - float(model.potential(q)) - model.Gamma(s)  # p.dT/dp = 2T
    return dq, dp, ds


def _rk4(h, q, p, s, model):
    k1 = _field(model, q, p, s)
    k2 = _field(model, q + 0.5 * h * k1[0], p + 0.5 * h * k1[1], s + 0.5 * h * k1[2])
    k3 = _field(model, q + 0.5 * h * k2[0], p + 0.5 * h * k2[1], s + 0.5 * h * k2[2])
    k4 = _field(model, q + h * k3[0], p + h * k3[1], s + h * k3[2])
    w = h / 6.0
    return (
        q + w * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        p + w * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        s + w * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]),
    )


def _require_linear(model: SeparatedHamiltonian):
    if not model.is_linear:
        raise ContractViolation("exact splitting subflows need the linear dissipation gamma * s")


def _require_finite_step(h_step):
    if not np.isfinite(h_step):
        raise ContractViolation(f"step must be finite, got {h_step}")


def _wrap(raw: Callable, h_step: float, x: ContactState, model: SeparatedHamiltonian) -> ContactState:
    return ContactState(*raw(h_step, np.asarray(x.q), np.asarray(x.p), x.s, model))


# -- public single-step maps --


def a_flow(h_step: float, x: ContactState, model: SeparatedHamiltonian) -> ContactState:
    """Exact flow of the kinetic part ``T(p)``: drift in q, s gains ``h T(p)``."""
    _require_finite_step(h_step)
    _require_linear(model)
    return _wrap(_a, h_step, x, model)


def b_flow(h_step: float, x: ContactState, model: SeparatedHamiltonian) -> ContactState:
    """Exact flow of the potential part ``V(q)``: kick in p, s loses ``h V(q)``."""
    _require_finite_step(h_step)
    _require_linear(model)
    gradV = np.asarray(model.potential_grad(np.asarray(x.q)), dtype=float)
    if not np.all(np.isfinite(gradV)):
        i = int(np.flatnonzero(~np.isfinite(gradV))[0])
        raise NumericalError(f"non-finite potential gradient at component {i}", i)
    return _wrap(_b, h_step, x, model)


def c_flow(h_step: float, x: ContactState, model: SeparatedHamiltonian) -> ContactState:
    """Exact flow of ``gamma s``: p and s both contract by ``exp(-gamma h)``."""
    _require_finite_step(h_step)
    _require_linear(model)
    return _wrap(_c, h_step, x, model)


def strang_step(h_step: float, x: ContactState, model: SeparatedHamiltonian) -> ContactState:
    """Symmetric splitting ``B_{h/2} o C_{h/2} o A_h o C_{h/2} o B_{h/2}``.

    Second order for every gamma; at gamma = 0 the C factors are the identity
    and the map is exactly velocity Verlet on (q, p).
    """
    _require_finite_step(h_step)
    _require_linear(model)
    return _wrap(_strang, h_step, x, model)


def bacb_step(h_step: float, x: ContactState, model: SeparatedHamiltonian) -> ContactState:
    """The composition ``B_{h/2} o A_h o C_h o B_{h/2}`` (B applied first).

    A and C do not commute, so for gamma > 0 this is only first order;
    at gamma = 0 it coincides with :func:`strang_step`.
    """
    _require_finite_step(h_step)
    _require_linear(model)
    return _wrap(_bacb, h_step, x, model)


def rk4_step(h_step: float, x: ContactState, model: SeparatedHamiltonian) -> ContactState:
    """Classical RK4 on the full contact equations."""
    _require_finite_step(h_step)
    contact_rhs(model, x)  # validates dimensions and finiteness
    return _wrap(_rk4, h_step, x, model)


_STEPPERS = {
    Method.CONTACT_STRANG: _strang,
    Method.CONTACT_BACB: _bacb,
    Method.RK4_REFERENCE: _rk4,
}


# -- trajectories --


@dataclass(frozen=True)
class IntegratorConfig:
    step: float = 0.01
    t_final: float = 20.0
    record_every: int = 1
    method: Method = Method.CONTACT_STRANG

    def __post_init__(self):
        if not (np.isfinite(self.step) and self.step > 0):
            raise ContractViolation(f"step must be > 0, got {self.step}")
        if not (np.isfinite(self.t_final) and self.t_final > 0):
            raise ContractViolation(f"t_final must be > 0, got {self.t_final}")
        if self.t_final / self.step < 1 - 1e-9:
            raise ContractViolation("t_final must cover at least one step")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ContractViolation(f"record_every must be a positive integer, got {self.record_every}")
        object.__setattr__(self, "method", Method(self.method))

    @property
    def n_steps(self) -> int:
        return max(1, math.ceil(self.t_final / self.step - 1e-9))


@dataclass(frozen=True)
class TrajectoryRecord:
    times: np.ndarray
    states: tuple
    H0: np.ndarray
    H: np.ndarray
    p_sq: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ContractViolation("times and states differ in length")

    def __len__(self):
        return len(self.times)

    @property
    def q(self) -> np.ndarray:
        return np.array([x.q for x in self.states])

    @property
    def p(self) -> np.ndarray:
        return np.array([x.p for x in self.states])

    @property
    def s(self) -> np.ndarray:
        return np.array([x.s for x in self.states])

    @classmethod
    def from_states(cls, times, states, model: SeparatedHamiltonian) -> "TrajectoryRecord":
        states = tuple(states)
        H0 = np.array([model.kinetic(x.p) + float(model.potential(x.q)) for x in states])
        gam = np.array([model.Gamma(x.s) for x in states])
        p_sq = np.array([float(np.dot(x.p, x.p)) for x in states])
        return cls(np.asarray(times, dtype=float), states, H0, H0 + gam, p_sq)


def integrate(x0: ContactState, model: SeparatedHamiltonian, cfg: IntegratorConfig) -> TrajectoryRecord:
    """Take ``ceil(t_final / step)`` fixed steps from ``x0``, keeping every ``record_every``-th state.

    Raises :class:`NumericalError` (``index`` = failing step) on blow-up.
    """
    if cfg.method is not Method.RK4_REFERENCE:
        _require_linear(model)
    contact_rhs(model, x0)
    stepper = _STEPPERS[cfg.method]
    h = cfg.step
    q, p, s = np.array(x0.q), np.array(x0.p), x0.s
    times = [0.0]
    states = [x0]
    for k in range(1, cfg.n_steps + 1):
        q, p, s = stepper(h, q, p, s, model)
        if not (math.isfinite(s) and np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise NumericalError(f"non-finite state after step {k}", k)
        if k % cfg.record_every == 0:
            times.append(k * h)
            states.append(ContactState(q, p, s))
    return TrajectoryRecord.from_states(times, states, model)


# -- convergence --


def _steps_for(h: float, t_final: float) -> int:
    n = round(t_final / h)
    if n < 1 or abs(n * h - t_final) > 1e-6 * t_final:
        raise ContractViolation(f"step {h} does not divide t_final={t_final}")
    return n


def reference_energy(
    x0: ContactState, model: SeparatedHamiltonian, h_ref: float, t_final: float, record_every: int = 1
) -> np.ndarray:
    """H0 sampled every ``record_every`` RK4 steps of size ``h_ref`` (sample 0 at t = 0)."""
    n = _steps_for(h_ref, t_final)
    if n % record_every:
        raise ContractViolation("record_every must divide the reference step count")
    cfg = IntegratorConfig(h_ref, n * h_ref, record_every, Method.RK4_REFERENCE)
    return integrate(x0, model, cfg).H0


def convergence_study(
    x0: ContactState,
    model: SeparatedHamiltonian,
    steps: Sequence[float],
    t_final: float,
    method: Method = Method.CONTACT_STRANG,
    reference: Optional[np.ndarray] = None,
    reference_factor: int = 100,
):
    """Global energy error ``max_t |H0_num(t) - H0_ref(t)|`` for each step size.

    The reference is RK4 at ``min(steps) / reference_factor``; pass a
    precomputed ``reference`` (from :func:`reference_energy`) to reuse it.
    Returns a list of ``(h, error)`` pairs in the order given.
    """
    steps = [float(h) for h in steps]
    if len(set(steps)) < 3:
        raise ContractViolation("need at least three distinct step sizes")
    for h in steps:
        _steps_for(h, t_final)
    h_ref = min(steps) / reference_factor
    n_ref = _steps_for(h_ref, t_final)
    if reference is None:
        reference = reference_energy(x0, model, h_ref, t_final)
    if len(reference) != n_ref + 1:
        raise ContractViolation(f"reference has {len(reference)} samples, expected {n_ref + 1}")
    if not np.all(np.isfinite(reference)):
        raise NumericalError("reference integration produced non-finite energies")
    out = []
    for h in steps:
        stride = round(h / h_ref)
        if abs(stride * h_ref - h) > 1e-9 * h:
            raise ContractViolation(f"step {h} is not a multiple of the reference step {h_ref}")
        traj = integrate(x0, model, IntegratorConfig(h, t_final, 1, method))
        err = float(np.max(np.abs(traj.H0 - reference[::stride][: len(traj.H0)])))
        out.append((h, err))
    return out


def fitted_order(pairs, floor: float = 1e-13) -> Optional[float]:
    """Least-squares slope of log(error) against log(h).

    Returns ``None`` when every error sits at roundoff level (``<= floor``),
    i.e. the method is exact for the problem and an order is meaningless.
    """
    h = np.array([a for a, _ in pairs], dtype=float)
    e = np.array([b for _, b in pairs], dtype=float)
    if np.all(e <= floor):
        return None
    if np.any(e <= 0):
        raise ContractViolation("cannot fit an order through zero errors")
    slope, _ = np.polyfit(np.log(h), np.log(e), 1)
    return float(slope)


def herglotz_accumulation(traj: TrajectoryRecord, model: SeparatedHamiltonian) -> np.ndarray:
    """Accumulate ``s_{k+1} = s_k + dt L`` with ``L = T - V - gamma s`` at each interval midpoint.

    Along a consistent trajectory the result tracks the recorded s to second
    order in the sample spacing. Diagnostic only.
    """
    out = np.empty(len(traj))
    out[0] = traj.states[0].s
    for k in range(len(traj) - 1):
        a, b = traj.states[k], traj.states[k + 1]
        qm = 0.5 * (a.q + b.q)
        pm = 0.5 * (a.p + b.p)
        sm = 0.5 * (a.s + b.s)
        lag = model.kinetic(pm) - float(model.potential(qm)) - model.Gamma(sm)
        out[k + 1] = out[k] + (traj.times[k + 1] - traj.times[k]) * lag
    return out
