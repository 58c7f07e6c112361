"""Numerical experiments behind the ``contactmech`` command.

Each ``run_*`` function takes an :class:`ExperimentSpec` and returns an
:class:`ExperimentResult` holding CSV tables, report lines and pass/fail
checks. Nothing here touches the filesystem; see :mod:`contactmech.cli`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import ContactState, ContractViolation, SeparatedHamiltonian
from .integrators import (
    IntegratorConfig,
    Method,
    convergence_study,
    fitted_order,
    integrate,
    reference_energy,
)
from .models import harmonic_oscillator, particle2d
from .rigid_body import (
    Classification,
    DampingModel,
    InertiaTensor,
    RigidBodyState,
    find_equilibria,
    integrate_rigid_body,
)

# γ for the 2-DOF particle is not fixed by the model; 0.1 gives γT = 2 at T = 20.
PARTICLE2D_DEFAULT_GAMMA = 0.1


# -- parameter parsing --


def _vector(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(v) for v in text.split(","))


def _vector_list(text: str) -> tuple:
    return tuple(_vector(chunk) for chunk in text.split(";") if chunk.strip())


def _optional_float(text: str):
    text = text.strip()
    return None if text in ("", "none") else float(text)


_PARSERS = {
    float: float,
    int: int,
    str: str,
    "vector": _vector,
    "vectors": _vector_list,
    "optional": _optional_float,
}

# name -> key -> (parser, default as text)
PARAMETERS = {
    "oscillator": {
        "lambda": (float, "0.2"),
        "h": (float, "0.001"),
        "T": (float, repr(2 * math.pi)),
        "q0": (float, "1.0"),
        "p0": (float, "0.0"),
        "method": (str, "strang"),
    },
    "particle2d": {
        "gamma": (float, repr(PARTICLE2D_DEFAULT_GAMMA)),
        "h": (float, "0.01"),
        "T": (float, "20"),
        "q0": ("vector", "1.0,0.5"),
        "p0": ("vector", "0.0,0.5"),
        "mass": (float, "1.0"),
    },
    "rigidbody": {
        "inertia": ("vector", "1,2,3"),
        "gamma": (float, "0.5"),
        "D": ("vector", ""),
        "h": (float, "0.001"),
        "T": (float, "2"),
        "M0": ("vectors", "1,1,1;1,0.05,0.05;0.05,1,0.05;0.05,0.05,1"),
        "record_every": (int, "10"),
    },
    "convergence": {
        "steps": ("vector", "0.1,0.05,0.025,0.0125"),
        "gamma": (float, repr(PARTICLE2D_DEFAULT_GAMMA)),
        "T": (float, "20"),
        "q0": ("vector", "1.0,0.5"),
        "p0": ("vector", "0.0,0.5"),
        "reference_factor": (int, "100"),
    },
    "equilibria": {
        "inertia": ("vector", "1,2,3"),
        "D": ("vector", "0,0,0,0,0,0,0,0,0"),
        "gamma": ("optional", ""),
        "magnitude": (float, "1.0"),
        "eps": (float, "1e-4"),
        "horizon": (float, "30"),
        "h": (float, "0.01"),
        "seed": (int, "0"),
    },
}


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    parameters: dict

    @classmethod
    def parse(cls, name: str, raw: dict) -> "ExperimentSpec":
        """Merge ``raw`` (key -> text) over the defaults; unknown keys are rejected."""
        if name not in PARAMETERS:
            raise ContractViolation(f"unknown experiment {name!r}; choose from {sorted(PARAMETERS)}")
        table = PARAMETERS[name]
        unknown = sorted(set(raw) - set(table))
        if unknown:
            raise ContractViolation(f"unknown parameter(s) for {name}: {', '.join(unknown)}")
        params = {}
        for key, (kind, default) in table.items():
            text = raw.get(key, default)
            try:
                params[key] = _PARSERS[kind](str(text))
            except ValueError as exc:
                raise ContractViolation(f"bad value for {key!r}: {text!r} ({exc})") from None
        return cls(name, params)


@dataclass
class Table:
    header: tuple
    rows: list


@dataclass
class ExperimentResult:
    name: str
    tables: dict = field(default_factory=dict)
    report: list = field(default_factory=list)
    checks: list = field(default_factory=list)  # (description, passed)

    def check(self, description: str, passed: bool) -> None:
        self.checks.append((description, bool(passed)))
        self.report.append(f"[{'PASS' if passed else 'FAIL'}] {description}")

    @property
    def ok(self) -> bool:
        return all(p for _, p in self.checks)


def _contact_table(traj) -> Table:
    n = traj.states[0].n
    if n == 1:
        header = ("t", "q", "p", "s", "H0")
    else:
        header = ("t",) + tuple(f"q{i + 1}" for i in range(n)) + tuple(f"p{i + 1}" for i in range(n)) + ("s", "H0")
    rows = [(t, *x.q, *x.p, x.s, e) for t, x, e in zip(traj.times, traj.states, traj.H0)]
    return Table(header, rows)


# -- oscillator --


def run_oscillator(spec: ExperimentSpec) -> ExperimentResult:
    P = spec.parameters
    lam, T = P["lambda"], P["T"]
    if lam < 0:
        raise ContractViolation("lambda must be >= 0")
    method = Method(P["method"])
    # land exactly on T so the closing distance is measured at the requested time
    n = max(1, math.ceil(T / P["h"] - 1e-9))
    h = T / n
    x0 = ContactState([P["q0"]], [P["p0"]], 0.0)
    res = ExperimentResult("oscillator")
    res.report.append(f"harmonic oscillator, method={method.value}, h={h:.17g}, T={T:.17g}, lambda={lam:.17g}")

    cons = integrate(x0, harmonic_oscillator(0.0), IntegratorConfig(h, T, 1, method))
    res.tables["conservative"] = _contact_table(cons)
    q_ex = P["q0"] * math.cos(T) + P["p0"] * math.sin(T)
    p_ex = -P["q0"] * math.sin(T) + P["p0"] * math.cos(T)
    end = cons.states[-1]
    dist = math.hypot(end.q[0] - q_ex, end.p[0] - p_ex)
    res.check(f"lambda=0 run matches the closed-form orbit at T: distance {dist:.3e} <= 1e-4", dist <= 1e-4)

    diss = integrate(x0, harmonic_oscillator(lam), IntegratorConfig(h, T, 1, method))
    res.tables["dissipative"] = _contact_table(diss)
    if P["q0"] == 0 and P["p0"] == 0:
        zero = all(x.q[0] == 0 and x.p[0] == 0 for x in diss.states)
        res.check("trajectory from the origin stays identically zero", zero)
    elif lam > 0:
        res.check(
            f"lambda={lam:g} run loses energy: H0(T)={diss.H0[-1]:.6e} < H0(0)={diss.H0[0]:.6e}",
            diss.H0[-1] < diss.H0[0],
        )
        r0 = math.hypot(x0.q[0], x0.p[0])
        rT = math.hypot(diss.states[-1].q[0], diss.states[-1].p[0])
        res.check(f"lambda={lam:g} run spirals inward: |(q,p)(T)|={rT:.6e} < {r0:.6e}", rT < r0)
    return res


# -- 2-DOF particle --


def _dissipation_columns(traj, model: SeparatedHamiltonian, h: float):
    """Central-difference dH0/dt and its residual against -gamma |p|^2 / m at interior samples."""
    H0 = traj.H0
    fd = np.full(len(H0), np.nan)
    fd[1:-1] = (H0[2:] - H0[:-2]) / (2 * h)
    resid = np.abs(fd + model.gamma * traj.p_sq / model.mass)
    return fd, resid


def run_particle2d(spec: ExperimentSpec) -> ExperimentResult:
    P = spec.parameters
    gamma, h, T = P["gamma"], P["h"], P["T"]
    if len(P["q0"]) != 2 or len(P["p0"]) != 2:
        raise ContractViolation("q0 and p0 must have two components")
    x0 = ContactState(P["q0"], P["p0"], 0.0)
    model = particle2d(gamma, P["mass"])
    res = ExperimentResult("particle2d")
    note = " (default; not fixed by the model)" if gamma == PARTICLE2D_DEFAULT_GAMMA else ""
    res.report.append(f"2-DOF damped particle: gamma={gamma:.17g}{note}, h={h:.17g}, T={T:.17g}")
    res.report.append(f"q0={P['q0']}, p0={P['p0']}, mass={P['mass']:.17g}")

    runs = {}
    for label, method in (("strang", Method.CONTACT_STRANG), ("rk4", Method.RK4_REFERENCE)):
        traj = integrate(x0, model, IntegratorConfig(h, T, 1, method))
        fd, resid = _dissipation_columns(traj, model, h)
        base = _contact_table(traj)
        rows = [
            row + (("", "") if np.isnan(d) else (d, r)) for row, d, r in zip(base.rows, fd, resid)
        ]
        res.tables[label] = Table(base.header + ("H0dot_fd", "dissipation_residual"), rows)
        runs[label] = (traj, resid)

    a, b = runs["strang"][0].states[-1], runs["rk4"][0].states[-1]
    dist = float(np.linalg.norm(np.concatenate([a.q - b.q, a.p - b.p])))
    res.check(f"Strang vs RK4 terminal (q,p) distance {dist:.3e} <= 1e-3", dist <= 1e-3)

    traj, resid = runs["strang"]
    pdot = np.array([np.linalg.norm(-model.potential_grad(x.q) - gamma * x.p) for x in traj.states])
    bound = 5 * h * h * float(np.max(np.sqrt(traj.p_sq) * pdot))
    worst = float(np.nanmax(resid))
    res.check(f"dissipation law residual {worst:.3e} <= 5 h^2 max|p||pdot| = {bound:.3e}", worst <= bound)

    cons = integrate(x0, particle2d(0.0, P["mass"]), IntegratorConfig(h, T, 1, Method.CONTACT_STRANG))
    res.tables["strang_conservative"] = _contact_table(cons)
    drift, trend = conservative_drift(cons.H0)
    res.check(f"gamma=0 energy error max {drift:.3e} <= 1e-4", drift <= 1e-4)
    res.check(f"gamma=0 no secular trend: half-window mean errors differ by {trend:.1%} < 50%", trend < 0.5)
    return res


def conservative_drift(H0: np.ndarray):
    """``(max |H0 - H0[0]|, relative difference of first- and second-half mean errors)``."""
    err = np.abs(H0 - H0[0])
    half = len(err) // 2
    m1, m2 = float(np.mean(err[1 : half + 1])), float(np.mean(err[half + 1 :]))
    trend = abs(m2 - m1) / max(m1, m2, 1e-300)
    return float(err.max()), trend


# -- rigid body --


def _damping_from(params) -> DampingModel:
    D = params.get("D", ())
    if D:
        if len(D) != 9:
            raise ContractViolation("D needs 9 comma-separated entries (row-major)")
        return DampingModel.anisotropic(np.reshape(D, (3, 3)))
    return DampingModel.isotropic(params["gamma"])


def _axis_angle(M, axis: int) -> float:
    """Angle between the line through principal axis ``axis`` (0-based) and M."""
    c = abs(M[axis]) / max(np.linalg.norm(M), 1e-300)
    return math.acos(min(1.0, c))


def run_rigidbody(spec: ExperimentSpec) -> ExperimentResult:
    P = spec.parameters
    inertia = InertiaTensor(P["inertia"])
    damping = _damping_from(P)
    res = ExperimentResult("rigidbody")
    kind = f"isotropic gamma={damping.gamma:.17g}" if damping.is_isotropic else "anisotropic D"
    res.report.append(f"rigid body I={inertia.principal_moments}, {kind}, h={P['h']:.17g}, T={P['T']:.17g}")
    order = np.argsort(inertia.moments)
    extreme = {int(order[0]), int(order[2])}
    for k, M0 in enumerate(P["M0"]):
        if len(M0) != 3:
            raise ContractViolation("each M0 entry needs three components")
        traj = integrate_rigid_body(RigidBodyState(np.eye(3), M0, 0.0), inertia, damping, P["h"], P["T"], P["record_every"])
        header = ("t", "M1", "M2", "M3", "H0")
        if damping.is_isotropic:
            resid = traj.decay_residual(damping.gamma)
            rows = [(t, *M, e, r) for t, M, e, r in zip(traj.times, traj.M, traj.H0, resid)]
            header += ("decay_residual",)
        else:
            rows = [(t, *M, e) for t, M, e in zip(traj.times, traj.M, traj.H0)]
        res.tables[f"traj{k}"] = Table(header, rows)

        start = int(np.argmax(np.abs(traj.M[0])))
        end = int(np.argmax(np.abs(traj.M[-1])))
        left = max(_axis_angle(M, start) for M in traj.M)
        migrated = end != start and end in extreme
        res.report.append(
            f"traj{k}: M0={M0} nearest axis {start + 1} -> {end + 1}; "
            f"max angle from axis {start + 1} = {left:.4f} rad; "
            f"{'migrated toward stable axis ' + str(end + 1) if migrated else 'no migration'}"
            f"{'; left the axis neighbourhood' if left > 0.5 else ''}"
        )
        if damping.is_isotropic and traj.H0[0] > 0:
            rel = float(np.max(resid)) / traj.H0[0]
            res.check(f"traj{k}: max |H0(t) - H0(0)exp(-2 gamma t)| / H0(0) = {rel:.3e} <= 1e-6", rel <= 1e-6)
    return res


# -- convergence --


def run_convergence(spec: ExperimentSpec) -> ExperimentResult:
    P = spec.parameters
    steps, T = list(P["steps"]), P["T"]
    x0 = ContactState(P["q0"], P["p0"], 0.0)
    model = particle2d(P["gamma"])
    h_ref = min(steps) / P["reference_factor"]
    ref = reference_energy(x0, model, h_ref, T)
    res = ExperimentResult("convergence")
    res.report.append(f"2-DOF particle gamma={P['gamma']:.17g}, T={T:.17g}, RK4 reference step {h_ref:.6g}")
    errs = {}
    for method in (Method.CONTACT_STRANG, Method.CONTACT_BACB, Method.RK4_REFERENCE):
        errs[method] = convergence_study(x0, model, steps, T, method, reference=ref, reference_factor=P["reference_factor"])
    rows = [
        (h, errs[Method.CONTACT_STRANG][i][1], errs[Method.CONTACT_BACB][i][1], errs[Method.RK4_REFERENCE][i][1])
        for i, h in enumerate(steps)
    ]
    res.tables["errors"] = Table(("h", "strang_error", "bacb_error", "rk4_error"), rows)
    slopes = {m: fitted_order(e) for m, e in errs.items()}
    for m, s in slopes.items():
        res.report.append(f"fitted order {m.value}: {'exact' if s is None else f'{s:.4f}'}")
    s = slopes[Method.CONTACT_STRANG]
    res.check(f"Strang order {s if s is None else round(s, 4)} within 2.0 +- 0.2", s is None or abs(s - 2.0) <= 0.2)
    r = slopes[Method.RK4_REFERENCE]
    res.check(f"RK4 order {r if r is None else round(r, 4)} >= 3.8", r is None or r >= 3.8)
    return res


# -- equilibria --


def _transverse_distance(M, eq) -> float:
    if eq.is_origin:
        return float(np.linalg.norm(M))
    e = eq.M_star / np.linalg.norm(eq.M_star)
    d = M - np.dot(M, e) * e
    return float(np.linalg.norm(d))


def run_equilibria(spec: ExperimentSpec) -> ExperimentResult:
    P = spec.parameters
    inertia = InertiaTensor(P["inertia"])
    if P["gamma"] is not None:
        damping = DampingModel.isotropic(P["gamma"])
    else:
        damping = _damping_from({"D": P["D"], "gamma": 0.0})
    report = find_equilibria(inertia, damping, magnitude=P["magnitude"])
    res = ExperimentResult("equilibria")
    res.report.append(f"rigid body equilibria, I={inertia.principal_moments}, D=\n{damping.matrix}")
    res.report.append(report.format())

    rows = []
    for eq in report.equilibria:
        label = "origin" if eq.is_origin else ("family" if eq.plane is not None else f"axis{eq.axis}")
        eig = [v for z in eq.eigenvalues for v in (z.real, z.imag)]
        rows.append((label, *eq.M_star, eq.classification.value, *eig))
    header = ("label", "M1", "M2", "M3", "classification") + tuple(
        f"eig{i}_{part}" for i in range(1, 4) for part in ("re", "im")
    )
    res.tables["points"] = Table(header, rows)

    tol_gyro = 1e-10 * max(1.0, P["magnitude"] ** 2)
    tol_diss = 1e-10 * max(1.0, damping.norm) * max(1.0, P["magnitude"])
    for eq, row in zip(report.equilibria, rows):
        if eq.is_origin:
            continue
        gyro = np.linalg.norm(np.cross(eq.M_star, inertia.inverse * eq.M_star))
        diss = np.linalg.norm(damping.matrix @ eq.M_star)
        res.check(
            f"{row[0]}: residuals |M x I^-1 M|={gyro:.1e}, |DM|={diss:.1e} within tolerance",
            gyro <= tol_gyro and diss <= tol_diss,
        )

    # forward-integration oracle from a random perturbation of each isolated equilibrium
    rng = np.random.default_rng(P["seed"])
    for eq, row in zip(report.equilibria, rows):
        if eq.plane is not None:
            continue
        direction = rng.standard_normal(3)
        if not eq.is_origin:
            e = eq.M_star / np.linalg.norm(eq.M_star)
            direction -= np.dot(direction, e) * e
        M0 = eq.M_star + P["eps"] * direction / np.linalg.norm(direction)
        traj = integrate_rigid_body(RigidBodyState(np.eye(3), M0, 0.0), inertia, damping, P["h"], P["horizon"])
        dist = np.array([_transverse_distance(M, eq) for M in traj.M])
        shrink, grow = dist[-1] / dist[0], dist.max() / dist[0]
        line = f"{row[0]} perturbed by {P['eps']:g}: final/initial distance {shrink:.3e}, max/initial {grow:.3e}"
        if eq.classification in (Classification.ASYMPTOTICALLY_STABLE, Classification.ORIGIN_GLOBAL_SINK):
            res.check(f"{line}; re-converges (<= 0.1)", shrink <= 0.1)
        elif eq.classification is Classification.SADDLE_UNSTABLE:
            res.check(f"{line}; diverges (>= 10)", grow >= 10)
        else:
            res.report.append(line + " (marginal, not asserted)")
    return res


RUNNERS: dict[str, Callable[[ExperimentSpec], ExperimentResult]] = {
    "oscillator": run_oscillator,
    "particle2d": run_particle2d,
    "rigidbody": run_rigidbody,
    "convergence": run_convergence,
    "equilibria": run_equilibria,
}


def run(spec: ExperimentSpec) -> ExperimentResult:
    return RUNNERS[spec.name](spec)
