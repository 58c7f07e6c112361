import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from contactmech import (
    Classification,
    ContractViolation,
    DampingModel,
    InertiaTensor,
    RigidBodyState,
    classify_stability,
    find_equilibria,
    integrate_rigid_body,
    linearize,
    rb_rhs,
    rb_step,
)
from contactmech.rigid_body import gram_schmidt, hat, kinetic_energy, so3_exp

I123 = InertiaTensor((1.0, 2.0, 3.0))
comp = st.floats(-3, 3, allow_nan=False)
vec3 = st.tuples(comp, comp, comp)


def state(M, R=None, s=0.0):
    return RigidBodyState(np.eye(3) if R is None else R, M, s)


# -- types --


def test_inertia_validation():
    with pytest.raises(ContractViolation):
        InertiaTensor((1.0, 0.0, 2.0))
    with pytest.warns(UserWarning):
        InertiaTensor((1.0, 1.0, 5.0))


def test_damping_validation():
    with pytest.raises(ContractViolation):
        DampingModel.isotropic(-1.0)
    with pytest.raises(ContractViolation):
        DampingModel.anisotropic([[1, 2, 0], [0, 1, 0], [0, 0, 1]])
    with pytest.raises(ContractViolation):
        DampingModel.anisotropic(np.diag([1.0, -0.1, 0.0]))
    assert DampingModel.isotropic(0.3).is_isotropic
    assert not DampingModel.anisotropic(np.zeros((3, 3))).is_isotropic


def test_state_requires_rotation():
    with pytest.raises(ContractViolation):
        RigidBodyState(2 * np.eye(3), [0, 0, 1])
    with pytest.raises(ContractViolation):
        RigidBodyState(np.diag([1.0, 1.0, -1.0]), [0, 0, 1])


@given(vec3)
def test_so3_exp_is_rotation_and_matches_series(w):
    R = so3_exp(np.array(w))
    assert np.linalg.norm(R.T @ R - np.eye(3)) < 1e-12
    assert abs(np.linalg.det(R) - 1) < 1e-12


def test_so3_exp_against_matrix_series():
    w = np.array([0.3, -0.2, 0.5])
    W = hat(w)
    series = sum(np.linalg.matrix_power(W, k) / math.factorial(k) for k in range(25))
    assert np.allclose(so3_exp(w), series, atol=1e-15)
    assert np.allclose(so3_exp(1e-8 * w), np.eye(3) + 1e-8 * W, atol=1e-15)


def test_gram_schmidt_restores_orthogonality():
    R = so3_exp([0.4, 0.1, -0.7]) + 1e-6 * np.arange(9).reshape(3, 3)
    Q = gram_schmidt(R)
    assert np.linalg.norm(Q.T @ Q - np.eye(3)) < 1e-14
    assert np.linalg.det(Q) == pytest.approx(1.0)


# -- vector field --


def test_principal_axis_is_relative_equilibrium():
    for i in range(3):
        M = np.zeros(3)
        M[i] = 2.0
        _, dM, _ = rb_rhs(state(M), I123, DampingModel.isotropic(0.0))
        assert np.array_equal(dM, np.zeros(3))


def test_gyroscopic_term_example():
    _, dM, _ = rb_rhs(state([0.0, 1.0, 1.0]), I123, DampingModel.isotropic(0.0))
    # (M x Omega)_1 = M2 Omega3 - M3 Omega2 = 1/3 - 1/2
    assert np.allclose(dM, [-1.0 / 6.0, 0.0, 0.0], atol=1e-16)


def test_attitude_kinematics():
    R = so3_exp([0.1, 0.2, 0.3])
    dR, _, _ = rb_rhs(state([1.0, 2.0, 3.0], R), I123, DampingModel.isotropic(0.0))
    assert np.allclose(dR, R @ hat([1.0, 1.0, 1.0]))


@given(vec3, st.floats(0, 3))
def test_energy_rate_is_minus_two_gamma_energy(M, gamma):
    M = np.array(M)
    _, dM, _ = rb_rhs(state(M), I123, DampingModel.isotropic(gamma))
    rate = float(M @ (I123.inverse * dM))
    assert rate == pytest.approx(-2 * gamma * kinetic_energy(M, I123), rel=1e-12, abs=1e-12)


@given(vec3, st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10))
def test_gyroscopic_term_does_no_work(M, a, b, c):
    inertia = InertiaTensor((a, b, c)) if max(a, b, c) <= min(a + b, b + c, a + c) else I123
    M = np.array(M)
    Om = inertia.inverse * M
    gyro = np.cross(M, Om)
    assert abs(M @ (inertia.inverse * gyro)) <= 1e-12 * max(1.0, M @ M) ** 1.5
    assert abs(M @ gyro) <= 1e-12 * max(1.0, M @ M) ** 1.5


def test_contact_coordinate_rate():
    _, _, ds = rb_rhs(state([1.0, 1.0, 1.0], s=0.4), I123, DampingModel.isotropic(0.5))
    assert ds == pytest.approx(0.5 * (1 + 0.5 + 1 / 3) - 0.5 * 0.4)
    _, _, ds = rb_rhs(state([1.0, 1.0, 1.0], s=0.4), I123, DampingModel.anisotropic(np.eye(3)))
    assert ds == 0.0


# -- stepper --


def test_steady_rotation_about_principal_axis():
    x = state([0.0, 0.0, 1.5])
    h, n = 0.01, 500
    for _ in range(n):
        x = rb_step(h, x, I123, DampingModel.isotropic(0.0))
    assert np.array_equal(x.M, [0.0, 0.0, 1.5])
    assert np.allclose(x.R, so3_exp([0.0, 0.0, 0.5 * h * n]), atol=1e-12)


def test_rb_step_rejects_bad_step():
    with pytest.raises(ContractViolation):
        rb_step(0.0, state([1, 0, 0]), I123, DampingModel.isotropic(0.0))


def test_isotropic_energy_and_casimir_decay():
    gamma = 0.5
    traj = integrate_rigid_body(state([1.0, 1.0, 1.0]), I123, DampingModel.isotropic(gamma), 1e-3, 2.0)
    assert np.max(traj.decay_residual(gamma)) / traj.H0[0] <= 1e-6
    norms = np.linalg.norm(traj.M, axis=1)
    assert np.max(np.abs(norms - norms[0] * np.exp(-gamma * traj.times))) / norms[0] <= 1e-6


def test_contact_coordinate_tracks_exact_solution():
    # s' = H0 - gamma s with H0 = H0(0) e^{-2 gamma t}  =>  s = (H0(0)/gamma)(e^{-gamma t} - e^{-2 gamma t}) for s(0)=0
    gamma = 0.5
    traj = integrate_rigid_body(state([1.0, 1.0, 1.0]), I123, DampingModel.isotropic(gamma), 1e-3, 2.0)
    H00 = traj.H0[0]
    exact = H00 / gamma * (np.exp(-gamma * traj.times) - np.exp(-2 * gamma * traj.times))
    assert np.max(np.abs(traj.s - exact)) < 1e-10


@pytest.mark.slow
def test_orthogonality_drift_after_many_steps():
    traj = integrate_rigid_body(state([1.0, -0.5, 2.0]), I123, DampingModel.isotropic(0.0), 1e-3, 100.0, 100_000)
    R = traj.R[-1]
    assert len(traj) == 2
    assert np.linalg.norm(R.T @ R - np.eye(3)) <= 1e-9


# -- equilibria --


def _brute_force_equilibrium_axes(inertia, D, n=181):
    """Scan a latitude/longitude grid of unit vectors for points with D M = 0 and M x I^-1 M = 0."""
    hits = set()
    for th in np.linspace(0, np.pi, n):
        for ph in np.linspace(0, 2 * np.pi, 2 * n - 1):
            M = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
            if np.linalg.norm(D @ M) < 1e-9 and np.linalg.norm(np.cross(M, inertia.inverse * M)) < 1e-9:
                hits.add(int(np.argmax(np.abs(M))) + 1)
    return hits


def test_isotropic_damping_leaves_only_origin():
    rep = find_equilibria(I123, DampingModel.isotropic(0.3))
    assert len(rep.equilibria) == 1 and rep.equilibria[0].is_origin
    assert rep.equilibria[0].classification is Classification.ORIGIN_GLOBAL_SINK
    assert np.allclose(rep.equilibria[0].eigenvalues, -0.3)


def test_undamped_equilibria_are_all_axes():
    rep = find_equilibria(I123, DampingModel.anisotropic(np.zeros((3, 3))))
    assert rep.axes() == [1, 2, 3]
    assert _brute_force_equilibrium_axes(I123, np.zeros((3, 3))) == {1, 2, 3}
    cls = {e.axis: e.classification for e in rep.equilibria}
    assert cls[2] is Classification.SADDLE_UNSTABLE
    assert cls[1] is Classification.MARGINAL and cls[3] is Classification.MARGINAL


@pytest.mark.parametrize("d2,d3", [(1.0, 1.0), (0.3, 2.0)])
def test_partial_damping_selects_axis_one(d2, d3):
    D = np.diag([0.0, d2, d3])
    rep = find_equilibria(I123, DampingModel.anisotropic(D))
    assert rep.axes() == [1]
    assert _brute_force_equilibrium_axes(I123, D) == {1}


def test_degenerate_inertia_reported_as_family():
    rep = find_equilibria(InertiaTensor((1.0, 1.0, 1.5)), DampingModel.anisotropic(np.zeros((3, 3))))
    kinds = [e.classification for e in rep.nonzero()]
    assert Classification.DEGENERATE_FAMILY in kinds
    fam = next(e for e in rep.nonzero() if e.classification is Classification.DEGENERATE_FAMILY)
    assert fam.plane.shape == (2, 3)
    assert rep.axes() == [3]


def test_report_residuals(rng):
    for _ in range(10):
        d = np.diag(rng.uniform(0, 2, 3) * (rng.uniform(size=3) < 0.5))
        damping = DampingModel.anisotropic(d)
        for e in find_equilibria(I123, damping).nonzero():
            assert np.linalg.norm(np.cross(e.M_star, I123.inverse * e.M_star)) <= 1e-10
            assert np.linalg.norm(d @ e.M_star) <= 1e-10 * max(1.0, damping.norm)


def test_linearize_examples():
    zero = DampingModel.anisotropic(np.zeros((3, 3)))
    assert np.array_equal(linearize(np.zeros(3), I123, zero), np.zeros((3, 3)))
    A = linearize(np.zeros(3), I123, DampingModel.isotropic(0.7))
    assert np.allclose(A, -0.7 * np.eye(3))
    A = linearize([0.0, 1.3, 0.0], I123, zero)
    assert np.max(np.linalg.eigvals(A).real) > 0


def test_linearize_against_finite_differences(rng):
    D = np.diag([0.0, 0.0, 0.8])
    damping = DampingModel.anisotropic(D)
    Ms = np.array([0.0, 1.7, 0.0])
    A = linearize(Ms, I123, damping)

    def f(M):
        return np.cross(M, I123.inverse * M) - D @ M

    J = np.column_stack([(f(Ms + 1e-6 * e) - f(Ms - 1e-6 * e)) / 2e-6 for e in np.eye(3)])
    assert np.allclose(A, J, atol=1e-8)


def test_linearize_rejects_non_equilibrium():
    with pytest.raises(ContractViolation, match="not an equilibrium"):
        linearize([1.0, 1.0, 0.0], I123, DampingModel.isotropic(0.0))
    with pytest.raises(ContractViolation):
        linearize([1.0, 0.0, 0.0], I123, DampingModel.isotropic(0.1))


def test_classification_examples():
    zero = DampingModel.anisotropic(np.zeros((3, 3)))
    cls, eig = classify_stability([0, 0, 1.0], I123, zero)
    assert cls is Classification.MARGINAL and np.max(eig.real) <= 1e-12
    g = 0.4
    cls, _ = classify_stability([0, 0, 1.0], I123, DampingModel.anisotropic(np.diag([g, g, 0.0])))
    assert cls is Classification.ASYMPTOTICALLY_STABLE
    for D in (np.zeros((3, 3)), np.diag([0.05, 0.0, 0.02]), np.diag([0.1, 0.0, 0.0])):
        cls, _ = classify_stability([0, 1.0, 0], I123, DampingModel.anisotropic(D))
        assert cls is Classification.SADDLE_UNSTABLE


def _transverse(M, axis):
    d = M.copy()
    d[axis] = 0.0
    return np.linalg.norm(d)


@pytest.mark.parametrize(
    "D,axis",
    [
        (np.diag([0.0, 1.0, 1.0]), 0),
        (np.diag([0.3, 0.3, 0.0]), 2),
        (np.zeros((3, 3)), 1),
        (np.diag([0.05, 0.0, 0.05]), 1),
    ],
)
def test_classification_agrees_with_forward_integration(D, axis):
    damping = DampingModel.anisotropic(D)
    Ms = np.zeros(3)
    Ms[axis] = 1.0
    cls, eig = classify_stability(Ms, I123, damping)
    rng = np.random.default_rng(7)
    for _ in range(3):
        delta = rng.standard_normal(3)
        delta[axis] = 0.0
        M0 = Ms + 1e-4 * delta / np.linalg.norm(delta)
        traj = integrate_rigid_body(state(M0), I123, damping, 0.01, 40.0)
        dist = np.array([_transverse(M, axis) for M in traj.M])
        if cls is Classification.ASYMPTOTICALLY_STABLE:
            slowest = -np.max(eig.real[np.abs(eig) > 1e-9])
            # oscillatory, non-normal decay: allow twice the e-fold-to-10x time of the slowest mode
            k = int(round(2 * math.log(10) / slowest / 0.01)) + 1
            assert np.all(dist[k:] <= 0.1 * dist[0])
        else:
            assert cls is Classification.SADDLE_UNSTABLE
            assert dist.max() >= 10 * dist[0]
