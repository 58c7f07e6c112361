import numpy as np
import pytest

from contactmech import ContactState

ACCEPTANCE_LINES = []


def rk4_oracle(f, y0, t, n):
    """Plain RK4 for y' = f(y) over [0, t] in n steps. Independent of the library steppers."""
    y = np.array(y0, dtype=float)
    h = t / n
    for _ in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    return y


def contact_field(model):
    """Full contact vector field on packed y = (q, p, s), written from the equations directly."""

    def f(y):
        n = (len(y) - 1) // 2
        q, p, s = y[:n], y[n : 2 * n], y[2 * n]
        T = 0.5 * p @ p / model.mass
        return np.concatenate([p / model.mass, -model.potential_grad(q) - model.gamma * p, [T - model.potential(q) - model.gamma * s]])

    return f


def subsystem_field(kind, m):
    """Vector field of the kinetic ("A"), potential ("B") or damping ("C") sub-Hamiltonian, n = 2."""

    def f(y):
        q, p, s = y[:2], y[2:4], y[4]
        if kind == "A":
            return np.concatenate([p / m.mass, [0.0, 0.0], [0.5 * p @ p / m.mass]])
        if kind == "B":
            return np.concatenate([[0.0, 0.0], -m.potential_grad(q), [-m.potential(q)]])
        return np.concatenate([[0.0, 0.0], -m.gamma * p, [-m.gamma * s]])

    return f


def velocity_verlet(h, q, p, grad_v, mass=1.0):
    p_half = p - 0.5 * h * grad_v(q)
    q_new = q + h * p_half / mass
    return q_new, p_half - 0.5 * h * grad_v(q_new)


def pack(x: ContactState):
    return np.concatenate([x.q, x.p, [x.s]])


def random_state(rng, n=2, scale=1.0):
    return ContactState(scale * rng.standard_normal(n), scale * rng.standard_normal(n), scale * rng.standard_normal())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
