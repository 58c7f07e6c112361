"""Structure-preserving simulation of contact Hamiltonian (conservative + dissipative) mechanics."""
from .core import (
    ContactState,
    ContractViolation,
    NumericalError,
    SeparatedHamiltonian,
    contact_rhs,
    dissipation_rate,
    eval_mechanical_energy,
    eval_total_H,
    gradient_check,
)
from .integrators import (
    IntegratorConfig,
    Method,
    TrajectoryRecord,
    a_flow,
    b_flow,
    bacb_step,
    c_flow,
    convergence_study,
    fitted_order,
    herglotz_accumulation,
    integrate,
    reference_energy,
    rk4_step,
    strang_step,
)
from .rigid_body import (
    Classification,
    DampingModel,
    EquilibriumReport,
    InertiaTensor,
    RigidBodyState,
    classify_stability,
    find_equilibria,
    integrate_rigid_body,
    linearize,
    rb_rhs,
    rb_step,
)
from .symmetry import BodyRotation, PlanarRotation, check_momentum_decay, momentum_value, time_dependent_level

__version__ = "0.1.0"
