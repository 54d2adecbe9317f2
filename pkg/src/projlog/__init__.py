"""Projective logarithmic potentials on C^n and P^n: kernels, potentials,
Monge-Ampere densities, Riesz potentials and concentration dimensions."""

from .geometry import (
    AffinePoint,
    ChartDomainError,
    ProjectivePoint,
    chart_transform,
    from_chart,
    homogenize_value,
    projective_sine_distance,
    wedge_norm_sq,
)
from .kernels import grad_N_eps, hessian_N_eps, kernel_G, kernel_K, kernel_N
from .measures import (
    FamilySpec,
    Measure,
    MeasureError,
    cloud,
    concentration,
    dimension_estimate,
    dirac,
    log_moment,
    make_atomic,
    mixture,
    q_concentration,
    sample_family,
)
from .potentials import (
    PotentialField,
    Twist,
    atom_mass_diagnostic,
    eval_G,
    eval_U,
    eval_V,
    grad_V,
    hessian_V,
    ma_density,
    mixed_discriminant,
    mixed_ma_density,
    robin_estimate,
)
from .quadrature import (
    GridSpec,
    RadialRule,
    alpha_n,
    ball_mass,
    cma,
    grid_integrate,
    lp_norm,
    mc_integrate_pn,
    radial_integrate_pn,
)
from .riesz import ExponentReport, cavalieri_J, critical_exponents, lp_threshold_probe, riesz_J

__version__ = "0.1.0"
