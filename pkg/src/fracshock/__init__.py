"""fracshock: stochastic conservation laws with fractional degenerate diffusion.

Finite-volume Euler-Maruyama simulation of

    du + [L_lam A(u) - d/dx f(u)] dt = Phi(u) dW,

its vanishing-viscosity approximation, and a Monte Carlo harness that checks
the quantitative behaviour expected of entropy solutions: the entropy
inequality, L1 contraction, total-variation and energy bounds, the
square-root viscosity convergence rate, and continuous dependence on the
diffusion nonlinearity.
"""

from ._backend import BACKEND
from .grid import Grid
from .fractional import (
    FractionalKernel,
    apply_full,
    apply_regular,
    apply_singular,
    bilinear_form,
    build_kernel,
    h_lambda_seminorm_sq,
)
from .model import (
    DiffusionSpec,
    EntropyPair,
    FluxSpec,
    a_eta_k,
    burgers_flux,
    entropy_flux,
    identity_diffusion,
    kruzkov_flux,
    linear_flux,
    make_eta_delta,
    perturbed_diffusion,
    ramp_diffusion,
    saturating_diffusion,
    zero_diffusion,
)
from .stochastic import (
    NoiseSpec,
    WienerPath,
    geometric_noise,
    ito_correction,
    noise_increment,
    sample_path,
    space_dependent_noise,
)
from .solver import (
    Problem,
    SolverConfig,
    Trajectory,
    convective_divergence,
    mollify_initial,
    run,
    run_coupled,
    run_ensemble,
    stable_dt,
)

__version__ = "0.1.0"
