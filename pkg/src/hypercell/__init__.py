"""Poisson hyperplane processes and K-cells of convex bodies.

Simulation library for stationary Poisson hyperplane processes with a
prescribed directional distribution: exact cell construction around a
convex body, separation diagnostics, and Monte Carlo harnesses for
Hausdorff-distance convergence rates, exponential tail decay, and the
cap-starved counterexample law.

The 2-d geometry kernels run on a compiled Cython core when available
and a pure NumPy fallback otherwise; `hypercell.kernel_backend()`
reports which one is active.
"""
from hypercell._kernels import BACKEND as _KERNEL_BACKEND
from hypercell.cell import (
    CellPolytope,
    WindowPolicy,
    cells_along_intensity,
    halfspace_intersection,
    halfspace_intersection_bruteforce,
    k_cell,
)
from hypercell.direction import (
    Atomic,
    CapStarved,
    DensityOnSphere,
    IntegrationConfig,
    Isotropic,
    Mixture,
    cap_starved,
    from_surface_measure,
    integrate,
    sample_direction,
    support_of,
    supports_approximation,
)
from hypercell.experiment import (
    CounterexampleConfig,
    RateRunConfig,
    TailRunConfig,
    fit_loglog,
    persist,
    run_counterexample,
    run_rate,
    run_tail,
)
from hypercell.geom import (
    Ball,
    BallSum,
    Polytope,
    boundary_path,
    distance,
    extension_support,
    hausdorff_containing,
    outer_parallel,
    parallel_boundary_sample,
    support,
    surface_measure,
)
from hypercell.metrics import (
    MuConfig,
    excess,
    hausdorff_cell,
    mu_estimate,
    mu_scaling,
)
from hypercell.process import (
    Hyperplane,
    ProcessParams,
    coupled_stream,
    hits,
    phi_functional,
    sample_annulus,
    sample_hitting,
)
from hypercell.rng import KeyedStream, poisson_variate, stream

__version__ = "0.1.0"


def kernel_backend() -> str:
    """Active geometry kernel backend: "compiled" or "pure"."""
    return _KERNEL_BACKEND
