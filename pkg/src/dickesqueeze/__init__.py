"""Spin squeezing in the Dicke model with a cosine-modulated coupling.

The package builds the static, driven, rotating-frame and effective
Hamiltonians of the model, evolves atom-photon states, extracts the
squeezing parameter xi^2 and its minimum over a horizon, and checks the
results against the frozen-spin closed forms.
"""

__version__ = "0.1.0"

from .core import (
    BosonOperators,
    HilbertDims,
    Operator,
    SpinMoments,
    SpinOperators,
    StateVector,
    build_boson_ops,
    build_spin_ops,
    composite_spin_ops,
    initial_state,
    moments,
    operator_function,
    tensor,
)
from .model import (
    DriveParams,
    MicroscopicParams,
    StaticParams,
    fourier_component,
    fourier_quadrature,
    from_microscopic,
    g_of_t,
    h_driven,
    h_effective,
    h_effective_largen,
    h_static,
    h_transformed,
    parity_operator,
    rotating_unitary,
)
from .propagator import (
    ConvergenceReport,
    IntegratorConfig,
    ObservableSet,
    Trajectory,
    check_fock_convergence,
    evolve_driven,
    evolve_static,
    kernel_name,
)
from .squeezing import (
    MsfResult,
    SqueezeSample,
    default_coarse_dt,
    default_horizon,
    msf_scan,
    undriven_msf_curve,
    xi_squared,
)
from .analytic import (
    ExperimentReport,
    FrozenSpinParams,
    db,
    experiment_report,
    frozen_spin_variances,
    msf_analytic,
    optimal_times,
    q_of,
)
from .runners import RunSetup, ScanSettings, run_msf, run_trace
from . import errors

__all__ = [name for name in dir() if not name.startswith("_")]
