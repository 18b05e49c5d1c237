"""Curvature pinching and mean curvature flow laboratory for submanifolds
of round spheres."""

from .diagnostics import (
    Diagnostics,
    check_decay,
    gradient_estimate_monitor,
    myers_diameter,
    pinch_diagnostics,
    ricci_lower_bound,
)
from .flow import (
    CapState,
    CliffordState,
    FlowLimits,
    FlowState,
    RotationalProfile,
    RunRecord,
    RunRow,
    cap_flow_exact,
    cap_profile,
    clifford_flow_exact,
    clifford_from_lambda,
    clifford_profile,
    flow_step,
    make_flow_state,
    perturbed_cap_profile,
    principal_curvatures,
    run_flow,
)
from .pinching import (
    PinchingConstants,
    PinchingProfile,
    alpha,
    beta,
    derive_constants,
    gamma,
    gamma_ring,
    gamma_ring_eps,
    omega,
)
from .sff import (
    AdaptedSff,
    AmbientParams,
    SffInvariants,
    SffTensor,
    SymmetricGradSample,
    adapt_frame,
    check_grad_bounds,
    check_simons_bounds,
    invariants,
    sample_random_sff,
    traceless_part,
)
from .verify import (
    GridSpec,
    VerificationReport,
    scan_dimensions,
    verify_app,
    verify_gaep,
    verify_gminab,
    verify_grad,
    verify_simons,
)

__version__ = "0.1.0"
