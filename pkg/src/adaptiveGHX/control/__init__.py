"""LQR design, reference generation and the adaptive inner loop."""
from adaptiveGHX.control.adaptive import (
    AdaptiveController,
    InitMode,
    adaptive_control_input,
    adaptive_update,
    build_adaptive_controller,
    build_regressor,
    build_theta_star,
    initial_theta,
    run_adaptive_tracking,
    true_theta,
)
from adaptiveGHX.control.lqr import LqrDesign, design_lqr, solve_care, solve_lyapunov
from adaptiveGHX.control.reference import (
    ReferenceSource,
    ReferenceTrajectory,
    TargetTrajectory,
    generate_reference,
)
