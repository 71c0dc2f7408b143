"""Type II blow-up lab for u_t = Δu + u⁵ in three dimensions."""

from ._core import (
    BlowupParams,
    ConfigError,
    ConstraintError,
    NumericalError,
    PlotSeries,
    RateFit,
    Trajectory,
    abel_solve,
    bubble_w,
    check_constraints,
    config_keys,
    corrector_J,
    emit_plot,
    glued_U1,
    kernel_Z0,
    mu0,
    profile_residuals,
    run_config,
    simulate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
