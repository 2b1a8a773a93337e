"""Tent-map pseudotrajectories, transfer operators and shadowing experiments."""

from ._tentshadow import (
    IoError,
    NumericalError,
    TentMap,
    TentshadowError,
    ValidationError,
    __version__,
    adversarial_pseudotrajectory,
    capture_time,
    cky_constant,
    correlations,
    detect_periodic_parameter,
    find_periodic_parameter,
    gen_realization,
    is_admissible,
    lower_bound,
    observable_ids,
    orbit,
    periodic_points,
    shadow_search,
    stability_slope,
    stationary_density,
    stochastic_shadowing,
    tube_return_time,
    ulam_matrix,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
