"""Reaction-diffusion exclusion process on the torus: closed forms, exact solver and simulator."""

from ._core import (
    ConsistencyError,
    DomainError,
    FixedPoint,
    ModelParams,
    NumericalError,
    ParameterError,
    SizeError,
    __version__,
    adjoint_one,
    fixed_point,
    flow_energy,
    gaussian_entropy_sum,
    green_scale,
    mode_rate,
    mode_variance,
    product_marginal,
    product_measure,
    reaction_drift,
    reaction_noise,
    relative_entropy,
    rho_star,
    sample_gaussian_field,
    simulate,
    stationary_distribution,
    total_variation,
    xi,
)

__all__ = [
    "ConsistencyError",
    "DomainError",
    "FixedPoint",
    "ModelParams",
    "NumericalError",
    "ParameterError",
    "SizeError",
    "__version__",
    "adjoint_one",
    "fixed_point",
    "flow_energy",
    "gaussian_entropy_sum",
    "green_scale",
    "mode_rate",
    "mode_variance",
    "product_marginal",
    "product_measure",
    "reaction_drift",
    "reaction_noise",
    "relative_entropy",
    "rho_star",
    "sample_gaussian_field",
    "simulate",
    "stationary_distribution",
    "total_variation",
    "xi",
]
