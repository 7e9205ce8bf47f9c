"""Tail bounds and verification tools for the discrete-time Langevin Algorithm."""

from .bounds import (ConcentrationEnvelope, EnvelopeKind, contraction_coefficient,
                     exact_stationary_1d_quadratic, stationary_mgf_bound_convex,
                     stationary_mgf_bound_sc, subexp_constants, subexp_envelope,
                     subgaussian_envelope, variance_proxy)
from .exceptions import (BurnInUnavailableError, ConfigError, DivergenceError, DomainError,
                         EnvelopeUnavailableError, FitFailureError, InapplicableError,
                         InvalidParameterError, LangevinTailsError, SearchRangeError, ShapeError)
from .lyapunov import (ConvolutionCheck, big_phi_log, convolution_identity_check,
                       estimate_r0, log_bessel_i, log_derivative, log_phi)
from .potential import (Kind, PotentialSpec, SuperlinearFit, certify, fit_superlinear,
                        growth_constants, make_custom, make_huber_like, make_quadratic)
from .sampler import ChainConfig, SampleEnsemble, default_burn_in, gd_step, run_ensemble, step

__version__ = "0.1.0"

__all__ = [
    "big_phi_log",
    "BurnInUnavailableError",
    "certify",
    "ChainConfig",
    "ConcentrationEnvelope",
    "ConfigError",
    "contraction_coefficient",
    "convolution_identity_check",
    "ConvolutionCheck",
    "default_burn_in",
    "DivergenceError",
    "DomainError",
    "EnvelopeKind",
    "EnvelopeUnavailableError",
    "estimate_r0",
    "exact_stationary_1d_quadratic",
    "fit_superlinear",
    "FitFailureError",
    "gd_step",
    "growth_constants",
    "InapplicableError",
    "InvalidParameterError",
    "Kind",
    "LangevinTailsError",
    "log_bessel_i",
    "log_derivative",
    "log_phi",
    "make_custom",
    "make_huber_like",
    "make_quadratic",
    "PotentialSpec",
    "run_ensemble",
    "SampleEnsemble",
    "SearchRangeError",
    "ShapeError",
    "stationary_mgf_bound_convex",
    "stationary_mgf_bound_sc",
    "step",
    "subexp_constants",
    "subexp_envelope",
    "subgaussian_envelope",
    "SuperlinearFit",
    "variance_proxy",
]
