"""Simulation and numerical verification of symmetric alpha-stable
self-similar stationary-increment processes defined by spectral kernels."""

from .core import (
    CfExponent,
    LinearCombo,
    PathEnsemble,
    RandomMeasureGrid,
    StableLaw,
    cf_exponent,
    combo,
    empirical_cf,
    sample_standard_sas,
    simulate,
)
from .kernels import (
    Admissibility,
    Chentsov,
    FamilySpec,
    FourierSeries,
    InvalidSpecError,
    Kernel,
    Lfsm,
    LinearMotion,
    LogFractional,
    MixedLfsm,
    RotatingAverage,
    TruncatedFractional,
    build,
    build_unchecked,
    catalog_specs,
    hurst_of,
    integral_I,
    region_map,
    truncated_region,
    validate,
)
from .quadrature import DivergenceError, QuadraturePolicy

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
