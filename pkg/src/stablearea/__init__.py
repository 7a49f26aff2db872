"""Area under a spectrally positive stable process up to its first zero.

Exact sampling, a certified series density with its asymptotes, direct path
simulation, a perpetuity simulator for spectrally negative Lévy processes,
and the statistics used to check them against each other.
"""

from importlib.metadata import PackageNotFoundError, version as _version

from .arealaw import (
    AlphaContext,
    CdfTable,
    DensityValue,
    ToleranceError,
    cdf,
    density,
    density_many,
    density_tail_asymptote,
    density_zero_asymptote,
    fractional_moment,
    moment_by_quadrature,
    sample_area,
    sample_area_shifted,
    series_floor,
)
from .dist import ParameterError, RngState, SampleBatch
from .specfun import DomainError, PoleError

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

__all__ = [
    "AlphaContext",
    "CdfTable",
    "DensityValue",
    "DomainError",
    "ParameterError",
    "PoleError",
    "RngState",
    "SampleBatch",
    "ToleranceError",
    "cdf",
    "density",
    "density_many",
    "density_tail_asymptote",
    "density_zero_asymptote",
    "fractional_moment",
    "moment_by_quadrature",
    "sample_area",
    "sample_area_shifted",
    "series_floor",
    "__version__",
]
