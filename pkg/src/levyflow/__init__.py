"""Power-law diagnostics for dyadic flow data.

Bin flow-weighted displacement densities, fit power-law tails, compare against
distance-free null models, track indicators over time and build composite
indices. The binning and smoothing kernels have a compiled backend with a
pure-numpy fallback; ``BACKEND`` names the one in use.
"""
__version__ = "0.1.0"

from ._kernels import BACKEND
from .density import (
    DEFAULT_CUTOFF,
    DEFAULT_WIDTH,
    BinnedDensity,
    TailSegment,
    bin_flows,
    extract_tail,
    short_distance_share,
)
from .errors import (
    ComputationError,
    ConfigError,
    ConvergenceError,
    EmptyDistributionError,
    InputError,
    InsufficientDataError,
    InsufficientTailError,
    LevyflowError,
    NegativeFlowError,
    ParseError,
    RegistryMismatchError,
    UnknownCountryError,
)
from .fitting import PowerLawFit, fit, fit_loglog, fit_power_law
from .flow_model import (
    CountryRegistry,
    DistanceMatrix,
    FlowMatrix,
    LabeledMatrix,
    load_distance_matrix,
    load_flow_matrix,
    load_registry,
    rank_to_weight,
    standardize,
)
from .indices import build_tha_index, build_thc_index, build_thm_index
from .longitudinal import ExpTrend, SeriesReport, build_series, fit_exp_trend, loglog_trend_lines
from .scenarios import (
    PopulationVector,
    ScenarioDensity,
    compare,
    scenario_dyad_distance,
    scenario_population,
    scenario_strict_flat,
    tv_distance,
)
from .smoothing import SmoothedDensity, kernel_smooth, smoothed_tail
from .synthgen import SynthSpec, sample_levy_flows

__all__ = [name for name in dir() if not name.startswith("_")]
