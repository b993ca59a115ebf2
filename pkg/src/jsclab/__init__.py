"""Finite-blocklength information-spectrum laboratory.

Exact distributions of normalized information statistics for small
discrete systems, finite-n coding bounds, explicit code constructions
with exact error evaluation, and grid diagnostics for transmissibility
conditions and spectral rate functionals.
"""
from .analysis import (
    ConditionTrace,
    DiagnosticsReport,
    RateReport,
    SeparationReport,
    check_converse,
    check_direct,
    check_domination,
    check_eps,
    check_product_domination,
    check_strict_domination,
    converse_property_diagnostics,
    rate_functionals,
    report_value,
    separation_verdict,
)
from .bounds import (
    BoundReport,
    GammaSchedule,
    GammaValues,
    event_mass_a_le_b_plus,
    feinstein_bound,
    gamma_values,
    separation_bound,
    verdu_han_bound,
)
from .coding import (
    FAIL,
    ErrorReport,
    JointCode,
    brute_force_optimal_error,
    ensemble_average_error,
    exact_error,
    map_decoder,
    parse_code,
    sample_codebook,
    serialize_code,
    threshold_decoder,
    two_step_code,
)
from .models import (
    DEFAULT_BUDGET,
    BudgetError,
    ConditionalInput,
    DmcChannel,
    EncoderInput,
    IidInput,
    IidSource,
    MixedChannel,
    MixedSource,
    TableChannel,
    TableSource,
    UniformMessageSource,
    avg_max_gap_channel,
    avg_max_gap_encoder_input,
    avg_max_gap_instance,
    avg_max_gap_source,
    bsc,
    deterministic_channel,
    entropy_spectrum,
    entropy_spectrum_bracket,
    information_spectrum,
    joint_density_spectrum,
    noiseless_channel,
    output_law,
)
from .scenario import Scenario, ScenarioError, canonical_digest, load_scenario, parse_scenario
from .spectra import (
    DEFAULT_TAIL_EPS,
    JointSpectrum,
    LimitEstimate,
    Spectrum,
    atom_mass,
    ccdf,
    cdf,
    convolve_iid,
    estimate_plim,
    lower_tail_threshold,
    mix_spectra,
    mixture_sandwich,
    quantile,
    upper_tail_threshold,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
