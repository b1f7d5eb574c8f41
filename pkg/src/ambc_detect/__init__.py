"""Non-coherent detection library for ambient backscatter readers.

Implements energy, improved-energy (p-norm), and joint-correlation energy
detectors with closed-form thresholds and detection probabilities under
Gaussian and McLeish noise, plus a reproducible Monte Carlo harness.
"""

from .analysis import (
    AucInputs,
    RocCurve,
    TrialScores,
    TrialSummary,
    auc_closed_form,
    auc_inputs,
    auc_trapezoid,
    ber,
    empirical_roc,
    run_trials,
    wilson_interval,
)
from .channel import (
    GeometryConfig,
    LinkBudget,
    NoiseModel,
    build_link_budget,
    db_to_linear,
    dbm_to_watts,
    draw_fading,
    draw_noise,
    free_space_pathloss,
    linear_to_db,
    substream,
    watts_to_dbm,
)
from .detectors import (
    DetectorConfig,
    HypothesisMoments,
    JcedComponentMoments,
    JcedWeights,
    analytic_pd,
    detector_moments,
    detector_statistic,
    ied_moments,
    ied_statistic,
    jced_moments,
    jced_statistic,
    optimize_p,
    optimize_weights,
    resolve_parameters,
    ted_moments,
    ted_statistic,
    threshold,
)
from .specfun import (
    GammaDistParams,
    QuadratureSpec,
    bessel_k,
    gamma_cdf,
    gamma_cdf_inverse,
    mcleish_abs_moment,
    q_function,
    q_inverse,
)
from .sysmodel import (
    ChannelRealization,
    SampleBlock,
    ScenarioParams,
    SignalStats,
    average_signal_stats,
    generate_block,
    generate_realization,
    hypothesis_variances,
    signal_stats,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # specfun
    "GammaDistParams",
    "QuadratureSpec",
    "q_function",
    "q_inverse",
    "gamma_cdf",
    "gamma_cdf_inverse",
    "bessel_k",
    "mcleish_abs_moment",
    # channel
    "GeometryConfig",
    "LinkBudget",
    "NoiseModel",
    "build_link_budget",
    "free_space_pathloss",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_watts",
    "watts_to_dbm",
    "substream",
    "draw_fading",
    "draw_noise",
    # sysmodel
    "ScenarioParams",
    "ChannelRealization",
    "SampleBlock",
    "SignalStats",
    "generate_realization",
    "generate_block",
    "signal_stats",
    "average_signal_stats",
    "hypothesis_variances",
    # detectors
    "DetectorConfig",
    "JcedWeights",
    "HypothesisMoments",
    "JcedComponentMoments",
    "ted_statistic",
    "ied_statistic",
    "jced_statistic",
    "ted_moments",
    "ied_moments",
    "jced_moments",
    "threshold",
    "analytic_pd",
    "detector_statistic",
    "detector_moments",
    "resolve_parameters",
    "optimize_p",
    "optimize_weights",
    # analysis
    "TrialSummary",
    "TrialScores",
    "RocCurve",
    "AucInputs",
    "run_trials",
    "empirical_roc",
    "auc_trapezoid",
    "auc_closed_form",
    "auc_inputs",
    "ber",
    "wilson_interval",
]
