"""Monte Carlo trial runner, empirical ROC/AUC, and error-rate summaries.

Every trial draws from its own generator derived from (seed, trial index),
so results are bit-identical for a fixed seed regardless of how trials are
scheduled or parallelized.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from . import detectors
from .channel import substream
from .detectors import DetectorConfig, HypothesisMoments
from .specfun import q_function
from .sysmodel import (
    ScenarioParams,
    average_signal_stats,
    generate_block,
    generate_realization,
    signal_stats,
)

__all__ = [
    "CHANNEL_MODES",
    "THRESHOLD_MODES",
    "PARAM_MODES",
    "TrialSummary",
    "TrialScores",
    "RocCurve",
    "AucInputs",
    "wilson_interval",
    "run_trials",
    "empirical_roc",
    "auc_trapezoid",
    "auc_closed_form",
    "auc_inputs",
    "ber",
]

CHANNEL_MODES = ("fixed", "fading")
THRESHOLD_MODES = ("genie", "average")
PARAM_MODES = ("average", "genie")

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


def wilson_interval(successes: int, total: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if total <= 0:
        return (0.0, 1.0)
    if not 0 <= successes <= total:
        raise ValueError(f"successes must lie in [0, {total}], got {successes}")
    phat = successes / total
    denom = 1.0 + z**2 / total
    center = (phat + z**2 / (2 * total)) / denom
    half = (z / denom) * math.sqrt(phat * (1.0 - phat) / total + z**2 / (4 * total**2))
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class TrialSummary:
    """Aggregated Monte Carlo outcome for one detector at one operating point."""

    trials: int
    n_h0: int
    n_h1: int
    false_alarms: int
    detections: int
    empirical_pf: float
    empirical_pd: float
    empirical_ber: float
    pf_ci: tuple[float, float]
    pd_ci: tuple[float, float]
    ber_ci: tuple[float, float]
    seed: int
    config_fingerprint: str


@dataclass(frozen=True)
class TrialScores:
    """Per-trial statistic values relative to the applied threshold."""

    scores_h0: np.ndarray
    scores_h1: np.ndarray


@dataclass(frozen=True)
class RocCurve:
    """Empirical operating points, strictly increasing in P_F."""

    pf: np.ndarray
    pd: np.ndarray
    thresholds: np.ndarray


@dataclass(frozen=True)
class AucInputs:
    """Standardized mean separation a and deviation ratio b of a statistic."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.b > 0.0):
            raise ValueError(f"require finite a and b > 0, got a={self.a}, b={self.b}")


def _fingerprint(*parts) -> str:
    digest = hashlib.sha256()
    for part in parts:
        digest.update(repr(part).encode())
        digest.update(b"\x1f")
    return digest.hexdigest()[:16]


def run_trials(
    params: ScenarioParams,
    detector: DetectorConfig,
    n_trials: int,
    seed: int,
    target_pf: float = 0.05,
    channel_mode: str = "fading",
    threshold_mode: str | None = None,
    param_mode: str = "average",
    collect_scores: bool = False,
) -> TrialSummary | tuple[TrialSummary, TrialScores]:
    """Monte Carlo decision trials for one detector at one operating point.

    channel_mode "fixed" draws a single channel realization reused by every
    trial and conditions the threshold on it; "fading" redraws the channel
    each trial.  threshold_mode "genie" recomputes the threshold from the
    realized channel, "average" uses channel statistics only (the default in
    fading mode).  Free detector parameters (IED exponent, JCED weights) are
    resolved once per call against the average statistics; param_mode "genie"
    re-optimizes them against each realized channel instead, which requires
    per-realization thresholds.  Re-optimizing the IED exponent per trial
    sweeps the whole p grid each realization and is slow under McLeish noise.

    Collected scores are statistic minus applied threshold, so they remain
    comparable across trials under per-realization thresholds.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be positive, got {n_trials}")
    if channel_mode not in CHANNEL_MODES:
        raise ValueError(f"channel_mode must be one of {CHANNEL_MODES}, got {channel_mode!r}")
    if threshold_mode is None:
        threshold_mode = "genie" if channel_mode == "fixed" else "average"
    if threshold_mode not in THRESHOLD_MODES:
        raise ValueError(f"threshold_mode must be one of {THRESHOLD_MODES}, got {threshold_mode!r}")
    if param_mode not in PARAM_MODES:
        raise ValueError(f"param_mode must be one of {PARAM_MODES}, got {param_mode!r}")
    if param_mode == "genie" and threshold_mode != "genie":
        raise ValueError("param_mode 'genie' requires threshold_mode 'genie'")

    noise = params.noise
    avg_stats = average_signal_stats(params, params.budget)
    resolved = detectors.resolve_parameters(detector, avg_stats, noise, target_pf)
    per_trial_params = param_mode == "genie" and channel_mode == "fading"

    fixed_real = None
    fixed_threshold = None
    if channel_mode == "fixed":
        fixed_real = generate_realization(params, params.budget, substream(seed, 1, 0))
        if threshold_mode == "genie":
            fixed_stats = signal_stats(params, fixed_real)
            if param_mode == "genie":
                resolved = detectors.resolve_parameters(detector, fixed_stats, noise, target_pf)
            moments = detectors.detector_moments(resolved, fixed_stats, noise)
        else:
            moments = detectors.detector_moments(resolved, avg_stats, noise)
        fixed_threshold = detectors.threshold(moments, target_pf)
    elif threshold_mode == "average":
        moments = detectors.detector_moments(resolved, avg_stats, noise)
        fixed_threshold = detectors.threshold(moments, target_pf)

    n_h0 = n_h1 = false_alarms = detections = 0
    scores_h0: list[float] = []
    scores_h1: list[float] = []

    for trial in range(n_trials):
        rng = substream(seed, 0, trial)
        bit = 1 if rng.random() < params.prior_h1 else 0
        if fixed_real is not None:
            realization = fixed_real
        else:
            realization = generate_realization(params, params.budget, rng)
        trial_cfg = resolved
        if per_trial_params:
            trial_cfg = detectors.resolve_parameters(
                detector, signal_stats(params, realization), noise, target_pf
            )
        block = generate_block(realization, bit, params, rng)
        stat = detectors.detector_statistic(trial_cfg, block, noise)
        if fixed_threshold is not None:
            tau = fixed_threshold
        else:
            moments = detectors.detector_moments(trial_cfg, signal_stats(params, realization), noise)
            tau = detectors.threshold(moments, target_pf)
        decide = stat > tau
        if bit == 0:
            n_h0 += 1
            false_alarms += int(decide)
            if collect_scores:
                scores_h0.append(stat - tau)
        else:
            n_h1 += 1
            detections += int(decide)
            if collect_scores:
                scores_h1.append(stat - tau)

    misses = n_h1 - detections
    summary = TrialSummary(
        trials=n_trials,
        n_h0=n_h0,
        n_h1=n_h1,
        false_alarms=false_alarms,
        detections=detections,
        empirical_pf=false_alarms / n_h0 if n_h0 else math.nan,
        empirical_pd=detections / n_h1 if n_h1 else math.nan,
        empirical_ber=(false_alarms + misses) / n_trials,
        pf_ci=wilson_interval(false_alarms, n_h0),
        pd_ci=wilson_interval(detections, n_h1),
        ber_ci=wilson_interval(false_alarms + misses, n_trials),
        seed=seed,
        config_fingerprint=_fingerprint(
            params, detector, n_trials, target_pf, channel_mode, threshold_mode, param_mode
        ),
    )
    if collect_scores:
        return summary, TrialScores(np.asarray(scores_h0), np.asarray(scores_h1))
    return summary


def empirical_roc(scores_h0: np.ndarray, scores_h1: np.ndarray) -> RocCurve:
    """Operating points swept over all observed score thresholds.

    Decisions are strict exceedances; duplicate P_F values collapse to their
    highest P_D so the returned P_F axis is strictly increasing.
    """
    s0 = np.sort(np.asarray(scores_h0, dtype=float))
    s1 = np.sort(np.asarray(scores_h1, dtype=float))
    if s0.size == 0 or s1.size == 0:
        raise ValueError("both score sets must be non-empty")
    thresholds = np.unique(np.concatenate([s0, s1]))[::-1]
    pf = 1.0 - np.searchsorted(s0, thresholds, side="right") / s0.size
    pd = 1.0 - np.searchsorted(s1, thresholds, side="right") / s1.size
    # Thresholds are descending, so pf and pd are nondecreasing; the last
    # entry of each equal-pf run carries its largest pd.
    last_of_run = np.r_[pf[1:] != pf[:-1], True]
    return RocCurve(pf=pf[last_of_run], pd=pd[last_of_run], thresholds=thresholds[last_of_run])


def auc_trapezoid(roc: RocCurve) -> float:
    """Trapezoidal area under the empirical curve, closed at (0,0) and (1,1)."""
    pf = np.r_[0.0, roc.pf, 1.0]
    pd = np.r_[0.0, roc.pd, 1.0]
    return float(np.trapezoid(pd, pf))


def auc_closed_form(inputs: AucInputs) -> float:
    """Area under the Gaussian-approximated ROC: Q(a / sqrt(b^2 + 1))."""
    return q_function(inputs.a / math.sqrt(inputs.b**2 + 1.0))


def auc_inputs(moments: HypothesisMoments) -> AucInputs:
    """AUC inputs of a statistic from its hypothesis moments."""
    return AucInputs(
        a=(moments.mean_h0 - moments.mean_h1) / math.sqrt(moments.var_h1),
        b=math.sqrt(moments.var_h0 / moments.var_h1),
    )


def ber(pf: float, pd: float, prior_h0: float = 0.5, prior_h1: float = 0.5) -> float:
    """On-off keying bit error rate prior_h0 * P_F + prior_h1 * (1 - P_D)."""
    for name, value in (("pf", pf), ("pd", pd)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")
    if abs(prior_h0 + prior_h1 - 1.0) > 1e-9:
        raise ValueError("priors must sum to 1")
    return prior_h0 * pf + prior_h1 * (1.0 - pd)
