"""Detection statistics, their moments, thresholds, and parameter optimizers.

Three non-coherent detectors are implemented:

* TED: block energy.
* IED: generalized p-norm energy, TED being the p = 2 member.
* JCED: weighted sum of block energy and the real part of the first-lag
  sample correlation, which is informative whenever the source has a
  non-vanishing first-lag autocorrelation.

Statistic normalization follows the analysis each variant is paired with:
single-antenna statistics under Gaussian noise are averaged over the block
and scaled by the noise deviation, the Gamma-mixture-noise variant uses raw
|y|^p, and the multi-antenna forms are plain sums.  Threshold and detection
probabilities come either from a two-moment Gamma fit (single-antenna
TED/IED under Gaussian noise) or from a Gaussian CLT approximation (all
other variants).

Moment bookkeeping note: decisions use Re of the correlation term, whose
noise-only variance is half that of its complex modulus; the covariance
matrices here carry the real-part value so thresholds calibrate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import NoiseModel
from .specfun import (
    GammaDistParams,
    gamma_cdf,
    gamma_cdf_inverse,
    mcleish_abs_moment,
    q_function,
    q_inverse,
)
from .sysmodel import SampleBlock, SignalStats

__all__ = [
    "DETECTOR_KINDS",
    "JcedWeights",
    "HypothesisMoments",
    "JcedComponentMoments",
    "DetectorConfig",
    "ted_statistic",
    "ied_statistic",
    "jced_statistic",
    "ted_moments",
    "ied_moments",
    "jced_moments",
    "detector_statistic",
    "detector_moments",
    "resolve_parameters",
    "threshold",
    "analytic_pd",
    "optimize_p",
    "optimize_weights",
    "P_GRID",
    "ALPHA_GRID",
]

DETECTOR_KINDS = ("ted", "ied", "jced")

# Line-search grids: 1000 evenly spaced exponents in [0.1, 3] and a
# milli-step weight grid over the open unit interval.
P_GRID = np.linspace(0.1, 3.0, 1000)
ALPHA_GRID = np.arange(1, 1000) * 1e-3


@dataclass(frozen=True)
class JcedWeights:
    """Energy/correlation combining weights, alpha + beta = 1."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0 and 0.0 < self.beta < 1.0):
            raise ValueError(f"weights must lie in (0, 1), got {self.alpha}, {self.beta}")
        if abs(self.alpha + self.beta - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {self.alpha} + {self.beta}")

    @classmethod
    def from_alpha(cls, alpha: float) -> "JcedWeights":
        return cls(alpha=alpha, beta=1.0 - alpha)

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta])


@dataclass(frozen=True)
class HypothesisMoments:
    """Distribution summary of one detection statistic under both hypotheses.

    ``form`` selects how thresholds and tail probabilities are computed:
    "gamma" uses the fitted Gamma parameters, "gaussian" the CLT normal fit.
    """

    form: str
    mean_h0: float
    mean_h1: float
    var_h0: float
    var_h1: float
    gamma_h0: GammaDistParams | None = None
    gamma_h1: GammaDistParams | None = None

    def __post_init__(self) -> None:
        if self.form not in ("gamma", "gaussian"):
            raise ValueError(f"form must be 'gamma' or 'gaussian', got {self.form!r}")
        if self.var_h0 <= 0.0 or self.var_h1 <= 0.0:
            raise ValueError("variances must be positive")
        if self.form == "gamma" and (self.gamma_h0 is None or self.gamma_h1 is None):
            raise ValueError("gamma form requires fitted Gamma parameters")


@dataclass(frozen=True)
class JcedComponentMoments:
    """Means and 2x2 covariances of (Z1, Re Z2) under both hypotheses."""

    mean_h0: np.ndarray  # (2,)
    mean_h1: np.ndarray  # (2,)
    cov_h0: np.ndarray  # (2, 2)
    cov_h1: np.ndarray  # (2, 2)

    @property
    def g(self) -> np.ndarray:
        """Mean separation vector E[.|H0] - E[.|H1]."""
        return self.mean_h0 - self.mean_h1

    def combined(self, weights: JcedWeights) -> HypothesisMoments:
        w = weights.as_array()
        return HypothesisMoments(
            form="gaussian",
            mean_h0=float(w @ self.mean_h0),
            mean_h1=float(w @ self.mean_h1),
            var_h0=float(w @ self.cov_h0 @ w),
            var_h1=float(w @ self.cov_h1 @ w),
        )


@dataclass(frozen=True)
class DetectorConfig:
    """Which detector to run and with which free parameters.

    ``p`` is required for IED before moments can be formed (use
    ``resolve_parameters`` to fill it by line search); ``weights`` may stay
    None for JCED, in which case they are optimized as well.
    """

    kind: str
    p: float | None = None
    weights: JcedWeights | None = None

    def __post_init__(self) -> None:
        if self.kind not in DETECTOR_KINDS:
            raise ValueError(f"kind must be one of {DETECTOR_KINDS}, got {self.kind!r}")
        if self.p is not None and not (math.isfinite(self.p) and self.p > 0.0):
            raise ValueError(f"p must be positive, got {self.p}")

    @property
    def label(self) -> str:
        if self.kind == "ied":
            return "ied" if self.p is None else f"ied_p{self.p:g}"
        return self.kind


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


def ted_statistic(block: SampleBlock, noise: NoiseModel) -> float:
    """Energy statistic.

    Single antenna: block-average energy, scaled by the noise variance under
    Gaussian noise and left in raw power units under Gamma-mixture noise.
    Multi antenna: plain double sum of |y|^2.
    """
    abs_sq = np.abs(block.y) ** 2
    m, n = abs_sq.shape
    if m == 1:
        value = float(abs_sq.sum()) / n
        return value / noise.variance_w if noise.is_gaussian else value
    return float(abs_sq.sum())


def ied_statistic(block: SampleBlock, p: float, noise: NoiseModel) -> float:
    """p-norm energy statistic; p = 2 reduces to ``ted_statistic``."""
    if p <= 0.0:
        raise ValueError(f"p must be positive, got {p}")
    m, n = block.y.shape
    if noise.is_gaussian:
        scaled = np.abs(block.y) / math.sqrt(noise.variance_w)
        total = float((scaled**p).sum())
        return total / n if m == 1 else total
    total = float((np.abs(block.y) ** p).sum())
    return total / n if m == 1 else total


def jced_statistic(block: SampleBlock, weights: JcedWeights) -> float:
    """Weighted energy plus real first-lag correlation, in raw power units."""
    y = block.y
    z1 = float((np.abs(y) ** 2).sum())
    z2 = complex((y[:, 1:] * np.conj(y[:, :-1])).sum())
    return weights.alpha * z1 + weights.beta * z2.real


# ---------------------------------------------------------------------------
# Moments
# ---------------------------------------------------------------------------


def _gaussian_abs_moment_scale(p: float, real_samples: bool) -> float:
    """E|x|^p for unit-power x: complex envelope or real Gaussian sample."""
    if real_samples:
        return 2.0 ** (p / 2.0) * math.gamma((p + 1.0) / 2.0) / math.sqrt(math.pi)
    return math.gamma(p / 2.0 + 1.0)


def jced_moments(stats: SignalStats, noise: NoiseModel) -> JcedComponentMoments:
    """Moments of (Z1, Re Z2) summed over antennas.

    With realized per-antenna gains these are the conditional moments; with
    averaged gains they become the channel-statistics forms used when no
    per-trial channel knowledge is assumed.  Gamma-mixture noise inflates the
    noise-noise part of Var(Z1) by (1 + 2/q) and leaves the correlation
    moments unchanged.
    """
    n = stats.n_samples
    sw2 = stats.noise_var_w
    r1 = stats.r_ss1.real
    c_q = 1.0 if noise.is_gaussian else 1.0 + 2.0 / noise.q

    def per_hypothesis(gains: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g_sum = float(gains.sum())
        m_ant = gains.size
        snr_e = g_sum * stats.e_s / sw2
        mean = np.array([(m_ant * n + snr_e) * sw2, g_sum * r1])
        var_z1 = (m_ant * n * c_q + 2.0 * snr_e) * sw2**2
        var_z2 = 2.0 * stats.e_s * g_sum * sw2 + m_ant * (n - 1) * sw2**2 / 2.0
        cov = 2.0 * sw2 * g_sum * r1
        return mean, np.array([[var_z1, cov], [cov, var_z2]])

    mean0, cov0 = per_hypothesis(stats.gains_h0)
    mean1, cov1 = per_hypothesis(stats.gains_h1)
    return JcedComponentMoments(mean_h0=mean0, mean_h1=mean1, cov_h0=cov0, cov_h1=cov1)


def _ied_moments_gaussian(
    stats: SignalStats, p: float, real_samples: bool
) -> HypothesisMoments:
    n = stats.n_samples
    c1 = _gaussian_abs_moment_scale(p, real_samples)
    c2 = _gaussian_abs_moment_scale(2.0 * p, real_samples)

    def per_sample(snr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        scale = 1.0 + snr
        return c1 * scale ** (p / 2.0), c2 * scale**p

    m1_h0, m2_h0 = per_sample(stats.snr_power_h0)
    m1_h1, m2_h1 = per_sample(stats.snr_power_h1)

    if stats.m_antennas == 1:
        mean0, var0 = float(m1_h0[0]), float(m2_h0[0] - m1_h0[0] ** 2) / n
        mean1, var1 = float(m1_h1[0]), float(m2_h1[0] - m1_h1[0] ** 2) / n
        return HypothesisMoments(
            form="gamma",
            mean_h0=mean0,
            mean_h1=mean1,
            var_h0=var0,
            var_h1=var1,
            gamma_h0=GammaDistParams(shape=mean0**2 / var0, scale=var0 / mean0),
            gamma_h1=GammaDistParams(shape=mean1**2 / var1, scale=var1 / mean1),
        )
    mean0 = n * float(m1_h0.sum())
    mean1 = n * float(m1_h1.sum())
    var0 = n * float((m2_h0 - m1_h0**2).sum())
    var1 = n * float((m2_h1 - m1_h1**2).sum())
    return HypothesisMoments("gaussian", mean0, mean1, var0, var1)


def _ied_moments_mixture(stats: SignalStats, p: float, noise: NoiseModel) -> HypothesisMoments:
    n = stats.n_samples
    sw2 = stats.noise_var_w

    def per_sample(gains: np.ndarray) -> tuple[float, float]:
        m1 = m2 = 0.0
        for g in gains:
            s_pow = float(g) * stats.p_s_w
            m1 += mcleish_abs_moment(p, noise.q, s_pow, sw2)
            m2 += mcleish_abs_moment(2.0 * p, noise.q, s_pow, sw2)
        return m1, m2

    # Sums over antennas; for M = 1 these are the single-sample moments.
    s1_h0, s2_h0 = per_sample(stats.gains_h0)
    s1_h1, s2_h1 = per_sample(stats.gains_h1)
    if stats.m_antennas == 1:
        return HypothesisMoments(
            "gaussian",
            mean_h0=s1_h0,
            mean_h1=s1_h1,
            var_h0=(s2_h0 - s1_h0**2) / n,
            var_h1=(s2_h1 - s1_h1**2) / n,
        )

    def var_sum(gains: np.ndarray) -> float:
        total = 0.0
        for g in gains:
            s_pow = float(g) * stats.p_s_w
            m1 = mcleish_abs_moment(p, noise.q, s_pow, sw2)
            m2 = mcleish_abs_moment(2.0 * p, noise.q, s_pow, sw2)
            total += m2 - m1**2
        return total

    return HypothesisMoments(
        "gaussian",
        mean_h0=n * s1_h0,
        mean_h1=n * s1_h1,
        var_h0=n * var_sum(stats.gains_h0),
        var_h1=n * var_sum(stats.gains_h1),
    )


def ied_moments(
    stats: SignalStats, p: float, noise: NoiseModel, real_samples: bool = False
) -> HypothesisMoments:
    """Moments of the p-norm statistic under both hypotheses.

    Under Gaussian noise with a single antenna the statistic is also given a
    two-moment Gamma fit used for thresholding.  ``real_samples`` selects the
    per-sample absolute-moment constants of a real Gaussian observation
    instead of the complex envelope (the fitted shape at p = 2 is then N/2
    rather than N); the complex-envelope default matches the simulated model.
    """
    if p <= 0.0:
        raise ValueError(f"p must be positive, got {p}")
    if noise.is_gaussian:
        return _ied_moments_gaussian(stats, p, real_samples)
    return _ied_moments_mixture(stats, p, noise)


def ted_moments(
    stats: SignalStats, noise: NoiseModel, real_samples: bool = False
) -> HypothesisMoments:
    """Moments of the energy statistic under both hypotheses."""
    if stats.m_antennas == 1:
        if noise.is_gaussian:
            return ied_moments(stats, 2.0, noise, real_samples)
        moments = ied_moments(stats, 2.0, noise)
        return moments
    if noise.is_gaussian:
        n = stats.n_samples
        p_h0 = stats.gains_h0 * stats.p_s_w + stats.noise_var_w
        p_h1 = stats.gains_h1 * stats.p_s_w + stats.noise_var_w
        return HypothesisMoments(
            "gaussian",
            mean_h0=n * float(p_h0.sum()),
            mean_h1=n * float(p_h1.sum()),
            var_h0=n * float((p_h0**2).sum()),
            var_h1=n * float((p_h1**2).sum()),
        )
    return ied_moments(stats, 2.0, noise)


# ---------------------------------------------------------------------------
# Thresholds and detection probability
# ---------------------------------------------------------------------------


def threshold(moments: HypothesisMoments, target_pf: float) -> float:
    """Decision threshold achieving the target false-alarm probability."""
    if not (0.0 < target_pf < 1.0):
        raise ValueError(f"target_pf must lie in (0, 1), got {target_pf}")
    if moments.form == "gamma":
        return gamma_cdf_inverse(1.0 - target_pf, moments.gamma_h0)
    return q_inverse(target_pf) * math.sqrt(moments.var_h0) + moments.mean_h0


def analytic_pd(moments: HypothesisMoments, target_pf: float) -> float:
    """Closed-form detection probability at the target false-alarm rate."""
    tau = threshold(moments, target_pf)
    if moments.form == "gamma":
        return 1.0 - gamma_cdf(tau, moments.gamma_h1)
    return q_function((tau - moments.mean_h1) / math.sqrt(moments.var_h1))


# ---------------------------------------------------------------------------
# Orchestration helpers
# ---------------------------------------------------------------------------


def detector_statistic(cfg: DetectorConfig, block: SampleBlock, noise: NoiseModel) -> float:
    """Statistic for the configured detector; parameters must be resolved."""
    if cfg.kind == "ted":
        return ted_statistic(block, noise)
    if cfg.kind == "ied":
        if cfg.p is None:
            raise ValueError("IED statistic requires a resolved exponent p")
        return ied_statistic(block, cfg.p, noise)
    if cfg.weights is None:
        raise ValueError("JCED statistic requires resolved weights")
    return jced_statistic(block, cfg.weights)


def detector_moments(
    cfg: DetectorConfig, stats: SignalStats, noise: NoiseModel
) -> HypothesisMoments:
    """Hypothesis moments for the configured detector."""
    if cfg.kind == "ted":
        return ted_moments(stats, noise)
    if cfg.kind == "ied":
        if cfg.p is None:
            raise ValueError("IED moments require a resolved exponent p")
        return ied_moments(stats, cfg.p, noise)
    if cfg.weights is None:
        raise ValueError("JCED moments require resolved weights")
    return jced_moments(stats, noise).combined(cfg.weights)


def resolve_parameters(
    cfg: DetectorConfig, stats: SignalStats, noise: NoiseModel, target_pf: float
) -> DetectorConfig:
    """Fill free detector parameters by maximizing analytic P_D on ``stats``."""
    if cfg.kind == "ied" and cfg.p is None:
        return replace(cfg, p=optimize_p(stats, noise, target_pf))
    if cfg.kind == "jced" and cfg.weights is None:
        weights = optimize_weights(jced_moments(stats, noise), target_pf)
        return replace(cfg, weights=weights)
    return cfg


# ---------------------------------------------------------------------------
# Optimizers
# ---------------------------------------------------------------------------

# tie window for the grid searches: absorbs ulp-level rounding jitter so the
# documented tie-break holds on flat objectives, yet sits orders of magnitude
# below any genuine P_D gap between adjacent grid points
_TIE_TOL = 1e-12


def optimize_p(
    stats: SignalStats,
    noise: NoiseModel,
    target_pf: float,
    grid: np.ndarray = P_GRID,
) -> float:
    """Exponent maximizing analytic P_D over an even line-search grid.

    Ties resolve toward the smallest exponent, so a flat objective returns
    the grid origin deterministically.
    """
    pd = np.array(
        [analytic_pd(ied_moments(stats, float(p), noise), target_pf) for p in grid]
    )
    tied = np.flatnonzero(pd >= pd.max() - _TIE_TOL)
    return float(grid[tied[0]])


def optimize_weights(
    components: JcedComponentMoments,
    target_pf: float,
    alphas: np.ndarray = ALPHA_GRID,
) -> JcedWeights:
    """Combining weights maximizing analytic P_D over a milli-step grid.

    Ties resolve toward balanced weights (alpha closest to 0.5, then the
    smaller alpha), so a flat objective returns alpha = beta = 0.5.
    """
    w = np.stack([alphas, 1.0 - alphas], axis=1)  # (K, 2)
    var0 = np.einsum("ki,ij,kj->k", w, components.cov_h0, w)
    var1 = np.einsum("ki,ij,kj->k", w, components.cov_h1, w)
    shift = w @ components.g
    arg = (np.sqrt(var0) * q_inverse(target_pf) + shift) / np.sqrt(var1)
    pd = q_function(arg)
    cand = alphas[pd >= pd.max() - _TIE_TOL]
    order = np.lexsort((cand, np.abs(cand - 0.5)))
    return JcedWeights.from_alpha(float(cand[order[0]]))
