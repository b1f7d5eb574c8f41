"""System model: scenario parameters, channel realizations, sample blocks.

The reader observes y_m(n) = h_b,m s(n) + w_m(n) on M antennas over N
samples, where the composite channel under the two hypotheses is

    b = 0:  h_0,m = h_sr,m              (direct path only), or the residual
            h_0,m = h_ri,m ~ CN(0, eps * sigma_sr^2) when direct-interference
            cancellation is active;
    b = 1:  h_1,m = h_0,m + xi * h_st * h_tr,m   (backscatter path added).

The residual-interference strength eps is relative to the direct-link power
so eps = 0 means perfect cancellation and eps = 1 no cancellation benefit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import FADING_FAMILIES, LinkBudget, NoiseModel, draw_fading, draw_noise

__all__ = [
    "SIGNAL_MODELS",
    "ScenarioParams",
    "ChannelRealization",
    "SampleBlock",
    "SignalStats",
    "generate_realization",
    "generate_block",
    "signal_stats",
    "average_signal_stats",
    "hypothesis_variances",
]

SIGNAL_MODELS = ("constant_unit", "iid_cscg")


@dataclass(frozen=True)
class ScenarioParams:
    """Full parameterization of one simulated operating point."""

    p_s_w: float
    budget: LinkBudget
    noise: NoiseModel
    n_samples: int = 512
    m_antennas: int = 1
    xi: float = 1.0
    epsilon: float = 0.0
    dic: bool = False
    signal_model: str = "constant_unit"
    fading: str = "rayleigh"
    rician_k: float = 3.0
    prior_h0: float = 0.5
    prior_h1: float = 0.5

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p_s_w) and self.p_s_w > 0.0):
            raise ValueError(f"p_s_w must be positive, got {self.p_s_w}")
        if self.n_samples < 2:
            raise ValueError(f"n_samples must be at least 2, got {self.n_samples}")
        if self.m_antennas < 1:
            raise ValueError(f"m_antennas must be at least 1, got {self.m_antennas}")
        if not (math.isfinite(self.xi) and 0.0 < self.xi <= 1.0):
            raise ValueError(f"xi must lie in (0, 1], got {self.xi}")
        if not (math.isfinite(self.epsilon) and 0.0 <= self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.signal_model not in SIGNAL_MODELS:
            raise ValueError(f"signal_model must be one of {SIGNAL_MODELS}, got {self.signal_model!r}")
        if self.fading not in FADING_FAMILIES:
            raise ValueError(f"fading must be one of {FADING_FAMILIES}, got {self.fading!r}")
        if not (math.isfinite(self.rician_k) and self.rician_k >= 0.0):
            raise ValueError(f"rician_k must be nonnegative, got {self.rician_k}")
        if not (self.prior_h0 >= 0.0 and self.prior_h1 >= 0.0):
            raise ValueError("priors must be nonnegative")
        if abs(self.prior_h0 + self.prior_h1 - 1.0) > 1e-9:
            raise ValueError(
                f"priors must sum to 1, got {self.prior_h0} + {self.prior_h1}"
            )

    def with_power(self, p_s_w: float) -> "ScenarioParams":
        return replace(self, p_s_w=p_s_w)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of all links and the composite per-hypothesis channels."""

    h_sr: np.ndarray  # (M,) source -> reader
    h_tr: np.ndarray  # (M,) tag -> reader
    h_st: complex  # source -> tag
    h_ri: np.ndarray | None  # (M,) residual interference, present when DIC is on
    h0: np.ndarray  # (M,) composite channel under b = 0
    h1: np.ndarray  # (M,) composite channel under b = 1


@dataclass(frozen=True)
class SampleBlock:
    """Observed samples for one transmitted bit."""

    y: np.ndarray  # (M, N) complex observations
    s: np.ndarray  # (N,) source samples
    noise: np.ndarray  # (M, N) noise samples
    bit: int  # true hypothesis, 0 or 1


@dataclass(frozen=True)
class SignalStats:
    """Signal and channel statistics the detector closed forms consume.

    gains_h0/gains_h1 hold per-antenna |h_b,m|^2 for a realized channel, or the
    channel variances replicated across antennas when ``averaged`` is set.  The
    two SNR families differ in their power bookkeeping: ``snr_energy_*`` scales
    by the block energy E_s, ``snr_power_*`` by the per-sample power P_s.
    """

    n_samples: int
    m_antennas: int
    p_s_w: float
    noise_var_w: float
    e_s: float
    r_ss1: complex
    gains_h0: np.ndarray  # (M,)
    gains_h1: np.ndarray  # (M,)
    averaged: bool = False

    @property
    def snr_energy_h0(self) -> np.ndarray:
        return self.gains_h0 * self.e_s / self.noise_var_w

    @property
    def snr_energy_h1(self) -> np.ndarray:
        return self.gains_h1 * self.e_s / self.noise_var_w

    @property
    def snr_power_h0(self) -> np.ndarray:
        return self.gains_h0 * self.p_s_w / self.noise_var_w

    @property
    def snr_power_h1(self) -> np.ndarray:
        return self.gains_h1 * self.p_s_w / self.noise_var_w


def generate_realization(
    params: ScenarioParams, budget: LinkBudget, rng: np.random.Generator
) -> ChannelRealization:
    """Draw all links from the configured fading family at budgeted variances.

    Draw order is fixed (h_sr, h_st, h_tr, then the DIC residual) so equal
    seeds give equal channels regardless of scenario toggles evaluated later.
    """
    m = params.m_antennas
    kwargs = {"k_factor": params.rician_k}
    h_sr = np.atleast_1d(draw_fading(params.fading, budget.sigma_sr_sq, rng, (m,), **kwargs))
    h_st = complex(draw_fading(params.fading, budget.sigma_st_sq, rng, None, **kwargs))
    h_tr = np.atleast_1d(draw_fading(params.fading, budget.sigma_tr_sq, rng, (m,), **kwargs))
    dyadic = params.xi * h_st * h_tr
    if params.dic:
        # Residual after cancelling the direct path: Rayleigh regardless of
        # the link fading family, variance relative to the direct link.
        h_ri = draw_fading("rayleigh", params.epsilon * budget.sigma_sr_sq, rng, (m,))
        h0 = h_ri
    else:
        h_ri = None
        h0 = h_sr
    return ChannelRealization(h_sr=h_sr, h_tr=h_tr, h_st=h_st, h_ri=h_ri, h0=h0, h1=h0 + dyadic)


def _draw_source_samples(params: ScenarioParams, rng: np.random.Generator) -> np.ndarray:
    n = params.n_samples
    if params.signal_model == "constant_unit":
        return np.full(n, math.sqrt(params.p_s_w), dtype=complex)
    scale = math.sqrt(params.p_s_w / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def generate_block(
    realization: ChannelRealization,
    bit: int,
    params: ScenarioParams,
    rng: np.random.Generator,
) -> SampleBlock:
    """Observations y = h_bit s + w for one transmitted bit."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    s = _draw_source_samples(params, rng)
    h = realization.h1 if bit else realization.h0
    noise = draw_noise(params.noise, rng, (params.m_antennas, params.n_samples))
    y = h[:, None] * s[None, :] + noise
    return SampleBlock(y=y, s=s, noise=noise, bit=bit)


def signal_stats(
    params: ScenarioParams,
    realization: ChannelRealization,
    block: SampleBlock | None = None,
) -> SignalStats:
    """Statistics conditioned on a realized channel.

    Without a block, E_s and the first-lag autocorrelation R_ss1 take their
    model values (N P_s and (N-1) P_s for the constant-envelope source, zero
    R_ss1 for the i.i.d. Gaussian source).  With a block they are computed
    from the transmitted samples.
    """
    n = params.n_samples
    if block is not None:
        s = block.s
        e_s = float(np.sum(np.abs(s) ** 2))
        r_ss1 = complex(np.sum(s[1:] * np.conj(s[:-1])))
    elif params.signal_model == "constant_unit":
        e_s = n * params.p_s_w
        r_ss1 = complex((n - 1) * params.p_s_w)
    else:
        e_s = n * params.p_s_w
        r_ss1 = 0.0 + 0.0j
    return SignalStats(
        n_samples=n,
        m_antennas=params.m_antennas,
        p_s_w=params.p_s_w,
        noise_var_w=params.noise.variance_w,
        e_s=e_s,
        r_ss1=r_ss1,
        gains_h0=np.abs(realization.h0) ** 2,
        gains_h1=np.abs(realization.h1) ** 2,
    )


def hypothesis_variances(params: ScenarioParams, budget: LinkBudget) -> tuple[float, float]:
    """Average composite-channel powers (sigma_0^2, sigma_1^2) per antenna."""
    sigma0 = params.epsilon * budget.sigma_sr_sq if params.dic else budget.sigma_sr_sq
    sigma1 = sigma0 + params.xi**2 * budget.sigma_st_sq * budget.sigma_tr_sq
    return sigma0, sigma1


def average_signal_stats(params: ScenarioParams, budget: LinkBudget) -> SignalStats:
    """Statistics with channel gains replaced by their average powers."""
    sigma0, sigma1 = hypothesis_variances(params, budget)
    n, m = params.n_samples, params.m_antennas
    if params.signal_model == "constant_unit":
        r_ss1 = complex((n - 1) * params.p_s_w)
    else:
        r_ss1 = 0.0 + 0.0j
    return SignalStats(
        n_samples=n,
        m_antennas=m,
        p_s_w=params.p_s_w,
        noise_var_w=params.noise.variance_w,
        e_s=n * params.p_s_w,
        r_ss1=r_ss1,
        gains_h0=np.full(m, sigma0),
        gains_h1=np.full(m, sigma1),
        averaged=True,
    )
