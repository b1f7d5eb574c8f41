"""Radio-link budgets, fading draws, and noise-sample generation.

All random draws take an explicit numpy Generator.  ``substream`` derives
independent generators from a (seed, key...) tuple so that simulations are
bit-reproducible no matter how trials are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "db_to_linear",
    "linear_to_db",
    "dbm_to_watts",
    "watts_to_dbm",
    "free_space_pathloss",
    "GeometryConfig",
    "LinkBudget",
    "NoiseModel",
    "build_link_budget",
    "substream",
    "draw_rayleigh",
    "draw_rician",
    "draw_fading",
    "draw_noise",
]

NOISE_FAMILIES = ("cscg", "mcleish")
FADING_FAMILIES = ("rayleigh", "rician")


def db_to_linear(db: float) -> float:
    """Convert a dB ratio to linear scale."""
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    """Convert a positive linear ratio to dB."""
    if x <= 0.0:
        raise ValueError(f"linear ratio must be positive, got {x}")
    return 10.0 * math.log10(x)


def dbm_to_watts(dbm: float) -> float:
    """Convert a power in dBm to watts."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    """Convert a positive power in watts to dBm."""
    if watts <= 0.0:
        raise ValueError(f"power must be positive, got {watts}")
    return 10.0 * math.log10(watts) + 30.0


def free_space_pathloss(distance_km: float, freq_mhz: float) -> float:
    """Free-space pathloss in dB: 32.45 + 20 log10(d_km) + 20 log10(f_MHz)."""
    if not (math.isfinite(distance_km) and distance_km > 0.0):
        raise ValueError(f"distance_km must be positive, got {distance_km}")
    if not (math.isfinite(freq_mhz) and freq_mhz > 0.0):
        raise ValueError(f"freq_mhz must be positive, got {freq_mhz}")
    return 32.45 + 20.0 * math.log10(distance_km) + 20.0 * math.log10(freq_mhz)


@dataclass(frozen=True)
class GeometryConfig:
    """Deployment geometry and RF front-end parameters of the reader setup."""

    d_sr_km: float = 0.004  # source -> reader
    d_st_km: float = 0.006  # source -> tag
    d_tr_km: float = 0.0005  # tag -> reader
    freq_mhz: float = 915.0
    bandwidth_hz: float = 10e6
    noise_density_dbm_hz: float = -174.0
    gain_source_db: float = 6.0
    gain_reader_db: float = 3.0
    gain_tag_db: float = 2.0

    def __post_init__(self) -> None:
        for name in ("d_sr_km", "d_st_km", "d_tr_km", "freq_mhz", "bandwidth_hz"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class LinkBudget:
    """Average power gains of the three links plus the thermal noise power."""

    sigma_sr_sq: float
    sigma_st_sq: float
    sigma_tr_sq: float
    noise_var_w: float

    def __post_init__(self) -> None:
        for name in ("sigma_sr_sq", "sigma_st_sq", "sigma_tr_sq", "noise_var_w"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class NoiseModel:
    """Receiver noise family: circularly-symmetric Gaussian or Gamma-mixture.

    family "cscg" is complex Gaussian noise with the given variance.  family
    "mcleish" multiplies each complex Gaussian sample by the square root of an
    independent Gamma(q, rate q) factor; q = 1 gives Laplacian noise and
    q -> infinity recovers the Gaussian case.  E|w|^2 = variance_w either way.
    """

    family: str = "cscg"
    variance_w: float = 1.0
    q: float = 1.0

    def __post_init__(self) -> None:
        if self.family not in NOISE_FAMILIES:
            raise ValueError(f"family must be one of {NOISE_FAMILIES}, got {self.family!r}")
        if not (math.isfinite(self.variance_w) and self.variance_w > 0.0):
            raise ValueError(f"variance_w must be positive, got {self.variance_w}")
        if not (math.isfinite(self.q) and self.q > 0.0):
            raise ValueError(f"q must be positive, got {self.q}")

    @property
    def is_gaussian(self) -> bool:
        return self.family == "cscg"


def build_link_budget(geom: GeometryConfig) -> LinkBudget:
    """Average link gains from antenna gains minus free-space pathloss.

    Each link variance is the product of the two end antenna gains divided by
    the linear pathloss; the noise power is the density integrated over the
    bandwidth.
    """
    loss_sr = free_space_pathloss(geom.d_sr_km, geom.freq_mhz)
    loss_st = free_space_pathloss(geom.d_st_km, geom.freq_mhz)
    loss_tr = free_space_pathloss(geom.d_tr_km, geom.freq_mhz)
    sigma_sr_sq = db_to_linear(geom.gain_source_db + geom.gain_reader_db - loss_sr)
    sigma_st_sq = db_to_linear(geom.gain_source_db + geom.gain_tag_db - loss_st)
    sigma_tr_sq = db_to_linear(geom.gain_tag_db + geom.gain_reader_db - loss_tr)
    noise_dbm = geom.noise_density_dbm_hz + 10.0 * math.log10(geom.bandwidth_hz)
    return LinkBudget(sigma_sr_sq, sigma_st_sq, sigma_tr_sq, dbm_to_watts(noise_dbm))


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the (seed, key...) stream; independent across keys."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))


def _cscg(rng: np.random.Generator, variance: float, size) -> np.ndarray:
    scale = math.sqrt(variance / 2.0)
    shape = () if size is None else size
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_rayleigh(variance: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Zero-mean circularly-symmetric complex Gaussian with E|h|^2 = variance."""
    if variance < 0.0 or not math.isfinite(variance):
        raise ValueError(f"variance must be nonnegative, got {variance}")
    return _cscg(rng, variance, size)


def draw_rician(k_factor: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Unit-power Rician coefficient with line-of-sight component 1.

    h = sqrt(k/(k+1)) + sqrt(1/(k+1)) CN(0,1); E|h|^2 = 1 for any k >= 0.
    """
    if k_factor < 0.0 or not math.isfinite(k_factor):
        raise ValueError(f"k_factor must be nonnegative, got {k_factor}")
    los = math.sqrt(k_factor / (k_factor + 1.0))
    scatter = _cscg(rng, 1.0 / (k_factor + 1.0), size)
    return los + scatter


def draw_fading(
    family: str,
    variance: float,
    rng: np.random.Generator,
    size=None,
    k_factor: float = 3.0,
) -> np.ndarray:
    """Fading coefficient(s) with average power ``variance``."""
    if family == "rayleigh":
        return draw_rayleigh(variance, rng, size)
    if family == "rician":
        if variance < 0.0 or not math.isfinite(variance):
            raise ValueError(f"variance must be nonnegative, got {variance}")
        return math.sqrt(variance) * draw_rician(k_factor, rng, size)
    raise ValueError(f"family must be one of {FADING_FAMILIES}, got {family!r}")


def draw_noise(model: NoiseModel, rng: np.random.Generator, size=None) -> np.ndarray:
    """Noise samples for the given model.

    For the Gamma-mixture family the mixing factors are drawn first, then the
    Gaussian samples, so stream consumption is deterministic.
    """
    if model.is_gaussian:
        return _cscg(rng, model.variance_w, size)
    shape = () if size is None else size
    g = rng.gamma(shape=model.q, scale=1.0 / model.q, size=shape)
    return np.sqrt(g) * _cscg(rng, model.variance_w, size)
