"""Special functions and numerical kernels used by the detector closed forms.

Standard functions (Gaussian tail, Gamma CDF, modified Bessel) are thin,
validated wrappers over scipy.special so that every caller in the package
goes through a single audited surface.  The absolute-moment routine for
noise drawn from a Gamma mixture of Gaussians is implemented here directly:
even integer orders reduce to a binomial sum, every other order is computed
by adaptive quadrature against the mixing density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

__all__ = [
    "GammaDistParams",
    "QuadratureSpec",
    "QuadratureError",
    "DEFAULT_QUADRATURE",
    "q_function",
    "q_inverse",
    "gamma_cdf",
    "gamma_cdf_inverse",
    "bessel_k",
    "mcleish_abs_moment",
]


@dataclass(frozen=True)
class GammaDistParams:
    """Shape/scale parameterization of a Gamma distribution."""

    shape: float
    scale: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.shape) and self.shape > 0.0):
            raise ValueError(f"Gamma shape must be positive and finite, got {self.shape}")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ValueError(f"Gamma scale must be positive and finite, got {self.scale}")

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def var(self) -> float:
        return self.shape * self.scale**2


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive quadrature backing non-even moment orders."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-9
    max_subdivisions: int = 200
    # Integrand support is truncated where the Gamma-weighted tail falls
    # below this fraction of the total mass.
    tail_mass: float = 1e-16


DEFAULT_QUADRATURE = QuadratureSpec()


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to meet the requested tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual estimate {residual:.3e})")
        self.residual = residual


def _require_finite(name: str, value) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {value}")
    return arr


def q_function(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x).

    Evaluated through the complementary normal CDF so extreme arguments
    (|x| ~ 40) retain full relative accuracy.
    """
    arr = _require_finite("x", x)
    out = special.ndtr(-arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def q_inverse(p):
    """Inverse of ``q_function`` on (0, 1)."""
    arr = _require_finite("p", p)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p}")
    out = -special.ndtri(arr)
    return float(out) if np.isscalar(p) or arr.ndim == 0 else out


def gamma_cdf(x, params: GammaDistParams):
    """CDF of a Gamma(shape, scale) variate at x >= 0."""
    arr = _require_finite("x", x)
    if np.any(arr < 0.0):
        raise ValueError(f"x must be nonnegative, got {x}")
    out = special.gammainc(params.shape, arr / params.scale)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def gamma_cdf_inverse(p, params: GammaDistParams):
    """Quantile of a Gamma(shape, scale) variate for p in [0, 1)."""
    arr = _require_finite("p", p)
    if np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise ValueError(f"p must lie in [0, 1), got {p}")
    out = params.scale * special.gammaincinv(params.shape, arr)
    return float(out) if np.isscalar(p) or arr.ndim == 0 else out


def bessel_k(order: float, x):
    """Modified Bessel function of the second kind K_order(x), x > 0."""
    _require_finite("order", order)
    arr = _require_finite("x", x)
    if np.any(arr <= 0.0):
        raise ValueError(f"x must be positive, got {x}")
    out = special.kv(order, arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def _mcleish_even_moment(half_p: int, q: float, signal_power: float, noise_var: float) -> float:
    # E|v|^p for even p: Gamma(1 + p/2)/Gamma(q) * sum_k C(p/2, k) S^(p/2-k)
    # sigma^(2k) Gamma(k + q) q^(-k).  Gamma ratios go through gammaln so very
    # large q (Gaussian limit) cannot overflow.
    total = 0.0
    for k in range(half_p + 1):
        log_ratio = special.gammaln(k + q) - special.gammaln(q) - k * math.log(q)
        total += (
            math.comb(half_p, k)
            * signal_power ** (half_p - k)
            * noise_var**k
            * math.exp(log_ratio)
        )
    return math.gamma(half_p + 1) * total


def _mcleish_quadrature_moment(
    p: float, q: float, signal_power: float, noise_var: float, spec: QuadratureSpec
) -> float:
    # Gamma-mixture reduction: v = sqrt(G) c with G ~ Gamma(q, rate q) and c
    # conditionally Gaussian, so E|v|^p = Gamma(p/2 + 1) E_G[(S + G sigma^2)^(p/2)].
    half_p = 0.5 * p
    log_norm = q * math.log(q) - special.gammaln(q)

    def integrand(g: float) -> float:
        if g <= 0.0:
            return 0.0
        return (signal_power + g * noise_var) ** half_p * math.exp(
            log_norm + (q - 1.0) * math.log(g) - q * g
        )

    # The polynomial factor behaves like g^(p/2) in the upper tail, so the
    # weighted tail follows a Gamma(q + p/2, rate q) profile; truncate there.
    upper = special.gammainccinv(q + max(half_p, 0.0), spec.tail_mass) / q
    upper = max(upper * 1.25, 2.0 / q, 2.0)
    mode = (q - 1.0) / q if q > 1.0 else None
    points = [mode] if mode is not None and 0.0 < mode < upper else None

    result = integrate.quad(
        integrand,
        0.0,
        upper,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        points=points,
        full_output=1,
    )
    value, abserr = result[0], result[1]
    # quad may warn (roundoff near machine precision) yet still deliver far
    # more accuracy than the thresholds need; gate on the achieved residual.
    if abserr > max(spec.abs_tol, 1e-6 * abs(value)):
        raise QuadratureError("moment quadrature did not converge", abserr)
    return math.gamma(half_p + 1.0) * value


def mcleish_abs_moment(
    p: float,
    q: float,
    signal_power: float,
    noise_var: float,
    spec: QuadratureSpec | None = None,
    method: str = "auto",
) -> float:
    """E|v|^p for v = c_s + w with c_s ~ CN(0, signal_power) and w Gamma-mixture noise.

    The noise is w = sqrt(G) c_w with G ~ Gamma(shape q, rate q) and
    c_w ~ CN(0, noise_var); q -> infinity recovers Gaussian noise and q = 1
    is Laplacian.  Conditioned on G the sum is CN(0, signal_power + G*noise_var),
    whose p-th absolute moment is Gamma(p/2 + 1) (S + G sigma^2)^(p/2).

    Args:
        p: moment order, p > 0.
        q: mixture shape, q > 0.
        signal_power: S >= 0 (0 recovers the noise-only moment).
        noise_var: sigma_w^2 > 0.
        spec: quadrature tolerances for non-even orders.
        method: "auto" (even p via binomial sum, else quadrature),
            "closed-form" (even p only) or "quadrature".

    Returns:
        The moment in linear power units.
    """
    for name, value in (("p", p), ("q", q), ("signal_power", signal_power), ("noise_var", noise_var)):
        if not (isinstance(value, (int, float)) and math.isfinite(value)):
            raise ValueError(f"{name} must be a finite scalar, got {value!r}")
    if p <= 0.0:
        raise ValueError(f"p must be positive, got {p}")
    if q <= 0.0:
        raise ValueError(f"q must be positive, got {q}")
    if signal_power < 0.0:
        raise ValueError(f"signal_power must be nonnegative, got {signal_power}")
    if noise_var <= 0.0:
        raise ValueError(f"noise_var must be positive, got {noise_var}")

    is_even = p == round(p) and int(round(p)) % 2 == 0
    if method not in ("auto", "closed-form", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if method == "closed-form" and not is_even:
        raise ValueError("closed-form path requires an even integer order")

    if is_even and method != "quadrature":
        return _mcleish_even_moment(int(round(p)) // 2, q, signal_power, noise_var)
    return _mcleish_quadrature_moment(p, q, signal_power, noise_var, spec or DEFAULT_QUADRATURE)
