"""Forecast-error distributions and the reserve offset of the balance row."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .domain import ChanceSpec, Distribution, QuantileDomain

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ErrorDistribution:
    kind: Distribution
    sigma: float = 1.0
    mu: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Distribution.parse(self.kind))
        if self.kind is Distribution.DETERMINISTIC:
            raise ValueError("an error distribution must be normal or laplace")
        if not self.sigma > 0:
            raise ValueError("standard deviation must be positive")

    @property
    def b(self) -> float:
        """Laplace scale, sigma / sqrt(2)."""
        return self.sigma / SQRT2


def cdf(dist: ErrorDistribution, x: float) -> float:
    z = x - dist.mu
    if dist.kind is Distribution.NORMAL:
        # erfc keeps precision in the lower tail
        return 0.5 * math.erfc(-z / (SQRT2 * dist.sigma))
    b = dist.b
    if z >= 0:
        return 1.0 - 0.5 * math.exp(-z / b)
    return 0.5 * math.exp(z / b)


def pdf(dist: ErrorDistribution, x: float) -> float:
    z = x - dist.mu
    if dist.kind is Distribution.NORMAL:
        s = dist.sigma
        return math.exp(-z * z / (2 * s * s)) / math.sqrt(2 * math.pi * s * s)
    b = dist.b
    return math.exp(-abs(z) / b) / (2 * b)


# Acklam's rational approximation of the standard normal inverse CDF
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2 * math.log(p))
        c = _C
        return ((((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
                / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1))
    if p > 1 - _P_LOW:
        return -_acklam(1 - p)
    q = p - 0.5
    r = q * q
    a, b = _A, _B
    return ((((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1))


def standard_normal_quantile(p: float) -> float:
    """Inverse standard normal CDF: rational start plus one Halley step."""
    x = _acklam(p)
    e = 0.5 * math.erfc(-x / SQRT2) - p
    u = e * math.sqrt(2 * math.pi) * math.exp(x * x / 2)
    return x - u / (1 + x * u / 2)


def quantile(dist: ErrorDistribution, alpha: float) -> float:
    if not (0.0 < alpha < 1.0):
        raise QuantileDomain(alpha)
    if dist.kind is Distribution.NORMAL:
        return dist.mu + dist.sigma * standard_normal_quantile(alpha)
    b = dist.b
    if alpha >= 0.5:
        return dist.mu - b * math.log(2 * (1 - alpha))
    return dist.mu + b * math.log(2 * alpha)


def combined_sigma(sigma_d: float, sigma_w: float, sigma_p: float) -> float:
    """Root-sum-of-squares of the demand, wind and PV forecast errors."""
    if min(sigma_d, sigma_w, sigma_p) < 0:
        raise ValueError("forecast errors must be non-negative")
    return math.sqrt(sigma_d ** 2 + sigma_w ** 2 + sigma_p ** 2)


def standard_quantile(chance: ChanceSpec) -> float:
    """phi^-1(alpha) for a unit-sigma, zero-mean error; 0 when deterministic."""
    if chance.is_deterministic:
        return 0.0
    return quantile(ErrorDistribution(chance.distribution, 1.0), chance.alpha)


def reserve_offset(chance: ChanceSpec, sigmas) -> float:
    """MW the balance row must clear beyond demand: q(alpha) * sigma_total."""
    if chance.is_deterministic:
        return 0.0
    total = combined_sigma(*sigmas)
    if total == 0.0:
        return 0.0
    return standard_quantile(chance) * total
