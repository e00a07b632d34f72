"""Closed-form error analysis for SM sphere decoding.

* incomplete gamma functions (series / continued fraction);
* probability that the transmitted point lies outside the initial sphere
  and the radius constant that makes it a given target;
* Rayleigh-averaged pairwise error probability and the union bound on the
  bit error ratio.

Noise convention as in :mod:`smsd.channel`: ``sigma_n2`` is the complex
noise variance per receive antenna, so ``||n||^2 / sigma_n2`` is
Gamma(nr, 1) distributed and the squared initial radius is
``alpha * nr * sigma_n2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .channel import snr_to_sigma2
from .modem import build_constellation, spectral_efficiency

__all__ = [
    "DomainError",
    "NoConvergence",
    "regularized_lower_gamma",
    "regularized_upper_gamma",
    "pr_outside_sphere",
    "solve_alpha",
    "zeta",
    "pairwise_error_probability",
    "BoundSpec",
    "sm_pair_table",
    "union_bound_ber",
]

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


class DomainError(ValueError):
    pass


class NoConvergence(RuntimeError):
    pass


def _check(a, x):
    if not (a > 0) or not (x >= 0) or math.isnan(x):
        raise DomainError(f"need a > 0 and x >= 0, got a={a}, x={x}")


def _gamma_series(a, x):
    # P(a, x) for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise NoConvergence("incomplete gamma series")


def _gamma_cf(a, x):
    # Q(a, x) for x >= a + 1, modified Lentz
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    raise NoConvergence("incomplete gamma continued fraction")


def regularized_lower_gamma(a, x):
    """``P(a, x) = gamma(a, x) / Gamma(a)``.

    Series below ``x = a + 1``, continued fraction above.
    """
    a, x = float(a), float(x)
    _check(a, x)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cf(a, x)


def regularized_upper_gamma(a, x):
    """``Q(a, x) = 1 - P(a, x)``, accurate in the far tail."""
    a, x = float(a), float(x)
    _check(a, x)
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cf(a, x)


def pr_outside_sphere(r2, sigma_n2, nr):
    """Probability that ``||n||^2`` exceeds the squared radius ``r2``."""
    if not (r2 > 0 and sigma_n2 > 0 and nr >= 1):
        raise DomainError("r2, sigma_n2 and nr must be positive")
    return regularized_upper_gamma(nr, r2 / sigma_n2)


def solve_alpha(nr, target_miss=1e-6):
    """Radius constant ``alpha`` with ``Pr(||n||^2 > alpha nr sigma_n2) = target``."""
    if nr < 1 or not 0.0 < target_miss < 1.0:
        raise DomainError("need nr >= 1 and 0 < target_miss < 1")
    goal = math.log(target_miss)

    def f(t):
        return math.log(regularized_upper_gamma(nr, t)) - goal

    hi = float(nr) + 1.0
    for _ in range(200):
        if f(hi) < 0:
            break
        hi *= 2.0
    else:
        raise NoConvergence("could not bracket the radius constant")
    t = brentq(f, 1e-12, hi, xtol=1e-12, rtol=1e-14)
    return t / nr


def zeta(c):
    c = np.asarray(c, dtype=float)
    if np.any(c < 0) or np.any(np.isnan(c)):
        raise DomainError("zeta needs c >= 0")
    with np.errstate(invalid="ignore"):
        r = np.where(np.isinf(c), 1.0, np.sqrt(c / (1.0 + c)))
    out = 0.5 * (1.0 - r)
    return float(out) if out.ndim == 0 else out


def pairwise_error_probability(sigma_s2, sigma_n2, nr):
    """Rayleigh-averaged probability of preferring a point at squared
    distance ``sigma_s2`` over the transmitted one, with ``nr`` receive
    antennas."""
    sigma_s2 = np.asarray(sigma_s2, dtype=float)
    if np.any(sigma_s2 < 0) or not sigma_n2 > 0 or nr < 1:
        raise DomainError("need sigma_s2 >= 0, sigma_n2 > 0, nr >= 1")
    z = np.asarray(zeta(sigma_s2 / (4.0 * sigma_n2)))
    acc = np.zeros_like(z)
    for r in range(nr):
        acc = acc + math.comb(nr - 1 + r, r) * (1.0 - z) ** r
    out = z**nr * acc
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BoundSpec:
    nt: int
    nr: int
    mod_order: int
    snr_db: tuple

    def __post_init__(self):
        spectral_efficiency("SM", self.nt, self.mod_order)
        if self.nr < 1:
            raise ValueError("nr must be positive")
        if len(self.snr_db) == 0:
            raise ValueError("empty SNR list")

    @property
    def m(self):
        return spectral_efficiency("SM", self.nt, self.mod_order)


def sm_pair_table(nt, constellation):
    """Squared distances and bit differences for all ordered SM pairs.

    Point ``k = l * M + s``; both arrays have shape ``(nt M, nt M)``.
    """
    mo = constellation.order
    pts = constellation.points
    ant = np.repeat(np.arange(nt), mo)
    sym = np.tile(np.arange(mo), nt)
    same = ant[:, None] == ant[None, :]
    e = np.abs(pts[sym]) ** 2
    d_same = np.abs(pts[sym][:, None] - pts[sym][None, :]) ** 2
    sigma_s2 = np.where(same, d_same, e[:, None] + e[None, :])
    labels = np.arange(nt * mo)
    nbits = np.bitwise_count(labels[:, None] ^ labels[None, :]).astype(float)
    return sigma_s2, nbits


def union_bound_ber(spec, constellation=None):
    """Union bound on SM bit error ratio at each SNR of ``spec``."""
    const = constellation or build_constellation(spec.mod_order)
    sigma_s2, nbits = sm_pair_table(spec.nt, const)
    m = spec.m
    size = spec.nt * const.order
    out = []
    for s2 in snr_to_sigma2(spec.snr_db):
        pep = pairwise_error_probability(sigma_s2, float(s2), spec.nr)
        out.append(float(np.sum(nbits * pep)) / (m * size))
    return np.array(out)
