"""Real-valued expansion of the complex MIMO model and the triangular
factorisation used by the sphere decoders.

All detectors work on the stacked real representation

    y_bar = [Re y; Im y],   x_bar = [Re x; Im x],
    H_bar = [[Re H, -Im H],
             [Im H,  Re H]]

so that ``H_bar @ x_bar == real_expand_vector(H @ x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NotPositiveDefinite",
    "OpCounter",
    "RealModel",
    "real_expand_matrix",
    "real_expand_vector",
    "real_contract_vector",
    "cholesky_upper",
    "cholesky_ops",
    "precomputation_ops",
    "regulariser",
    "build_real_model",
]


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Raised when a Gram matrix has a non-positive pivot."""


class OpCounter:
    """Running count of real multiplications and divisions."""

    __slots__ = ("real_mult_div",)

    def __init__(self, start=0):
        self.real_mult_div = int(start)

    def add(self, n):
        if n < 0:
            raise ValueError("operation counts cannot decrease")
        self.real_mult_div += int(n)
        return self.real_mult_div

    def reset(self):
        self.real_mult_div = 0

    def __int__(self):
        return self.real_mult_div

    def __repr__(self):
        return f"OpCounter({self.real_mult_div})"


def real_expand_matrix(h):
    """Map a complex ``(nr, nt)`` matrix to its ``(2nr, 2nt)`` real form.

    Column ``l`` and column ``l + nt`` of the result are the real-valued
    channel vector seen by the real and imaginary part of antenna ``l``.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim < 2:
        raise ValueError("expected a matrix")
    re, im = h.real, h.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def real_expand_vector(v):
    """Stack all real parts, then all imaginary parts (last axis)."""
    v = np.asarray(v, dtype=complex)
    return np.concatenate([v.real, v.imag], axis=-1)


def real_contract_vector(v):
    """Inverse of :func:`real_expand_vector`."""
    v = np.asarray(v, dtype=float)
    n = v.shape[-1]
    if n % 2:
        raise ValueError("real-expanded vectors have even length")
    half = n // 2
    return v[..., :half] + 1j * v[..., half:]


def cholesky_upper(g):
    """Upper-triangular ``d`` with ``d.T @ d == g`` and positive diagonal.

    Accepts a single matrix or a stack of matrices.
    """
    g = np.asarray(g, dtype=float)
    try:
        low = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    d = np.swapaxes(low, -1, -2)
    # numpy does not reject NaN input
    if not np.all(np.isfinite(d)):
        raise NotPositiveDefinite("non-finite factor")
    # a pivot at rounding level means the matrix is singular in practice
    n = g.shape[-1]
    piv = np.diagonal(d, axis1=-2, axis2=-1) ** 2
    scale = np.max(np.diagonal(g, axis1=-2, axis2=-1), axis=-1, keepdims=True)
    if np.any(piv <= 2 * n * np.finfo(float).eps * scale):
        raise NotPositiveDefinite("numerically singular matrix")
    return d


def cholesky_ops(nt):
    """Cost of the factorisation, ``4 nt^3 / 3`` rounded up."""
    return math.ceil(4 * nt**3 / 3)


def precomputation_ops(nt, nr):
    """Factorisation plus Gram matrix, ``rho_bar`` and ``z_bar``."""
    return cholesky_ops(nt) + nt * (4 * nr * nt + 6 * nr + 6 * nt + 3)


def regulariser(nt, nr, sigma_n2):
    """Diagonal loading: the noise variance when under-determined, else 0."""
    return float(sigma_n2) if nt > nr else 0.0


@dataclass(frozen=True)
class RealModel:
    h_bar: np.ndarray
    y_bar: np.ndarray
    g_bar: np.ndarray
    d_bar: np.ndarray
    rho_bar: np.ndarray
    z_bar: np.ndarray
    phi: float

    @property
    def nt(self):
        return self.d_bar.shape[-1] // 2

    def metric(self, x_bar):
        """``||z_bar - d_bar x_bar||^2`` for one or many real vectors."""
        r = self.z_bar - np.asarray(x_bar) @ self.d_bar.T
        return np.sum(r * r, axis=-1)


def build_real_model(h, y, sigma_n2, nt=None, nr=None, phi=None):
    """Build the regularised triangular model for one received vector.

    ``z_bar`` is obtained by a forward solve with ``d_bar.T`` and ``rho_bar``
    by back-substitution, so ``z_bar == d_bar @ rho_bar``.  Works on stacked
    inputs of shape ``(..., nr, nt)`` / ``(..., nr)`` as well.
    """
    h = np.asarray(h, dtype=complex)
    y = np.asarray(y, dtype=complex)
    nr_h, nt_h = h.shape[-2:]
    nt = nt_h if nt is None else nt
    nr = nr_h if nr is None else nr
    if (nr, nt) != (nr_h, nt_h) or y.shape[-1] != nr:
        raise ValueError("shape mismatch between h, y and (nr, nt)")
    if sigma_n2 <= 0:
        raise ValueError("sigma_n2 must be positive")
    if phi is None:
        phi = regulariser(nt, nr, sigma_n2)

    h_bar = real_expand_matrix(h)
    y_bar = real_expand_vector(y)
    ht = np.swapaxes(h_bar, -1, -2)
    g_bar = ht @ h_bar + phi * np.eye(2 * nt)
    d_bar = cholesky_upper(g_bar)
    rhs = (ht @ y_bar[..., None])
    z_bar = np.linalg.solve(np.swapaxes(d_bar, -1, -2), rhs)
    rho_bar = np.linalg.solve(d_bar, z_bar)
    return RealModel(
        h_bar=h_bar,
        y_bar=y_bar,
        g_bar=g_bar,
        d_bar=d_bar,
        rho_bar=rho_bar[..., 0],
        z_bar=z_bar[..., 0],
        phi=phi,
    )
