"""Detectors for SM and SMX.

Exhaustive ML detection is vectorised with numpy; the three sphere
decoders run through the search kernels in :mod:`smsd.kernels`.  Every
detector has a batch form (leading trial axis, used by the sweep engine)
and a single-trial form returning a :class:`DetectionOutcome`.

Sphere decoders start from ``r2 = alpha * nr * sigma_n2``.  A pass that
completes no point quadruples ``r2`` (doubles the radius) and restarts;
``restarts`` counts those passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .analysis import solve_alpha
from .complexity import c_sm_ml, c_smx_ml
from .linalg import build_real_model, precomputation_ops, real_expand_matrix, real_expand_vector
from .modem import Constellation, TxVector, smx_codebook, spectral_efficiency

__all__ = [
    "EmptySphere",
    "SphereRadius",
    "DetectionOutcome",
    "BatchOutcome",
    "ThetaEnumeration",
    "initial_radius",
    "sm_ml",
    "smx_ml",
    "sm_rx",
    "sm_tx",
    "smx_sd",
    "enumerate_theta",
    "sm_ml_batch",
    "smx_ml_batch",
    "sm_rx_batch",
    "sm_tx_batch",
    "smx_sd_batch",
]


class EmptySphere(RuntimeError):
    """No candidate lies inside the sphere."""


@dataclass(frozen=True)
class SphereRadius:
    r2: float
    alpha: float

    def __post_init__(self):
        if not self.r2 > 0:
            raise ValueError("squared radius must be positive")


@lru_cache(maxsize=64)
def _alpha(nr):
    return solve_alpha(nr)


def initial_radius(nr, sigma_n2, alpha=None):
    """Squared initial radius ``alpha * nr * sigma_n2``."""
    if alpha is None:
        alpha = _alpha(int(nr))
    if nr <= 0 or sigma_n2 <= 0 or alpha <= 0:
        raise ValueError("nr, sigma_n2 and alpha must be positive")
    return SphereRadius(alpha * nr * sigma_n2, alpha)


def _r2_array(radius, nr, sigma_n2, batch):
    if radius is None:
        radius = initial_radius(nr, sigma_n2)
    r2 = radius.r2 if isinstance(radius, SphereRadius) else float(radius)
    return np.full(batch, r2, dtype=float)


@dataclass
class DetectionOutcome:
    estimate: TxVector
    ops: int
    candidates_inside: int = 0
    n19_evaluations: int = 0
    restarts: int = 0
    metric: float = math.nan
    ntilde: np.ndarray | None = None


@dataclass
class BatchOutcome:
    """Per-trial results of a batch detector.

    ``labels`` is the integer bit label of each estimate; ``antenna`` and
    ``symbol`` are filled for SM, ``symbols`` (one row per trial) for SMX.
    """

    labels: np.ndarray
    ops: np.ndarray
    antenna: np.ndarray | None = None
    symbol: np.ndarray | None = None
    symbols: np.ndarray | None = None
    card: np.ndarray | None = None
    n19: np.ndarray | None = None
    restarts: np.ndarray | None = None
    metric: np.ndarray | None = None
    ntilde: np.ndarray | None = None
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ThetaEnumeration:
    members: frozenset
    best: tuple
    best_metric: float
    n19_evaluations: int
    examined: int
    ops: int


def _sm_labels(ant, sym, order):
    return ant * order + sym


def _smx_labels(symbols, order):
    out = np.zeros(symbols.shape[0], dtype=np.int64)
    for col in range(symbols.shape[1]):
        out = out * order + symbols[:, col]
    return out


# --- exhaustive ML -------------------------------------------------------


def sm_ml_batch(y, h, constellation):
    """Exhaustive SM detection, first minimum wins (antenna-major order)."""
    y = np.asarray(y)
    h = np.asarray(h)
    b, nr, nt = h.shape
    pts = constellation.points
    mo = len(pts)
    # (b, nr, nt, M) residuals
    resid = y[:, :, None, None] - h[:, :, :, None] * pts[None, None, None, :]
    metric = np.sum(resid.real**2 + resid.imag**2, axis=1).reshape(b, nt * mo)
    k = np.argmin(metric, axis=1)
    ant, sym = np.divmod(k, mo)
    m = spectral_efficiency("SM", nt, mo)
    return BatchOutcome(
        labels=k.astype(np.int64),
        ops=np.full(b, c_sm_ml(m, nr), dtype=np.int64),
        antenna=ant,
        symbol=sym,
        metric=metric[np.arange(b), k],
    )


@lru_cache(maxsize=16)
def _smx_tables(nt, constellation):
    words = smx_codebook(nt, constellation)
    dense = constellation.points[words] / np.sqrt(nt)
    return words, dense


def smx_ml_batch(y, h, constellation):
    y = np.asarray(y)
    h = np.asarray(h)
    b, nr, nt = h.shape
    words, dense = _smx_tables(nt, constellation)
    resid = y[:, :, None] - h @ dense.T  # (b, nr, 2^m)
    metric = np.sum(resid.real**2 + resid.imag**2, axis=1)
    k = np.argmin(metric, axis=1)
    m = spectral_efficiency("SMX", nt, constellation.order)
    return BatchOutcome(
        labels=k.astype(np.int64),
        ops=np.full(b, c_smx_ml(m, nt, nr), dtype=np.int64),
        symbols=words[k],
        metric=metric[np.arange(b), k],
    )


# --- sphere decoders -----------------------------------------------------


@lru_cache(maxsize=32)
def _groups(constellation, scale=1.0):
    lv, gs, gl, gre, gsym = constellation.imag_groups()
    return (
        np.ascontiguousarray(lv * scale),
        gs,
        gl,
        np.ascontiguousarray(gre * scale),
        gsym,
    )


def _backend(backend):
    return kernels if backend is None else kernels.get_backend(backend)


def sm_rx_batch(y, h, constellation, sigma_n2=None, radius=None, backend=None):
    """Receive-side sphere decoder over a batch.

    Either ``radius`` (squared radius or :class:`SphereRadius`) or
    ``sigma_n2`` must be given.
    """
    h = np.asarray(h)
    b, nr, nt = h.shape
    hbar = np.ascontiguousarray(real_expand_matrix(h))
    ybar = np.ascontiguousarray(real_expand_vector(y))
    r2 = _r2_array(radius, nr, sigma_n2, b)
    pts = constellation.points
    ntilde = np.zeros((b, nt * len(pts)), dtype=np.int64)
    ant, sym, ops, restarts, metric = _backend(backend).sm_rx_batch(
        hbar, ybar, np.ascontiguousarray(pts.real), np.ascontiguousarray(pts.imag), nt, r2, ntilde
    )
    return BatchOutcome(
        labels=_sm_labels(ant, sym, len(pts)),
        ops=ops,
        antenna=ant,
        symbol=sym,
        restarts=restarts,
        metric=metric,
        ntilde=ntilde,
    )


def _tx_search(model, constellation, r2, update=True, restart=True, backend=None):
    d = np.ascontiguousarray(model.d_bar.reshape((-1,) + model.d_bar.shape[-2:]))
    z = np.ascontiguousarray(model.z_bar.reshape(d.shape[0], -1))
    nt = d.shape[-1] // 2
    inside = np.zeros((d.shape[0], nt * constellation.order), dtype=np.uint8)
    res = _backend(backend).sm_tx_batch(
        d, z, r2, *_groups(constellation), nt, bool(update), bool(restart), inside
    )
    return res, inside


def sm_tx_batch(y, h, constellation, sigma_n2, radius=None, backend=None, model=None):
    """Transmit-side sphere decoder over a batch."""
    h = np.asarray(h)
    b, nr, nt = h.shape
    if model is None:
        model = build_real_model(h, y, sigma_n2)
    r2 = _r2_array(radius, nr, sigma_n2, b)
    (ant, sym, ops, examined, n19, restarts, metric), _ = _tx_search(
        model, constellation, r2, backend=backend
    )
    return BatchOutcome(
        labels=_sm_labels(ant, sym, constellation.order),
        ops=ops + precomputation_ops(nt, nr),
        antenna=ant,
        symbol=sym,
        card=examined,
        n19=n19,
        restarts=restarts,
        metric=metric,
        extra={"phi": model.phi},
    )


def smx_sd_batch(y, h, constellation, sigma_n2, radius=None, backend=None, model=None):
    """Depth-first Schnorr-Euchner sphere decoder for SMX over a batch."""
    h = np.asarray(h)
    b, nr, nt = h.shape
    if model is None:
        model = build_real_model(h, y, sigma_n2)
    r2 = _r2_array(radius, nr, sigma_n2, b)
    d = np.ascontiguousarray(model.d_bar)
    z = np.ascontiguousarray(model.z_bar)
    out = np.full((b, nt), -1, dtype=np.int64)
    ops, nodes, restarts, metric = _backend(backend).tree_batch(
        d, z, r2, *_groups(constellation, 1.0 / math.sqrt(nt)), nt, out
    )
    return BatchOutcome(
        labels=_smx_labels(out, constellation.order),
        ops=ops + precomputation_ops(nt, nr),
        symbols=out,
        card=nodes,
        restarts=restarts,
        metric=metric,
        extra={"phi": model.phi},
    )


# --- single-trial forms --------------------------------------------------


def _one(y, h):
    y = np.asarray(y, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or y.shape != (h.shape[0],):
        raise ValueError("expected h of shape (nr, nt) and y of shape (nr,)")
    return y[None], h[None]


def _sm_outcome(res, nt, constellation):
    est = TxVector("SM", nt, constellation, (int(res.symbol[0]),), int(res.antenna[0]))
    return DetectionOutcome(
        estimate=est,
        ops=int(res.ops[0]),
        candidates_inside=0 if res.card is None else int(res.card[0]),
        n19_evaluations=0 if res.n19 is None else int(res.n19[0]),
        restarts=0 if res.restarts is None else int(res.restarts[0]),
        metric=float(res.metric[0]),
        ntilde=None if res.ntilde is None else res.ntilde[0].reshape(nt, -1),
    )


def sm_ml(y, h, constellation, nt=None):
    yb, hb = _one(y, h)
    res = sm_ml_batch(yb, hb, constellation)
    return _sm_outcome(res, hb.shape[2], constellation)


def smx_ml(y, h, constellation):
    yb, hb = _one(y, h)
    res = smx_ml_batch(yb, hb, constellation)
    nt = hb.shape[2]
    est = TxVector("SMX", nt, constellation, tuple(int(s) for s in res.symbols[0]))
    return DetectionOutcome(estimate=est, ops=int(res.ops[0]), metric=float(res.metric[0]))


def sm_rx(y_bar, h_bar, constellation, nt, radius, backend=None):
    """Receive-side sphere decoder on the real-valued model."""
    y_bar = np.asarray(y_bar, dtype=float)
    h_bar = np.asarray(h_bar, dtype=float)
    nr2 = y_bar.shape[0]
    if h_bar.shape != (nr2, 2 * nt):
        raise ValueError("h_bar must have shape (2 nr, 2 nt)")
    r2 = np.array([radius.r2 if isinstance(radius, SphereRadius) else float(radius)])
    pts = constellation.points
    ntilde = np.zeros((1, nt * len(pts)), dtype=np.int64)
    ant, sym, ops, restarts, metric = _backend(backend).sm_rx_batch(
        np.ascontiguousarray(h_bar[None]),
        np.ascontiguousarray(y_bar[None]),
        np.ascontiguousarray(pts.real),
        np.ascontiguousarray(pts.imag),
        nt,
        r2,
        ntilde,
    )
    res = BatchOutcome(
        labels=_sm_labels(ant, sym, len(pts)),
        ops=ops,
        antenna=ant,
        symbol=sym,
        restarts=restarts,
        metric=metric,
        ntilde=ntilde,
    )
    return _sm_outcome(res, nt, constellation)


def sm_tx(y, h, constellation, nt=None, nr=None, sigma_n2=None, radius=None, backend=None):
    if sigma_n2 is None:
        raise ValueError("sigma_n2 is required")
    yb, hb = _one(y, h)
    res = sm_tx_batch(yb, hb, constellation, sigma_n2, radius=radius, backend=backend)
    return _sm_outcome(res, hb.shape[2], constellation)


def smx_sd(y, h, constellation, nt=None, nr=None, sigma_n2=None, radius=None, backend=None):
    if sigma_n2 is None:
        raise ValueError("sigma_n2 is required")
    yb, hb = _one(y, h)
    res = smx_sd_batch(yb, hb, constellation, sigma_n2, radius=radius, backend=backend)
    est = TxVector("SMX", hb.shape[2], constellation, tuple(int(s) for s in res.symbols[0]))
    return DetectionOutcome(
        estimate=est,
        ops=int(res.ops[0]),
        candidates_inside=int(res.card[0]),
        restarts=int(res.restarts[0]),
        metric=float(res.metric[0]),
    )


def enumerate_theta(model, constellation: Constellation, nt, radius, update_radius=True,
                    backend=None):
    """Points ``(antenna, symbol)`` inside the sphere around ``z_bar``.

    With ``update_radius=False`` the result is exactly the set of points
    whose metric ``||z_bar - D_bar x_bar||^2`` is within ``radius``; with
    updates, the radius shrinks to each new best metric as the search
    proceeds.  Raises :class:`EmptySphere` if nothing is inside.
    """
    if model.d_bar.ndim != 2 or model.nt != nt:
        raise ValueError("expected a single-trial model with matching nt")
    r2 = radius.r2 if isinstance(radius, SphereRadius) else float(radius)
    if not r2 > 0:
        raise ValueError("radius must be positive")
    (ant, sym, ops, examined, n19, _, metric), inside = _tx_search(
        model, constellation, np.array([r2]), update=update_radius, restart=False,
        backend=backend,
    )
    if ant[0] < 0:
        raise EmptySphere(f"no point within r2={r2:g}")
    idx = np.flatnonzero(inside[0])
    members = frozenset((int(k) // constellation.order, int(k) % constellation.order) for k in idx)
    return ThetaEnumeration(
        members=members,
        best=(int(ant[0]), int(sym[0])),
        best_metric=float(metric[0]),
        n19_evaluations=int(n19[0]),
        examined=int(examined[0]),
        ops=int(ops[0]),
    )
