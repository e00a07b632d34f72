"""Rayleigh channel, AWGN and the forward model ``y = H x + n``.

``sigma_n2`` is the total complex noise variance per receive antenna
(``sigma_n2 / 2`` per real dimension), so ``SNR = 1 / sigma_n2`` at unit
transmit energy.

Randomness: every stream is a ``numpy.random.Generator`` (PCG64) seeded
from ``SeedSequence(master_seed, spawn_key=key)``; the key is a tuple of
indices (e.g. ``(snr_index, batch_index)``), so a stream depends only on
the master seed and its position in the sweep, never on scheduling.
"""

import numpy as np

from .modem import ShapeMismatch, TxVector

__all__ = [
    "snr_to_sigma2",
    "make_stream",
    "draw_channel",
    "draw_noise",
    "transmit",
]


def snr_to_sigma2(snr_db):
    return 10.0 ** (-np.asarray(snr_db, dtype=float) / 10.0)


def make_stream(seed, *key):
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def _cn(rng, shape, var):
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_channel(nr, nt, rng, size=None):
    """i.i.d. CN(0, 1) channel; ``size`` prepends batch dimensions."""
    if nr < 1 or nt < 1:
        raise ValueError("nr and nt must be positive")
    shape = (nr, nt) if size is None else tuple(np.atleast_1d(size)) + (nr, nt)
    return _cn(rng, shape, 1.0)


def draw_noise(nr, sigma_n2, rng, size=None):
    shape = (nr,) if size is None else tuple(np.atleast_1d(size)) + (nr,)
    return _cn(rng, shape, sigma_n2)


def transmit(h, x, sigma_n2, rng=None, noise=None):
    """Received vector for one transmission.

    SM vectors use the active column only.  Pass ``noise`` explicitly to
    reuse a draw; otherwise it is drawn from ``rng`` (no noise when both
    are ``None``).
    """
    h = np.asarray(h)
    nr, nt = h.shape
    if isinstance(x, TxVector):
        if x.nt != nt:
            raise ShapeMismatch(f"channel has {nt} columns, vector has {x.nt}")
        if x.scheme == "SM":
            clean = h[:, x.antenna] * x.constellation.points[x.symbols[0]]
        else:
            clean = h @ x.dense
    else:
        x = np.asarray(x)
        if x.shape != (nt,):
            raise ShapeMismatch(f"expected vector of length {nt}")
        clean = h @ x
    if noise is None and rng is not None:
        noise = draw_noise(nr, sigma_n2, rng)
    return clean if noise is None else clean + noise
