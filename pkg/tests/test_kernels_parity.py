"""The compiled kernels must reproduce the reference kernels bit for bit."""

import numpy as np
import pytest

from smsd import detectors as det
from smsd import kernels
from smsd.channel import draw_channel, draw_noise, make_stream
from smsd.modem import build_constellation

try:
    kernels.get_backend("c")
    HAVE_C = True
except ImportError:
    HAVE_C = False

pytestmark = pytest.mark.skipif(not HAVE_C, reason="compiled extension not built")


def _batch(nr, nt, s2, n, seed, smx_order=None):
    rng = make_stream(seed)
    h = draw_channel(nr, nt, rng, n)
    x = rng.standard_normal((n, nt)) + 1j * rng.standard_normal((n, nt))
    if smx_order is None:
        x[:, 1:] = 0
    return h, np.einsum("bij,bj->bi", h, x) + draw_noise(nr, s2, rng, n)


def _same(a, b):
    for name in ("labels", "ops", "card", "n19", "restarts", "ntilde", "symbols"):
        va, vb = getattr(a, name), getattr(b, name)
        if va is None:
            assert vb is None
        else:
            np.testing.assert_array_equal(va, vb, err_msg=name)
    np.testing.assert_array_equal(a.metric, b.metric)


CASES = [(2, 4, 16, 0.1), (4, 4, 16, 0.3), (2, 2, 32, 0.05), (2, 8, 4, 0.2), (1, 2, 2, 1.0),
         (4, 2, 128, 0.01)]


@pytest.mark.parametrize("nr, nt, order, s2", CASES)
def test_sm_rx(nr, nt, order, s2):
    c = build_constellation(order)
    h, y = _batch(nr, nt, s2, 300, nr * nt)
    a = det.sm_rx_batch(y, h, c, s2, backend="c")
    b = det.sm_rx_batch(y, h, c, s2, backend="python")
    _same(a, b)


@pytest.mark.parametrize("nr, nt, order, s2", CASES)
def test_sm_tx(nr, nt, order, s2):
    c = build_constellation(order)
    h, y = _batch(nr, nt, s2, 300, nr * nt + 1)
    a = det.sm_tx_batch(y, h, c, s2, backend="c")
    b = det.sm_tx_batch(y, h, c, s2, backend="python")
    _same(a, b)


@pytest.mark.parametrize("nr, nt, order, s2", [(2, 2, 4, 0.1), (2, 3, 4, 0.2), (4, 2, 16, 0.05)])
def test_tree(nr, nt, order, s2):
    c = build_constellation(order)
    h, y = _batch(nr, nt, s2, 200, 7, smx_order=order)
    a = det.smx_sd_batch(y, h, c, s2, backend="c")
    b = det.smx_sd_batch(y, h, c, s2, backend="python")
    _same(a, b)


def test_tiny_radius_restarts_agree():
    c = build_constellation(16)
    h, y = _batch(2, 4, 0.1, 100, 3)
    for fn in (det.sm_rx_batch, det.sm_tx_batch):
        a = fn(y, h, c, 0.1, radius=1e-6, backend="c")
        b = fn(y, h, c, 0.1, radius=1e-6, backend="python")
        assert a.restarts.min() > 0
        _same(a, b)
