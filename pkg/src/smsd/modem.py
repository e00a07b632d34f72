"""Constellations and bit mapping for spatial modulation (SM) and spatial
multiplexing (SMX).

Symbol index and bit label coincide: ``points[k]`` carries the label whose
integer value is ``k`` (MSB first).  Antennas are 0-based here; antenna
``l`` is selected by the natural-binary value ``l`` of the leading bits.

Constellation geometry
----------------------
* M = 2: BPSK ``{+1, -1}``.
* M = 4, 16, 64, 256: square QAM, Gray per axis (first half of the label
  on the in-phase axis).
* M = 8: rectangular 4 x 2 grid, Gray per axis.
* M = 32, 128: cross QAM.  Built from a Gray-labelled 2q x q rectangle
  (q = 4 or 8); the points with ``|I| > 1.5 q`` are folded onto the missing
  rows via ``(I, Q) -> (sgn(I) (q - |Q|), sgn(Q) (|I| - q/2))``.  The labels
  are only quasi-Gray around the folded rows.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SUPPORTED_ORDERS",
    "UnsupportedOrder",
    "NonPowerOfTwo",
    "LengthMismatch",
    "ShapeMismatch",
    "Constellation",
    "TxVector",
    "spectral_efficiency",
    "build_constellation",
    "sm_map",
    "sm_demap",
    "smx_map",
    "smx_demap",
    "smx_codebook",
    "bit_errors",
    "int_to_bits",
    "bits_to_int",
]

SUPPORTED_ORDERS = (2, 4, 8, 16, 32, 64, 128, 256)


class UnsupportedOrder(ValueError):
    pass


class NonPowerOfTwo(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


def _log2_exact(n, what):
    n = int(n)
    if n < 1 or n & (n - 1):
        raise NonPowerOfTwo(f"{what}={n} is not a power of two")
    return n.bit_length() - 1


def spectral_efficiency(scheme, nt, mod_order):
    """Bits per channel use of an SM or SMX system.

    SM needs a power-of-two antenna count; SMX accepts any ``nt``.
    """
    bm = _log2_exact(mod_order, "M")
    scheme = scheme.upper()
    if scheme == "SM":
        m = _log2_exact(nt, "nt") + bm
    elif scheme == "SMX":
        if nt < 1:
            raise ValueError("nt must be positive")
        m = int(nt) * bm
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    if m < 1:
        raise ValueError("system carries no bits")
    return m


def int_to_bits(value, width):
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits):
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def _as_bits(bits):
    if isinstance(bits, str):
        return np.array([int(c) for c in bits], dtype=np.uint8)
    return np.asarray(bits, dtype=np.uint8).ravel()


def _gray_pam(nbits):
    """Amplitudes of a Gray-labelled PAM, indexed by label."""
    n = 1 << nbits
    amp = np.empty(n)
    for k in range(n):
        amp[k ^ (k >> 1)] = n - 1 - 2 * k
    return amp


def _rect_qam(bits_i, bits_q):
    ai = _gray_pam(bits_i)
    aq = _gray_pam(bits_q) if bits_q else np.zeros(1)
    nq = 1 << bits_q
    return np.array([complex(ai[k // nq], aq[k % nq]) for k in range(len(ai) * nq)])


def _cross_qam(nbits):
    half = (nbits - 1) // 2
    q = 1 << half  # in-phase levels of the rectangle are +-1 .. +-(2q - 1)
    pts = _rect_qam(half + 1, half)
    out = pts.copy()
    for k, p in enumerate(pts):
        i, r = p.real, p.imag
        if abs(i) > 1.5 * q:
            out[k] = complex(np.sign(i) * (q - abs(r)), np.sign(r) * (abs(i) - q / 2))
    return out


@dataclass(frozen=True, eq=False)
class Constellation:
    order: int
    points: np.ndarray
    bits_per_symbol: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "bits_per_symbol", self.order.bit_length() - 1)
        self.points.setflags(write=False)

    @property
    def labels(self):
        w = self.bits_per_symbol
        return [format(k, f"0{w}b") if w else "" for k in range(self.order)]

    def bits(self, index):
        return int_to_bits(int(index), self.bits_per_symbol)

    def index(self, bits):
        return bits_to_int(_as_bits(bits))

    @property
    def mean_energy(self):
        return float(np.mean(np.abs(self.points) ** 2))

    def imag_groups(self):
        """Points grouped by distinct imaginary part.

        Returns ``(im_levels, start, length, re_sorted, sym_sorted)``: the
        sorted distinct imaginary values, and for level ``k`` the slice
        ``start[k]:start[k] + length[k]`` of the real parts (ascending) and
        their symbol indices.
        """
        return _imag_groups(self.points)


def _imag_groups(points, decimals=12):
    im = np.round(points.imag, decimals)
    levels = np.unique(im)
    start, length, re_sorted, sym_sorted = [], [], [], []
    for lv in levels:
        idx = np.flatnonzero(im == lv)
        idx = idx[np.argsort(points.real[idx], kind="stable")]
        start.append(len(re_sorted))
        length.append(len(idx))
        re_sorted.extend(points.real[idx])
        sym_sorted.extend(idx)
    return (
        np.array([points.imag[im == lv][0] for lv in levels]),
        np.array(start, dtype=np.int64),
        np.array(length, dtype=np.int64),
        np.array(re_sorted, dtype=float),
        np.array(sym_sorted, dtype=np.int64),
    )


def build_constellation(order):
    """Unit average energy QAM constellation of the given order."""
    order = int(order)
    if order not in SUPPORTED_ORDERS:
        raise UnsupportedOrder(f"M={order} not in {SUPPORTED_ORDERS}")
    nbits = order.bit_length() - 1
    if order == 2:
        pts = np.array([1.0 + 0j, -1.0 + 0j])
    elif order == 8:
        pts = _rect_qam(2, 1)
    elif nbits % 2 == 0:
        pts = _rect_qam(nbits // 2, nbits // 2)
    else:
        pts = _cross_qam(nbits)
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    return Constellation(order, pts)


@dataclass(frozen=True)
class TxVector:
    """A transmitted (or detected) vector.

    For ``scheme == "SM"`` ``antenna`` is the active antenna and ``symbols``
    holds one constellation index; for SMX ``symbols`` holds one index per
    antenna and ``antenna`` is ``None``.
    """

    scheme: str
    nt: int
    constellation: Constellation
    symbols: tuple
    antenna: int | None = None

    @property
    def dense(self):
        pts = self.constellation.points
        x = np.zeros(self.nt, dtype=complex)
        if self.scheme == "SM":
            x[self.antenna] = pts[self.symbols[0]]
        else:
            x[:] = pts[list(self.symbols)] / np.sqrt(self.nt)
        return x

    @property
    def bits(self):
        if self.scheme == "SM":
            return sm_demap(self.antenna, self.symbols[0], self.nt, self.constellation)
        return smx_demap(self.symbols, self.nt, self.constellation)


def sm_map(bits, nt, constellation):
    bits = _as_bits(bits)
    bn = _log2_exact(nt, "nt")
    if len(bits) != bn + constellation.bits_per_symbol:
        raise LengthMismatch(f"expected {bn + constellation.bits_per_symbol} bits, got {len(bits)}")
    ant = bits_to_int(bits[:bn])
    sym = bits_to_int(bits[bn:])
    return TxVector("SM", int(nt), constellation, (sym,), ant)


def sm_demap(ell, symbol_index, nt, constellation):
    bn = _log2_exact(nt, "nt")
    if not 0 <= ell < nt:
        raise IndexError(f"antenna {ell} out of range for nt={nt}")
    if not 0 <= symbol_index < constellation.order:
        raise IndexError(f"symbol {symbol_index} out of range")
    return np.concatenate([int_to_bits(ell, bn), constellation.bits(symbol_index)])


def smx_map(bits, nt, constellation):
    bits = _as_bits(bits)
    k = constellation.bits_per_symbol
    if len(bits) != nt * k:
        raise LengthMismatch(f"expected {nt * k} bits, got {len(bits)}")
    syms = tuple(bits_to_int(bits[i * k:(i + 1) * k]) for i in range(nt))
    return TxVector("SMX", int(nt), constellation, syms)


def smx_demap(symbols, nt, constellation):
    if len(symbols) != nt:
        raise ShapeMismatch("one symbol per antenna expected")
    return np.concatenate([constellation.bits(s) for s in symbols])


def smx_codebook(nt, constellation):
    """All ``M**nt`` symbol-index words, in label order, shape ``(2^m, nt)``."""
    m = constellation.order
    return np.array(list(itertools.product(range(m), repeat=nt)), dtype=np.int64).reshape(-1, nt)


def bit_errors(x1, x2):
    """Hamming distance between the bit labels of two transmit vectors."""
    if x1.scheme != x2.scheme or x1.nt != x2.nt or x1.constellation.order != x2.constellation.order:
        raise ShapeMismatch("vectors belong to different systems")
    return int(np.count_nonzero(x1.bits != x2.bits))
