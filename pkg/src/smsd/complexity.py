"""Closed-form operation counts (real multiplications and divisions).

Additions are free.  The Cholesky cost ``4 nt^3 / 3`` is rounded up so
every figure here is an exact integer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import cholesky_ops, precomputation_ops

__all__ = [
    "RangeViolation",
    "ComplexityReport",
    "c_sm_ml",
    "c_smx_ml",
    "relative_ml_reduction",
    "c_rx_from_counts",
    "c_interval",
    "c_tx_bound",
    "c_cholesky",
    "c_precomputation",
    "relative_pct",
]

c_cholesky = cholesky_ops
c_precomputation = precomputation_ops


class RangeViolation(ValueError):
    pass


@dataclass(frozen=True)
class ComplexityReport:
    detector: str
    formula_value: int | None
    counted_mean: float
    rel_pct: float


def c_sm_ml(m, nr):
    """8 real multiplications per (antenna, symbol, receive antenna)."""
    if m < 1 or nr < 1:
        raise ValueError("m and nr must be positive")
    return 8 * nr * 2**m


def c_smx_ml(m, nt, nr):
    if m < 1 or nt < 1 or nr < 1:
        raise ValueError("m, nt and nr must be positive")
    return 4 * (nt + 1) * nr * 2**m


def relative_ml_reduction(nt):
    """Percent saved by SM-ML over SMX-ML at equal spectral efficiency."""
    if nt < 1:
        raise ValueError("nt must be positive")
    return 100.0 * (1.0 - 2.0 / (nt + 1))


def c_rx_from_counts(ntilde, nr=None, passes=1):
    """Receive-side decoder cost from its table of combined dimensions.

    ``ntilde`` holds, per (antenna, symbol), the number of real receive
    dimensions accumulated (summed over ``passes`` search passes).  With
    ``nr`` given the total is checked against ``[3, 6 nr] * 2^m`` per pass.
    """
    ntilde = np.asarray(ntilde)
    total = 3 * int(ntilde.sum())
    if nr is not None:
        points = ntilde.size
        lo, hi = 3 * points * passes, 6 * nr * points * passes
        if not lo <= total <= hi:
            raise RangeViolation(f"cost {total} outside [{lo}, {hi}]")
    return total


def c_interval(nt, n19, passes=1):
    """Interval cost: 2 divisions per antenna per pass plus ``2 nt + 3``
    per real-part interval."""
    return 2 * nt * passes + (2 * nt + 3) * n19


def c_tx_bound(nt, nr, card_theta, n19, passes=1):
    """Upper bound on the transmit-side decoder cost."""
    if min(nt, nr) < 1 or min(card_theta, n19) < 0 or passes < 1:
        raise ValueError("invalid arguments")
    return precomputation_ops(nt, nr) + c_interval(nt, n19, passes) + 3 * nt * card_theta


def relative_pct(counted_ops, m, nr):
    """Cost relative to SM-ML at the same ``m`` and ``nr``, in percent."""
    return 100.0 * np.asarray(counted_ops, dtype=float) / c_sm_ml(m, nr)
