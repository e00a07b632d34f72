"""Sphere decoders for spatial modulation MIMO."""

from .analysis import BoundSpec, solve_alpha, union_bound_ber
from .channel import draw_channel, draw_noise, make_stream, snr_to_sigma2, transmit
from .detectors import (
    enumerate_theta,
    initial_radius,
    sm_ml,
    sm_rx,
    sm_tx,
    smx_ml,
    smx_sd,
)
from .harness import SweepConfig, SweepRecord, emit, load_records, run_sweep
from .kernels import BACKEND
from .linalg import build_real_model
from .modem import build_constellation, sm_demap, sm_map, smx_demap, smx_map, spectral_efficiency

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundSpec",
    "SweepConfig",
    "SweepRecord",
    "build_constellation",
    "build_real_model",
    "draw_channel",
    "draw_noise",
    "emit",
    "enumerate_theta",
    "initial_radius",
    "load_records",
    "make_stream",
    "run_sweep",
    "sm_demap",
    "sm_map",
    "sm_ml",
    "sm_rx",
    "sm_tx",
    "smx_demap",
    "smx_map",
    "smx_ml",
    "smx_sd",
    "snr_to_sigma2",
    "solve_alpha",
    "spectral_efficiency",
    "transmit",
    "union_bound_ber",
    "__version__",
]
