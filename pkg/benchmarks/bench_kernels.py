"""Compare the compiled and pure-Python search kernels.

    python benchmarks/bench_kernels.py [--trials N] [--repeat R]
"""

import argparse
import time

import numpy as np

from smsd import detectors as det
from smsd import kernels
from smsd.channel import draw_channel, draw_noise, make_stream, snr_to_sigma2
from smsd.modem import build_constellation

CASES = [
    ("sm-rx", "SM", 4, 4, 16, 10),
    ("sm-tx", "SM", 4, 4, 16, 10),
    ("sm-tx", "SM", 2, 2, 128, 20),
    ("smx-sd", "SMX", 2, 2, 16, 10),
    ("smx-sd", "SMX", 3, 2, 4, 10),
]

RUN = {"sm-rx": det.sm_rx_batch, "sm-tx": det.sm_tx_batch, "smx-sd": det.smx_sd_batch}


def draws(scheme, nt, nr, order, snr, n, seed=0):
    rng = make_stream(seed)
    c = build_constellation(order)
    s2 = float(snr_to_sigma2(snr))
    h = draw_channel(nr, nt, rng, n)
    if scheme == "SM":
        x = np.zeros((n, nt), complex)
        x[np.arange(n), rng.integers(0, nt, n)] = c.points[rng.integers(0, order, n)]
    else:
        x = c.points[rng.integers(0, order, (n, nt))] / np.sqrt(nt)
    y = np.einsum("bij,bj->bi", h, x) + draw_noise(nr, s2, rng, n)
    return c, s2, h, y


def timeit(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    try:
        kernels.get_backend("c")
    except ImportError:
        print("compiled extension not built; nothing to compare")
        return 1
    print(f"{'detector':8s} {'system':>16s} {'python us/trial':>16s} {'c us/trial':>11s} {'speedup':>8s}")
    for name, scheme, nt, nr, order, snr in CASES:
        c, s2, h, y = draws(scheme, nt, nr, order, snr, args.trials)
        times = {}
        for backend in ("python", "c"):
            times[backend] = timeit(lambda: RUN[name](y, h, c, s2, backend=backend), args.repeat)
        us = {k: 1e6 * v / args.trials for k, v in times.items()}
        system = f"{nr}x{nt} M={order} {snr}dB"
        print(f"{name:8s} {system:>16s} {us['python']:16.1f} {us['c']:11.2f} "
              f"{times['python'] / times['c']:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
