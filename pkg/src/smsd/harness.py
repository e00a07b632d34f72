"""Monte Carlo BER / complexity sweeps.

Trials are processed in fixed-size batches.  Batch ``j`` at SNR index
``i`` draws its bits, channels and noise from the stream
``(seed, i, j)``, so results depend only on the configuration, not on the
number of worker processes.  All detectors of a sweep see the same draws.

Stopping rule per SNR point: run ``trials`` trials, then keep adding whole
batches until every detector has ``min_bit_errors`` bit errors or
``max_trials`` is reached (the point is then marked censored).
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import detectors as det
from .channel import draw_channel, draw_noise, make_stream, snr_to_sigma2
from .complexity import c_sm_ml
from .linalg import NotPositiveDefinite, build_real_model
from .modem import build_constellation, spectral_efficiency

__all__ = [
    "ConfigError",
    "DETECTORS",
    "SweepConfig",
    "SweepRecord",
    "CSV_COLUMNS",
    "run_sweep",
    "simulate_batch",
    "emit",
    "load_records",
]

log = logging.getLogger(__name__)

DETECTORS = {
    "sm-ml": "SM",
    "sm-rx": "SM",
    "sm-tx": "SM",
    "smx-ml": "SMX",
    "smx-sd": "SMX",
}

CSV_COLUMNS = (
    "detector",
    "snr_db",
    "trials",
    "bit_errors",
    "ber",
    "mean_ops",
    "rel_pct",
    "restarts",
    "mean_card_theta",
)


class ConfigError(ValueError):
    pass


@dataclass
class SweepConfig:
    scheme: str = "SM"
    nt: int = 4
    nr: int = 4
    mod_order: int = 16
    detectors: tuple = ("sm-ml", "sm-rx", "sm-tx")
    snr_db: tuple = tuple(float(s) for s in range(0, 31, 2))
    trials: int = 10_000
    seed: int = 0
    min_bit_errors: int = 200
    max_trials: int | None = None
    batch_size: int = 2_000
    workers: int = 1
    alpha: float | None = None

    def __post_init__(self):
        self.scheme = self.scheme.upper()
        self.detectors = tuple(d.lower() for d in self.detectors)
        self.snr_db = tuple(float(s) for s in self.snr_db)
        self.validate()

    def validate(self):
        if self.scheme not in ("SM", "SMX"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.batch_size < 1 or self.workers < 1:
            raise ConfigError("batch_size and workers must be >= 1")
        if self.min_bit_errors < 0:
            raise ConfigError("min_bit_errors must be >= 0")
        if self.max_trials is not None and self.max_trials < self.trials:
            raise ConfigError("max_trials must be >= trials")
        if not self.snr_db:
            raise ConfigError("empty SNR grid")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ConfigError("SNR grid must be strictly increasing")
        if not self.detectors:
            raise ConfigError("no detectors")
        for d in self.detectors:
            if d not in DETECTORS:
                raise ConfigError(f"unknown detector {d!r}; choose from {sorted(DETECTORS)}")
            if DETECTORS[d] != self.scheme:
                raise ConfigError(f"detector {d} does not apply to scheme {self.scheme}")
        try:
            spectral_efficiency(self.scheme, self.nt, self.mod_order)
            build_constellation(self.mod_order)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.nr < 1:
            raise ConfigError("nr must be >= 1")

    @property
    def m(self):
        return spectral_efficiency(self.scheme, self.nt, self.mod_order)

    @property
    def trial_cap(self):
        return self.max_trials if self.max_trials is not None else 100 * self.trials


@dataclass
class SweepRecord:
    detector: str
    snr_db: float
    trials: int
    bit_errors: int
    ber: float
    mean_ops: float
    rel_pct: float
    restarts: int
    mean_card_theta: float | None
    censored: bool = field(default=False, compare=False)


def _popcount(a):
    return np.bitwise_count(np.asarray(a, dtype=np.uint64)).astype(np.int64)


def _draw(cfg, const, sigma_n2, rng, n):
    nt, nr, mo = cfg.nt, cfg.nr, const.order
    if cfg.scheme == "SM":
        ant = rng.integers(0, nt, n)
        sym = rng.integers(0, mo, n)
        labels = ant * mo + sym
        x = np.zeros((n, nt), dtype=complex)
        x[np.arange(n), ant] = const.points[sym]
    else:
        words = rng.integers(0, mo, (n, nt))
        labels = np.zeros(n, dtype=np.int64)
        for col in range(nt):
            labels = labels * mo + words[:, col]
        x = const.points[words] / math.sqrt(nt)
    h = draw_channel(nr, nt, rng, n)
    noise = draw_noise(nr, sigma_n2, rng, n)
    return labels, x, h, noise


def _model(cfg, h, x, noise, sigma_n2, rng):
    # a rank-deficient channel has probability zero; redraw it if it occurs
    while True:
        y = np.einsum("bij,bj->bi", h, x) + noise
        try:
            return h, y, build_real_model(h, y, sigma_n2)
        except NotPositiveDefinite:
            bad = []
            for t in range(h.shape[0]):
                try:
                    build_real_model(h[t], y[t], sigma_n2)
                except NotPositiveDefinite:
                    bad.append(t)
            log.warning("redrawing %d degenerate channel(s)", len(bad))
            h = h.copy()
            h[bad] = draw_channel(cfg.nr, cfg.nt, rng, len(bad))


def simulate_batch(cfg, snr_index, batch_index, n):
    """Run every detector of ``cfg`` on one batch; returns per-detector sums."""
    const = build_constellation(cfg.mod_order)
    snr = cfg.snr_db[snr_index]
    sigma_n2 = float(snr_to_sigma2(snr))
    rng = make_stream(cfg.seed, snr_index, batch_index)
    labels, x, h, noise = _draw(cfg, const, sigma_n2, rng, n)
    radius = None
    if cfg.alpha is not None:
        radius = det.initial_radius(cfg.nr, sigma_n2, cfg.alpha)
    model = None
    if {"sm-tx", "smx-sd"} & set(cfg.detectors):
        h, y, model = _model(cfg, h, x, noise, sigma_n2, rng)
    else:
        y = np.einsum("bij,bj->bi", h, x) + noise

    out = {}
    for name in cfg.detectors:
        if name == "sm-ml":
            res = det.sm_ml_batch(y, h, const)
        elif name == "smx-ml":
            res = det.smx_ml_batch(y, h, const)
        elif name == "sm-rx":
            res = det.sm_rx_batch(y, h, const, sigma_n2, radius=radius)
        elif name == "sm-tx":
            res = det.sm_tx_batch(y, h, const, sigma_n2, radius=radius, model=model)
        else:
            res = det.smx_sd_batch(y, h, const, sigma_n2, radius=radius, model=model)
        out[name] = {
            "trials": n,
            "bit_errors": int(_popcount(labels ^ res.labels).sum()),
            "ops": int(res.ops.sum()),
            "restarts": 0 if res.restarts is None else int(res.restarts.sum()),
            "card": None if res.card is None else int(res.card.sum()),
        }
    return out


def _merge(acc, part):
    for name, vals in part.items():
        slot = acc.setdefault(name, {"trials": 0, "bit_errors": 0, "ops": 0, "restarts": 0,
                                     "card": None})
        for key in ("trials", "bit_errors", "ops", "restarts"):
            slot[key] += vals[key]
        if vals["card"] is not None:
            slot["card"] = (slot["card"] or 0) + vals["card"]


def _batch_sizes(cfg):
    full, rest = divmod(cfg.trials, cfg.batch_size)
    return [cfg.batch_size] * full + ([rest] if rest else [])


def _run_point(cfg, i, pool):
    def run(jobs):
        if pool is None:
            return [simulate_batch(cfg, i, j, n) for j, n in jobs]
        futs = [pool.submit(simulate_batch, cfg, i, j, n) for j, n in jobs]
        return [f.result() for f in futs]

    sizes = _batch_sizes(cfg)
    acc = {}
    for part in run(list(enumerate(sizes))):
        _merge(acc, part)

    def done():
        return all(v["bit_errors"] >= cfg.min_bit_errors for v in acc.values())

    j = len(sizes)
    total = cfg.trials
    while not done() and total < cfg.trial_cap:
        jobs = []
        t = total
        for _ in range(cfg.workers):
            n = min(cfg.batch_size, cfg.trial_cap - t)
            if n <= 0:
                break
            jobs.append((j + len(jobs), n))
            t += n
        for (_, n), part in zip(jobs, run(jobs)):
            # results past the first batch that meets the target are discarded
            if done():
                break
            _merge(acc, part)
            total += n
            j += 1
    return acc, not done()


def run_sweep(cfg):
    """Run the configured sweep and return one record per (detector, SNR)."""
    cfg.validate()
    records = []
    base = c_sm_ml(cfg.m, cfg.nr)
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for i, snr in enumerate(cfg.snr_db):
            acc, censored = _run_point(cfg, i, pool)
            if censored:
                log.warning("SNR %.2f dB: fewer than %d bit errors after %d trials",
                            snr, cfg.min_bit_errors, cfg.trial_cap)
            for name in cfg.detectors:
                v = acc[name]
                mean_ops = v["ops"] / v["trials"]
                records.append(SweepRecord(
                    detector=name,
                    snr_db=snr,
                    trials=v["trials"],
                    bit_errors=v["bit_errors"],
                    ber=v["bit_errors"] / (v["trials"] * cfg.m),
                    mean_ops=mean_ops,
                    rel_pct=100.0 * mean_ops / base,
                    restarts=v["restarts"],
                    mean_card_theta=None if v["card"] is None else v["card"] / v["trials"],
                    censored=censored,
                ))
    finally:
        if pool is not None:
            pool.shutdown()
    return records


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write(records, fmt, fh):
    if fmt == "csv":
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    else:
        json.dump([asdict(r) for r in records], fh, indent=1)
        fh.write("\n")


def emit(records, fmt, path):
    """Write records as CSV (fixed column set) or JSON (adds ``censored``).

    ``path`` may be a filename or an open text stream.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    fmt = fmt.lower()
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    if hasattr(path, "write"):
        _write(records, fmt, path)
    else:
        with open(path, "w", newline="") as fh:
            _write(records, fmt, fh)
    return path


_TYPES = {f.name: f.type for f in fields(SweepRecord)}


def _parse(name, text):
    if text == "":
        return None
    kind = _TYPES[name]
    if kind == "str":
        return text
    if kind == "int":
        return int(text)
    return float(text)


def load_records(path, fmt=None):
    fmt = (fmt or ("json" if str(path).endswith(".json") else "csv")).lower()
    if fmt == "json":
        with open(path) as fh:
            return [SweepRecord(**d) for d in json.load(fh)]
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [SweepRecord(**{k: _parse(k, v) for k, v in row.items()}) for row in rows]
