"""Command-line entry point: ``smsd {simulate,bound,complexity,radius}``."""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys

import numpy as np

from .analysis import BoundSpec, solve_alpha, union_bound_ber
from .complexity import c_precomputation, c_sm_ml, c_smx_ml, relative_ml_reduction
from .harness import DETECTORS, ConfigError, SweepConfig, emit, run_sweep

SEED_ENV = "SMSD_SEED"

_DEFAULT_DETECTORS = {"SM": "sm-ml,sm-rx,sm-tx", "SMX": "smx-ml,smx-sd"}


def parse_snr(tokens):
    """Numbers and ``start:stop:step`` ranges (stop inclusive)."""
    out = []
    for tok in tokens:
        for part in str(tok).replace(",", " ").split():
            if ":" in part:
                bits = part.split(":")
                if len(bits) != 3:
                    raise ValueError(f"bad SNR range {part!r}; use start:stop:step")
                a, b, s = (float(v) for v in bits)
                if s <= 0 or b < a:
                    raise ValueError(f"bad SNR range {part!r}")
                n = int(np.floor((b - a) / s + 1e-9)) + 1
                out.extend(round(a + k * s, 10) for k in range(n))
            else:
                out.append(float(part))
    return out


def _add_sweep_flags(p):
    p.add_argument("--config", help="INI file with a [simulate] section; keys mirror the long flags "
                   "(e.g. nt = 4, snr = 0:20:2, min-errors = 100); command-line flags override it")
    p.add_argument("--scheme", choices=["SM", "SMX", "sm", "smx"], help="modulation scheme (default SM)")
    p.add_argument("--nt", type=int, help="transmit antennas (default 4)")
    p.add_argument("--nr", type=int, help="receive antennas (default 4)")
    p.add_argument("--mod", type=int, help="constellation order M (default 16)")
    p.add_argument("--snr", nargs="+", help="SNR points in dB, numbers or start:stop:step "
                   "(default 0:30:2)")
    p.add_argument("--trials", type=int, help="minimum trials per SNR point (default 10000)")
    p.add_argument("--max-trials", type=int, help="trial cap per SNR point (default 100 x trials)")
    p.add_argument("--min-errors", type=int, help="bit errors wanted per detector before stopping "
                   "(default 200)")
    p.add_argument("--detectors", help="comma-separated list from: " + ", ".join(DETECTORS)
                   + " (default: all for the scheme)")
    p.add_argument("--seed", type=int, help=f"master seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--workers", type=int, help="worker processes; results do not depend on it")
    p.add_argument("--batch-size", type=int, help="trials per batch (default 2000)")
    p.add_argument("--alpha", type=float, help="radius constant (default: solved for a 1e-6 miss rate)")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=["csv", "json"], default=None, help="output format (default csv)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="smsd",
        description="Sphere decoding for spatial modulation: simulation, bounds and op counts.",
        epilog=f"The master seed may also be set with the {SEED_ENV} environment variable.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo BER and complexity sweep",
                       epilog=f"Seed precedence: --seed, then ${SEED_ENV}, then the config file, then 0.")
    _add_sweep_flags(p)

    p = sub.add_parser("bound", help="union bound on the SM bit error ratio")
    p.add_argument("--nt", type=int, default=4, help="transmit antennas (default 4)")
    p.add_argument("--nr", type=int, default=4, help="receive antennas (default 4)")
    p.add_argument("--mod", type=int, default=16, help="constellation order M (default 16)")
    p.add_argument("--snr", nargs="+", default=["0:30:2"], help="SNR points in dB (default 0:30:2)")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=["csv", "json"], default="csv", help="output format")

    p = sub.add_parser("complexity", help="closed-form operation counts")
    p.add_argument("--nt", type=int, nargs="+", default=[2, 4, 8], help="transmit antennas")
    p.add_argument("--nr", type=int, nargs="+", default=[2, 4], help="receive antennas")
    p.add_argument("--m", type=int, nargs="+", default=[6], help="bits per channel use")

    p = sub.add_parser("radius", help="initial sphere radius constant")
    p.add_argument("--nr", type=int, nargs="+", default=[1, 2, 4], help="receive antennas")
    p.add_argument("--target", type=float, default=1e-6,
                   help="probability that the transmitted point lies outside the sphere")
    return parser


def _read_config(path):
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read config file {path}")
    if not cp.has_section("simulate"):
        raise ConfigError(f"{path}: missing [simulate] section")
    return {k.replace("_", "-"): v for k, v in cp.items("simulate")}


def sweep_config(args, env=None):
    """Merge config file, environment and flags into a :class:`SweepConfig`."""
    env = os.environ if env is None else env
    file = _read_config(args.config) if args.config else {}
    known = {"scheme", "nt", "nr", "mod", "snr", "trials", "max-trials", "min-errors", "detectors",
             "seed", "workers", "batch-size", "alpha", "out", "format"}
    unknown = set(file) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def pick(flag, attr=None):
        v = getattr(args, attr or flag.replace("-", "_"))
        return v if v is not None else file.get(flag)

    kw = {}
    scheme = str(pick("scheme") or "SM").upper()
    kw["scheme"] = scheme
    for flag, key, conv in [("nt", "nt", int), ("nr", "nr", int), ("mod", "mod_order", int),
                            ("trials", "trials", int), ("max-trials", "max_trials", int),
                            ("min-errors", "min_bit_errors", int), ("workers", "workers", int),
                            ("batch-size", "batch_size", int), ("alpha", "alpha", float)]:
        v = pick(flag)
        if v is not None:
            try:
                kw[key] = conv(v)
            except ValueError:
                raise ConfigError(f"bad value for {flag}: {v!r}") from None
    snr = pick("snr")
    if snr is not None:
        try:
            kw["snr_db"] = parse_snr(snr if isinstance(snr, list) else [snr])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    dets = pick("detectors") or _DEFAULT_DETECTORS.get(scheme, "")
    kw["detectors"] = [d.strip() for d in dets.split(",") if d.strip()]
    if args.seed is not None:
        kw["seed"] = args.seed
    elif env.get(SEED_ENV):
        try:
            kw["seed"] = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
    elif "seed" in file:
        kw["seed"] = int(file["seed"])
    out = pick("out")
    fmt = pick("format") or "csv"
    if fmt not in ("csv", "json"):
        raise ConfigError(f"bad format {fmt!r}")
    return SweepConfig(**kw), out, fmt


def _write_table(header, rows, out=None, fmt="csv"):
    if fmt == "json":
        text = json.dumps([dict(zip(header, r)) for r in rows], indent=1) + "\n"
    else:
        text = "\n".join(",".join(str(v) for v in row) for row in [header, *rows]) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_simulate(args):
    cfg, out, fmt = sweep_config(args)
    records = run_sweep(cfg)
    emit(records, fmt, out or sys.stdout)
    return 0


def _cmd_bound(args):
    snr = parse_snr(args.snr)
    spec = BoundSpec(args.nt, args.nr, args.mod, tuple(snr))
    ber = union_bound_ber(spec)
    _write_table(("snr_db", "ber_bound"), [(s, f"{b:.6e}") for s, b in zip(snr, ber)],
                 args.out, args.format)
    return 0


def _cmd_complexity(args):
    header = ("m", "nt", "nr", "sm_ml", "smx_ml", "ml_saving_pct", "rx_min", "rx_max", "tx_precomp")
    rows = []
    for m in args.m:
        for nt in args.nt:
            for nr in args.nr:
                if nt < 1 or nr < 1 or m < 1:
                    raise ValueError("m, nt and nr must be positive")
                rows.append((m, nt, nr, c_sm_ml(m, nr), c_smx_ml(m, nt, nr),
                             f"{relative_ml_reduction(nt):.1f}%", 3 * 2**m, 6 * nr * 2**m,
                             c_precomputation(nt, nr)))
    _write_table(header, rows)
    return 0


def _cmd_radius(args):
    rows = [(nr, f"{solve_alpha(nr, args.target):.4f}") for nr in args.nr]
    _write_table(("nr", "alpha"), rows)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "bound": _cmd_bound,
    "complexity": _cmd_complexity,
    "radius": _cmd_radius,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"smsd {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
