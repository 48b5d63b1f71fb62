"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data or configuration error,
3 internal error. ``IOTPGA_MASTER_SEED`` overrides a sweep's master seed.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from typing import Sequence

import numpy as np

from . import __version__
from .config import load_config
from .errors import ConfigError, DatasetError, InsufficientData, InvalidInput, InvalidParameter
from .ingest import (
    DatasetFormat,
    eligible_counts,
    generate_synthetic,
    load_dataset,
    write_dataset,
)
from .summarize import summarize_values

log = logging.getLogger("iotpga")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
SEED_ENV = "IOTPGA_MASTER_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; usage errors here are 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {v}")
    return v


def _k_range(text: str) -> range:
    """``A-B`` or ``A:B`` (inclusive) or a single ``K``."""
    sep = "-" if "-" in text else ":"
    lo, _, hi = text.partition(sep)
    try:
        lo_i = int(lo)
        hi_i = int(hi) if hi else lo_i
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad k range {text!r}; use e.g. 1-10") from None
    if lo_i < 1 or hi_i < lo_i:
        raise argparse.ArgumentTypeError(f"bad k range {text!r}; need 1 <= start <= end")
    return range(lo_i, hi_i + 1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="iotpga", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-data", help="write a synthetic dataset")
    g.add_argument("--profile", choices=("daily_load", "trip_speeds"), default="daily_load")
    g.add_argument("--suppliers", type=int, required=True)
    g.add_argument("--epochs", type=int, required=True)
    g.add_argument("--series-length", type=int, default=48, help="time steps per epoch (daily_load)")
    g.add_argument("--trip-law", default="poisson:4",
                   help="trips per epoch (trip_speeds): poisson:LAM, geometric:P or fixed:N")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    s = sub.add_parser("summarize", help="print a raw series next to its k-means summary")
    s.add_argument("--in", dest="path", required=True)
    s.add_argument("--k", type=_positive, required=True)
    s.add_argument("--supplier", required=True)
    s.add_argument("--epoch", type=_positive, required=True, help="1-based epoch")
    s.add_argument("--format", choices=[f.value for f in DatasetFormat if f is not DatasetFormat.SYNTHETIC],
                   help="dataset format (default: from the header)")

    w = sub.add_parser("sweep", help="run a configured experiment")
    w.add_argument("--config", required=True)
    w.add_argument("--out", required=True)
    w.add_argument("--threads", type=_positive, default=1)

    e = sub.add_parser("eligible", help="suppliers with enough data points per k")
    e.add_argument("--in", dest="path", required=True)
    e.add_argument("--k-range", type=_k_range, default=range(1, 11))
    e.add_argument("--format", choices=[f.value for f in DatasetFormat if f is not DatasetFormat.SYNTHETIC])
    return p


def _load(path: str, fmt: str | None):
    return load_dataset(path, fmt or DatasetFormat.SYNTHETIC)


def cmd_gen_data(args) -> int:
    if args.suppliers < 2:
        raise UsageError(f"--suppliers must be >= 2, got {args.suppliers}")
    if args.epochs < 1:
        raise UsageError(f"--epochs must be >= 1, got {args.epochs}")
    if args.series_length < 1:
        raise UsageError(f"--series-length must be >= 1, got {args.series_length}")
    try:
        series = generate_synthetic(args.profile, args.suppliers, args.epochs,
                                    series_length=args.series_length, trip_law=args.trip_law,
                                    seed=args.seed)
    except InvalidParameter as exc:
        raise UsageError(str(exc)) from None
    fmt = DatasetFormat.NREL_LIKE if args.profile == "trip_speeds" else DatasetFormat.ECBT_LIKE
    write_dataset(series, args.out, fmt)
    log.info("wrote %d series to %s", len(series), args.out)
    return EXIT_OK


def cmd_summarize(args, out=None) -> int:
    out = out or sys.stdout
    series = _load(args.path, args.format)
    epoch = args.epoch - 1
    match = [s for s in series if str(s.supplier) == args.supplier and s.epoch == epoch]
    if not match:
        raise InvalidInput(f"no series for supplier {args.supplier!r} in epoch {args.epoch}")
    raw = match[0].array
    summ = summarize_values(raw, args.k)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("t", "raw", f"k{args.k}"))
    for t, (r, s) in enumerate(zip(raw, summ), start=1):
        writer.writerow((t, repr(float(r)), repr(float(s))))
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .harness import run_experiment, write_outputs

    config = load_config(args.config)
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None and env_seed.strip():
        try:
            config = config.with_seed(int(env_seed))
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env_seed!r}") from None
    start = time.perf_counter()
    result = run_experiment(config, threads=args.threads)
    manifest = write_outputs(result, config, args.out)
    log.info("%d records in %.1fs; manifest %s", len(result.records), time.perf_counter() - start, manifest)
    return EXIT_OK


def cmd_eligible(args, out=None) -> int:
    out = out or sys.stdout
    series = _load(args.path, args.format)
    counts = eligible_counts(series, args.k_range)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("k", "eligible_suppliers"))
    for k, c in counts.items():
        writer.writerow((k, c))
    return EXIT_OK


COMMANDS = {
    "gen-data": cmd_gen_data,
    "summarize": cmd_summarize,
    "sweep": cmd_sweep,
    "eligible": cmd_eligible,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:    # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    np.seterr(all="ignore")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"iotpga {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InsufficientData as exc:
        print(f"iotpga {args.command}: insufficient data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DatasetError, ConfigError, InvalidInput, InvalidParameter, OSError) as exc:
        print(f"iotpga {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - last-resort boundary
        log.debug("internal error", exc_info=True)
        print(f"iotpga {args.command}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
