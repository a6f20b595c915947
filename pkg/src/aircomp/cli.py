"""Command-line entry point: ``aircomp sweep | complexity | selftest``."""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from .sim import DEFAULT_CODE, ConfigError, SimConfig, complexity_table, records_to_csv, run_sweep


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    if "-" in text and "," not in text:
        lo, hi = text.split("-")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aircomp", description="Coded digital over-the-air computation simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="BLER Monte-Carlo sweep, CSV output")
    sw.add_argument("--p", type=int, default=2, help="digit radix")
    sw.add_argument("--q", type=int, default=0, help="field order (default: smallest valid prime)")
    sw.add_argument("--k", type=int, default=2, help="number of transmitters")
    sw.add_argument("--dim", type=int, default=1, choices=(1, 2), help="lattice dimension D")
    sw.add_argument("--digits-l", type=int, default=6, help="digits per packed number")
    sw.add_argument("--code", default=DEFAULT_CODE, help="alist:<path> or random:M,N,w[,seed]")
    sw.add_argument("--snr-db", type=_floats, default=(10.0,), help="comma list; 'inf' is noiseless")
    sw.add_argument("--theta", type=_floats, default=(0.0,), help="comma list of phase bounds (rad)")
    sw.add_argument("--iters", type=int, default=20)
    sw.add_argument("--trials", type=int, default=10_000)
    sw.add_argument("--max-block-errors", type=int, default=200, help="0 disables early stop")
    sw.add_argument("--mode", choices=("coded", "uncoded"), default="coded")
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--out", default=None, help="CSV path (default: stdout)")
    sw.add_argument("--metric", choices=("full", "info"), default="full")
    sw.add_argument("--strict-kernel", action="store_true", help="unfolded Gaussian likelihood")
    sw.add_argument("--phase-per-symbol", action="store_true", help="redraw phase per subcarrier")
    sw.add_argument("--chunk", type=int, default=1000, help="trials per vectorised batch")
    sw.add_argument("--workers", type=int, default=1)

    cx = sub.add_parser("complexity", help="decoder state counts vs K, CSV output")
    cx.add_argument("--p", type=int, default=2)
    cx.add_argument("--k", type=_ints, default=list(range(1, 8)), help="e.g. 1-7 or 2,3,4")
    cx.add_argument("--out", default=None)

    sub.add_parser("selftest", help="fast invariant checks")
    return ap


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_sweep(args) -> int:
    cfg = SimConfig(
        p=args.p, q=args.q, K=args.k, D=args.dim, l=args.digits_l, code=args.code,
        snr_db=args.snr_db, theta_max=args.theta, max_iterations=args.iters,
        trials=args.trials, max_block_errors=args.max_block_errors or None,
        mode=args.mode, seed=args.seed, out=args.out, metric=args.metric,
        folded=not args.strict_kernel, phase_per_symbol=args.phase_per_symbol,
        chunk_size=args.chunk, workers=args.workers,
    )
    records = run_sweep(cfg)
    if not args.out:
        sys.stdout.write(records_to_csv(records))
    return 0


def complexity_csv(p: int, K_range) -> str:
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("p", "K", "proposed_states", "baseline_states"))
    for K, prop, base in complexity_table(p, K_range):
        w.writerow((p, K, prop, base))
    return buf.getvalue()


def cmd_complexity(args) -> int:
    _emit(complexity_csv(args.p, args.k), args.out)
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_all

    return 0 if run_all() else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return {"sweep": cmd_sweep, "complexity": cmd_complexity, "selftest": cmd_selftest}[args.command](args)
    except (ConfigError, OSError) as exc:
        print(f"aircomp: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
