"""Command-line entry point: ``kflux --mode ball_walk --dims 1-5 --trials 20``."""

from __future__ import annotations

import argparse
import logging
import re
import sys

from .experiment import FORMATS, MODES, ExperimentConfig, emit, run_experiment

log = logging.getLogger("kflux")

EXIT_USAGE = 2
EXIT_RUNTIME = 3


def parse_dims(text: str) -> tuple[int, ...]:
    """``"1,2,5"``, ``"1-10"``, ``"1..10"`` or any comma mix of these."""
    dims: list[int] = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"(\d+)\s*(?:-|\.\.)\s*(\d+)", part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            dims.extend(range(lo, hi + 1))
        elif part.isdigit():
            dims.append(int(part))
        else:
            raise argparse.ArgumentTypeError(f"bad dimension list {text!r}")
    return tuple(dims)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="kflux",
        description="Estimate the boundary-flux constant K by random-walk and chord simulation.",
    )
    p.add_argument("--mode", choices=MODES, default="ball_walk")
    p.add_argument("--dims", type=parse_dims, default=(3,), help="comma list or range, e.g. 1-10")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--walkers", type=int, default=20000)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=None, help="cap colatitude in radians (s2_cap)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sample-mode", choices=("rejection", "direct"), default="direct")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--out", default="-", help="output path (default: standard output)")
    p.add_argument("--no-rescatter", action="store_true",
                   help="keep the reflected direction instead of resampling every step")
    p.add_argument("--timing", action="store_true",
                   help="record wall_time_s (otherwise 0, keeping output reproducible)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = ExperimentConfig(
            mode=args.mode, dims=args.dims, trials=args.trials, walkers=args.walkers,
            steps=args.steps, dt=args.dt, radius=args.radius, theta=args.theta, seed=args.seed,
            sample_mode=args.sample_mode, workers=args.workers, output=args.format,
            rescatter=not args.no_rescatter, timing=args.timing,
        )
    except ValueError as exc:
        print(f"kflux: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        records = run_experiment(cfg)
        payload = emit(records, cfg.output)
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"kflux: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    log.info("%d records", len(records))
    try:
        if args.out == "-":
            sys.stdout.buffer.write(payload)
            sys.stdout.flush()
        else:
            with open(args.out, "wb") as fh:
                fh.write(payload)
    except OSError as exc:
        print(f"kflux: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
