"""Command-line front end: ``floquet-well {spectrum,evolve,switch,bessel,tunnel}``.

Exit codes: 0 success, 1 compute failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import math
import sys

import numpy as np

from . import experiments
from .model import NOON, OMEGA_REF, PAIR_LEFT, PAIR_RIGHT, DrivingSchedule, ModelParams, \
    ParameterError
from .propagate import IntegrationError
from .special import MAX_ZERO_INDEX, MAX_ZERO_ORDER, bessel_parity, bessel_zero

PRESETS = {"pair-right": PAIR_RIGHT, "pair-left": PAIR_LEFT, "noon": NOON}


class UsageError(Exception):
    pass


def fmt(value: float) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{float(value):.9g}"


def parse_initial(text: str) -> np.ndarray:
    if text in PRESETS:
        return PRESETS[text].to_array()
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"--initial must be a preset ({', '.join(PRESETS)}) or three complex numbers")
    try:
        values = np.array([complex(p.strip().replace(" ", "")) for p in parts])
    except ValueError as exc:
        raise UsageError(f"cannot parse --initial {text!r}") from exc
    norm = float(np.sum(np.abs(values) ** 2))
    if abs(norm - 1) > 1e-6:
        raise UsageError(f"initial state is not normalized (|a|^2 = {norm:.9g})")
    return values / math.sqrt(norm)


def _positive(kind):
    def check(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return check


def _non_negative(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def _add_model_flags(p, eps0=True):
    p.add_argument("--omega", type=_positive(float), default=50.0, help="driving frequency")
    p.add_argument("--gamma", type=_positive(float), default=0.5, help="tunneling coefficient")
    p.add_argument("--interaction", type=_non_negative, default=0.0, help="interaction strength U")
    if eps0:
        p.add_argument("--eps0", type=_non_negative, default=100.0, help="driving amplitude")


def _add_run_flags(p):
    p.add_argument("--initial", default="pair-right",
                   help="pair-right, pair-left, noon, or 'a0,a1,a2' complex literals")
    p.add_argument("--t-end", type=_positive(float), default=150.0)
    p.add_argument("--dt", type=_positive(float), default=0.1, help="sampling interval")
    p.add_argument("--engine", choices=("analytic", "numeric", "both"), default="numeric")
    p.add_argument("--out", default="-", help="output file (default: standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floquet-well",
        description="Two interacting bosons in a high-frequency driven double well.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="quasienergies against eps0/omega (CSV)")
    _add_model_flags(p, eps0=False)
    p.add_argument("--axis-min", type=_non_negative, default=0.0)
    p.add_argument("--axis-max", type=_non_negative, default=6.0)
    p.add_argument("--step", type=_positive(float), default=0.05)
    p.add_argument("--numeric-stride", type=int, default=10,
                   help="compute numeric quasienergies every N points (0: none)")
    p.add_argument("--out", default="-")

    p = sub.add_parser("evolve", help="population dynamics at constant driving (CSV)")
    _add_model_flags(p)
    _add_run_flags(p)

    p = sub.add_parser("switch", help="population dynamics under a driving schedule (CSV)")
    _add_model_flags(p, eps0=False)
    p.add_argument("--schedule", required=True, help='"t0:eps0,t1:eps1,..." with t0 = 0')
    _add_run_flags(p)

    p = sub.add_parser("bessel", help="Bessel function value or zero")
    p.add_argument("--order", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--x", type=float)
    group.add_argument("--zero", type=int)

    p = sub.add_parser("tunnel", help="pair tunneling time from |0,2> to |2,0>")
    _add_model_flags(p)
    p.add_argument("--threshold", type=float, default=0.95)
    return parser


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_rows(fh, header, rows):
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(fmt(v) for v in row) + "\n")


def cmd_spectrum(args):
    if args.axis_max < args.axis_min:
        raise UsageError("--axis-max must not be below --axis-min")
    if args.numeric_stride < 0:
        raise UsageError("--numeric-stride must be >= 0")
    sweep = experiments.sweep_spectrum(
        args.interaction, args.omega, args.gamma, args.axis_min, args.axis_max, args.step,
        args.numeric_stride,
    )
    header = ["eps_over_omega", "E0_analytic", "E1_analytic", "E2_analytic",
              "E0_numeric", "E1_numeric", "E2_numeric"]
    rows = (
        [x, *a, *n] for x, a, n in zip(sweep.axis, sweep.analytic, sweep.numeric)
    )
    with _output(args.out) as fh:
        _write_rows(fh, header, rows)


def _series_rows(result, engine, extra=None):
    """Header and rows for one engine, or both engines with a deviation column."""
    if engine == "both":
        a, n, _ = result
        header = ["t", "P0_analytic", "P1_analytic", "P2_analytic",
                  "P0_numeric", "P1_numeric", "P2_numeric", "deviation"]
        dev = np.max(np.abs(a.populations - n.populations), axis=1)
        rows = [[t, *pa, *pn, d] for t, pa, pn, d in zip(a.times, a.populations, n.populations, dev)]
    else:
        header = ["t", "P0", "P1", "P2"]
        rows = [[t, *p] for t, p in zip(result.times, result.populations)]
    if extra is not None:
        name, values = extra
        header.insert(1, name)
        rows = [[r[0], v, *r[1:]] for r, v in zip(rows, values)]
    return header, rows


def cmd_evolve(args):
    initial = parse_initial(args.initial)
    params = ModelParams(args.eps0, args.omega, args.gamma, args.interaction)
    result = experiments.population_series(params, initial, args.t_end, args.dt, args.engine)
    header, rows = _series_rows(result, args.engine)
    with _output(args.out) as fh:
        _write_rows(fh, header, rows)


def cmd_switch(args):
    initial = parse_initial(args.initial)
    try:
        schedule = DrivingSchedule.parse(args.schedule)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc
    params = ModelParams(schedule.segments[0][1], args.omega, args.gamma, args.interaction)
    result = experiments.run_switch(schedule, params, initial, args.t_end, args.dt, args.engine)
    times = result[0].times if args.engine == "both" else result.times
    from .model import drive_value

    active = [drive_value(schedule, t) for t in times]
    header, rows = _series_rows(result, args.engine, ("eps0_active", active))
    with _output(args.out) as fh:
        _write_rows(fh, header, rows)


def cmd_bessel(args):
    if args.zero is not None:
        if not (0 <= args.order <= MAX_ZERO_ORDER and 1 <= args.zero <= MAX_ZERO_INDEX):
            raise UsageError(
                f"zeros are available for order 0..{MAX_ZERO_ORDER}, index 1..{MAX_ZERO_INDEX}"
            )
        print(fmt(bessel_zero(args.order, args.zero)))
    else:
        if not math.isfinite(args.x):
            raise UsageError("--x must be finite")
        print(fmt(bessel_parity(args.order, args.x)))


def cmd_tunnel(args):
    params = ModelParams(args.eps0, args.omega, args.gamma, args.interaction)
    if not 0.5 < args.threshold < 1:
        raise UsageError("--threshold must lie in (0.5, 1)")
    res = experiments.tunneling_time(params, args.threshold)
    print(f"status: {res.status}")
    print(f"tunneling_time: {fmt(res.time)} (= {fmt(res.time / OMEGA_REF)} s)")
    print(f"closed_form_estimate: {fmt(res.estimate)} (= {fmt(res.estimate / OMEGA_REF)} s)")


COMMANDS = {
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "switch": cmd_switch,
    "bessel": cmd_bessel,
    "tunnel": cmd_tunnel,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    try:
        COMMANDS[args.command](args)
    except (UsageError, ParameterError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, RuntimeError, ValueError, OSError) as exc:
        print(f"{parser.prog}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
