"""Command-line front end.

    p2gle encode --x 5/8 --digits 4
    p2gle decode --digits 1,3,1,1 --tail all-ones
    p2gle solve --potential logdigit --xi xi0
    p2gle spectrum --potential khintchine --xi-min 1.1 --xi-max 50 --steps 200 --out k.csv
    p2gle inflection
    p2gle sample --potential khintchine --xi 3 --n-points 1000 --depth 10000 --seed 1

Exit codes: 0 success, 1 usage or domain error, 2 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from .expansion import (
    DomainError,
    Tail,
    cylinder,
    decode,
    encode,
    format_digits,
    format_rational,
    parse_digits,
    parse_rational,
)
from .gibbs import SupportError, empirical_level_set_check
from .pressure import PotentialKind, SeriesConvergenceError, xi0
from .spectrum import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    NonConvergenceError,
    count_sign_changes,
    inflection_function,
    khintchine_inflection,
    level_solution,
    spectrum_curve,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2

CSV_HEADER = ("xi", "t", "q", "t_prime")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    potential: Optional[PotentialKind] = None
    xi: Optional[float] = None
    xi_min: Optional[float] = None
    xi_max: Optional[float] = None
    steps: int = 200
    depth: int = 10_000
    n_points: int = 1000
    seed: int = 1
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    out: Optional[str] = None
    fmt: str = "json"  # "text" is the default for encode, decode, inflection
    newton: bool = False

    def validate(self) -> "RunConfig":
        if self.tol <= 0 or self.max_iter < 1:
            raise UsageError("--tol must be positive and --max-iter at least 1")
        if self.command == "spectrum":
            if self.steps < 2:
                raise UsageError("--steps must be at least 2")
            if not (math.isfinite(self.xi_min) and math.isfinite(self.xi_max)):
                raise UsageError("spectrum grid bounds must be finite")
            if not self.xi_max > self.xi_min:
                raise UsageError("--xi-max must exceed --xi-min")
        if self.command == "sample":
            if self.depth < 1 or self.n_points < 1:
                raise UsageError("--depth and --n-points must be at least 1")
            if self.seed < 0:
                raise UsageError("--seed must be non-negative")
        if self.xi is not None and math.isinf(self.xi):
            if self.potential is not PotentialKind.EXP_DIGIT:
                raise UsageError("xi = inf is only accepted for the expdigit potential")
        return self


def parse_level(text: str) -> float:
    """Level value: a float, ``xi0`` (typical log-digit average) or ``inf``."""
    key = text.strip().lower()
    if key == "xi0":
        return xi0()
    if key in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        value = float(key)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid level value {text!r}") from None
    if math.isnan(value):
        raise argparse.ArgumentTypeError("level value must not be NaN")
    return value


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return fmt_float(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def _dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True)


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--out", default=d(None), help="output file (default stdout)")
    parser.add_argument("--format", dest="fmt", choices=("csv", "json"), default=d(None))
    parser.add_argument("--tol", type=float, default=d(DEFAULT_TOL))
    parser.add_argument("--max-iter", type=int, default=d(DEFAULT_MAX_ITER))
    parser.add_argument("--seed", type=int, default=d(1))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="p2gle",
        description="Power-2-decaying Gauss-like expansion: codec and Birkhoff spectra.",
    )
    _global_flags(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    potentials = [k.value for k in PotentialKind]

    p = sub.add_parser("encode", parents=[common], help="digits of a rational in (0, 1]")
    p.add_argument("--x", required=True, help="'p/q' or a finite decimal")
    p.add_argument("--digits", type=int, required=True, help="number of digits")

    p = sub.add_parser("decode", parents=[common], help="value or cylinder of a digit list")
    p.add_argument("--digits", required=True, help="comma-separated positive integers")
    p.add_argument("--tail", choices=("unspecified", "all-ones"), default="unspecified")

    p = sub.add_parser("solve", parents=[common], help="spectrum at a single level")
    p.add_argument("--potential", choices=potentials, required=True)
    p.add_argument("--xi", type=parse_level, required=True, help="level, 'xi0' or 'inf'")
    p.add_argument("--newton", action="store_true", help="force the Newton solver")

    p = sub.add_parser("spectrum", parents=[common], help="spectrum over a grid (CSV)")
    p.add_argument("--potential", choices=potentials, required=True)
    p.add_argument("--xi-min", type=parse_level, required=True)
    p.add_argument("--xi-max", type=parse_level, required=True)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--newton", action="store_true")

    sub.add_parser("inflection", parents=[common], help="inflection point of t(xi)")

    p = sub.add_parser("sample", parents=[common], help="Gibbs-measure level-set check")
    p.add_argument("--potential", choices=potentials, required=True)
    p.add_argument("--xi", type=parse_level, required=True)
    p.add_argument("--n-points", type=int, default=1000)
    p.add_argument("--depth", type=int, default=10_000)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    potential = getattr(args, "potential", None)
    default_fmt = {"spectrum": "csv", "solve": "json", "sample": "json"}.get(args.command, "text")
    return RunConfig(
        command=args.command,
        potential=PotentialKind.parse(potential) if potential else None,
        xi=getattr(args, "xi", None),
        xi_min=getattr(args, "xi_min", None),
        xi_max=getattr(args, "xi_max", None),
        steps=getattr(args, "steps", 200),
        depth=getattr(args, "depth", 10_000),
        n_points=getattr(args, "n_points", 1000),
        seed=args.seed,
        tol=args.tol,
        max_iter=args.max_iter,
        out=args.out,
        fmt=args.fmt or default_fmt,
        newton=getattr(args, "newton", False),
    ).validate()


# --- commands ------------------------------------------------------------------

def cmd_encode(args, cfg: RunConfig) -> str:
    x = parse_rational(args.x)
    if args.digits < 0:
        raise UsageError("--digits must be non-negative")
    seq = encode(x, args.digits)
    interval = cylinder(seq.digits)
    if cfg.fmt == "json":
        return _dump_json(
            {
                "x": format_rational(x),
                "digits": format_digits(seq.digits),
                "left": format_rational(interval.left),
                "right": format_rational(interval.right),
            }
        )
    return "\n".join(
        [
            format_digits(seq.digits),
            f"left={format_rational(interval.left)}",
            f"right={format_rational(interval.right)}",
        ]
    )


def cmd_decode(args, cfg: RunConfig) -> str:
    digits = parse_digits(args.digits)
    if not digits:
        raise UsageError("--digits must list at least one digit")
    if args.tail == "all-ones":
        value = decode(digits, Tail.ALL_ONES)
        payload = {"digits": format_digits(digits), "tail": "all-ones",
                   "value": format_rational(value)}
    else:
        interval = decode(digits, Tail.UNSPECIFIED)
        payload = {"digits": format_digits(digits), "tail": "unspecified",
                   "left": format_rational(interval.left),
                   "right": format_rational(interval.right),
                   "length": format_rational(interval.length)}
    if cfg.fmt == "json":
        return _dump_json(payload)
    return "\n".join(f"{k}={v}" for k, v in payload.items())


def cmd_solve(args, cfg: RunConfig) -> str:
    sol = level_solution(cfg.potential, cfg.xi, cfg.tol, cfg.max_iter, newton=cfg.newton)
    row = sol.as_dict()
    if cfg.fmt == "csv":
        return _csv([sol])
    return _dump_json(row)


def _csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([fmt_float(float(v)) for v in (r.xi, r.t, r.q, r.t_prime)])
    return buf.getvalue().rstrip("\n")


def cmd_spectrum(args, cfg: RunConfig) -> str:
    curve = spectrum_curve(
        cfg.potential, cfg.xi_min, cfg.xi_max, cfg.steps, cfg.tol, cfg.max_iter,
        newton=True if cfg.newton else None,
    )
    if cfg.fmt == "json":
        return _dump_json({"potential": cfg.potential.value,
                           "rows": [_jsonable(r.as_dict()) for r in curve.rows]})
    return _csv(curve.rows)


def cmd_inflection(args, cfg: RunConfig) -> str:
    root = khintchine_inflection()
    residual = float(inflection_function(root))
    changes = count_sign_changes()
    if cfg.fmt == "json":
        return _dump_json({"xi_tilde": root, "residual": residual, "sign_changes": changes})
    word = "sign change" if changes == 1 else "sign changes"
    return "\n".join(
        [f"xi_tilde={fmt_float(root)}", f"residual={fmt_float(residual)}", f"{changes} {word}"]
    )


def cmd_sample(args, cfg: RunConfig) -> str:
    report = empirical_level_set_check(
        cfg.potential, cfg.xi, cfg.n_points, cfg.depth, cfg.seed, cfg.tol, cfg.max_iter
    )
    if cfg.fmt == "csv":
        d = report.as_dict()
        return ",".join(d) + "\n" + ",".join(
            fmt_float(v) if isinstance(v, float) else str(v) for v in d.values()
        )
    return _dump_json(report.as_dict())


COMMANDS = {
    "encode": cmd_encode,
    "decode": cmd_decode,
    "solve": cmd_solve,
    "spectrum": cmd_spectrum,
    "inflection": cmd_inflection,
    "sample": cmd_sample,
}


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(_dump_json({"error": kind, "message": message}) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config(args)
        text = COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc))
    except (DomainError, SupportError, ValueError) as exc:
        return _fail(EXIT_USAGE, "domain", str(exc))
    except (NonConvergenceError, SeriesConvergenceError) as exc:
        return _fail(EXIT_NUMERIC, "non_convergence", str(exc))
    if cfg.out:
        try:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            return _fail(EXIT_USAGE, "io", str(exc))
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
