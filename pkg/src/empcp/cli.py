"""Command-line front end.

Subcommands::

    empcp test FILE --stat v --combine mean --method check --seed 1
    empcp estimate FILE --stat s
    empcp simulate SPEC [--full] [--timing]
    empcp discretize --d 3 --m 32

Exit status is 0 on success, 2 for unreadable input (with the offending
line/column or spec key on standard error) and 3 for an invalid combination
of options, such as ``--method sim`` on multivariate data.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Sequence

import numpy as np

from . import engine, montecarlo, sphere
from .errors import (DimensionMismatch, EmpcpError, InvalidM, InvalidN, LengthMismatch,
                     SimRequiresUnivariate, SpecParseError)
from .model import (Combiner, Family, Method, StatFamily, StatProfile, TestReport,
                    validate_sample)
from .multiplier import default_m, run_tests

EXIT_PARSE = 2
EXIT_USAGE = 3

SUMMARY_KEYS = ("statistic", "family", "combiner", "method", "n", "d", "m", "N",
                "seed", "observed", "p_value", "k_hat")


class InputError(Exception):
    """A data file that cannot be read as a numeric matrix."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_csv(path: str):
    """Parse a comma-separated numeric file into a :class:`Sample`.

    A first line with any non-numeric field is taken as a header.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    numbered = [(i + 1, r) for i, r in enumerate(rows) if r and any(c.strip() for c in r)]
    if numbered and not all(_is_number(c) for c in numbered[0][1]):
        numbered = numbered[1:]
    if not numbered:
        raise InputError("no data rows")
    d = len(numbered[0][1])
    data = np.empty((len(numbered), d))
    for r, (line, cells) in enumerate(numbered):
        if len(cells) != d:
            raise InputError(f"expected {d} fields, found {len(cells)}", line)
        for c, cell in enumerate(cells):
            try:
                data[r, c] = float(cell)
            except ValueError:
                raise InputError(f"not a number: {cell.strip()!r}", line, c + 1) from None
    try:
        return validate_sample(data)
    except EmpcpError as exc:
        row = getattr(exc, "row", None)
        if row is not None:
            raise InputError(str(exc), numbered[row - 1][0], exc.col) from None
        raise InputError(str(exc)) from None


def report_to_dict(rep: TestReport, full: bool = False) -> dict:
    """JSON-ready summary of a report; ``full`` adds the profile and replicates."""
    out = {
        "statistic": rep.stat.name,
        "family": rep.stat.family.value,
        "combiner": rep.stat.combiner.value,
        "method": rep.method.value,
        "n": rep.n,
        "d": rep.d,
        "m": rep.m,
        "N": rep.N,
        "seed": rep.seed,
        "observed": float(rep.observed),
        "p_value": float(rep.p_value),
        "k_hat": int(rep.k_hat),
    }
    if full:
        out["profile"] = [float(v) for v in rep.profile.values]
        out["replicates"] = [float(v) for v in rep.replicates]
    return out


def report_from_dict(obj: dict) -> TestReport:
    """Inverse of ``report_to_dict(rep, full=True)``."""
    return TestReport(
        stat=StatFamily(Family(obj["family"]), Combiner(obj["combiner"])),
        observed=float(obj["observed"]),
        profile=StatProfile(np.asarray(obj["profile"], dtype=float), int(obj["n"])),
        p_value=float(obj["p_value"]),
        replicates=np.asarray(obj["replicates"], dtype=float),
        k_hat=int(obj["k_hat"]),
        method=Method(obj["method"]),
        seed=int(obj["seed"]),
        m=int(obj["m"]),
        d=int(obj["d"]),
    )


def _json(obj) -> str:
    # repr-based float output round-trips exactly
    return json.dumps(obj, allow_nan=False)


def _csv_rows(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in r))
    return "\n".join(lines) + "\n"


def _statistics(args) -> list[StatFamily]:
    if getattr(args, "all", False):
        return StatFamily.all()
    return [StatFamily(Family(args.stat.upper()), Combiner(args.combine))]


def _check_counts(args, d: int) -> None:
    if args.N is not None and args.N < 1:
        raise InvalidN(f"--N must be >= 1, got {args.N}")
    if args.m is not None and args.m < 1:
        raise InvalidM(f"--m must be >= 1, got {args.m}")
    if getattr(args, "method", None) == "sim" and d != 1:
        raise SimRequiresUnivariate(f"--method sim needs univariate data, got d={d}")


def cmd_test(args, out) -> int:
    sample = read_csv(args.input)
    _check_counts(args, sample.d)
    stats = _statistics(args)
    method = Method(args.method)
    if method is Method.SIM and any(s.family.uses_halfspaces for s in stats):
        raise SimRequiresUnivariate("--method sim covers the s and t statistics only")
    m = args.m if args.m is not None else default_m(sample.d)
    dirs = sphere.discretize(sample.d, m) if any(s.family.uses_halfspaces for s in stats) else None
    if args.share_multipliers or len(stats) == 1:
        reports = run_tests(sample, stats, method, args.N, dirs=dirs, seed=args.seed,
                            workers=args.workers)
    else:
        reports = []
        for i, st in enumerate(stats):
            # a distinct, reproducible stream per statistic
            s = int(np.random.SeedSequence([args.seed, i]).generate_state(1, np.uint64)[0])
            reports += run_tests(sample, [st], method, args.N, dirs=dirs, seed=s,
                                 workers=args.workers)
    for rep in reports:
        if rep.p_value <= args.alpha:
            print(f"{rep.stat.name}: reject at level {args.alpha:g} "
                  f"(p = {rep.p_value:g}, k_hat = {rep.k_hat})", file=sys.stderr)
    if args.output == "csv":
        out.write(_csv_rows(SUMMARY_KEYS, ([report_to_dict(r)[k] for k in SUMMARY_KEYS]
                                           for r in reports)))
    else:
        dicts = [report_to_dict(r) for r in reports]
        out.write(_json(dicts[0] if len(dicts) == 1 else dicts) + "\n")
    return 0


def cmd_estimate(args, out) -> int:
    sample = read_csv(args.input)
    _check_counts(args, sample.d)
    family = Family(args.stat.upper())
    if family.uses_halfspaces:
        m = args.m if args.m is not None else default_m(sample.d)
        table = engine.build_projection_table(sample, sphere.discretize(sample.d, m))
    else:
        m = 0
        table = engine.build_orthant_table(sample)
    prof = engine.profile(table, family)
    k_hat = engine.estimate_changepoint(prof)
    if args.output == "csv":
        out.write(_csv_rows(("k", "value"),
                            ((k, float(v)) for k, v in enumerate(prof.values, start=1))))
    else:
        obj = {"family": family.value, "n": sample.n, "d": sample.d, "m": m, "k_hat": k_hat}
        if args.profile:
            obj["profile"] = [float(v) for v in prof.values]
        out.write(_json(obj) + "\n")
    return 0


def cmd_simulate(args, out) -> int:
    try:
        with open(args.spec) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {args.spec}: {exc.strerror}") from None
    spec = montecarlo.parse_experiment(text)
    if args.full:
        spec = spec.full()
    for st, meth in spec.stats:
        if meth is Method.SIM and (spec.scenario.d != 1 or st.family.uses_halfspaces):
            raise SimRequiresUnivariate(f"{st.name}:sim needs univariate data and an s/t statistic")
    result = montecarlo.run_experiment(spec, workers=args.workers)
    montecarlo.emit_table(result, out, timing=args.timing)
    return 0


def cmd_discretize(args, out) -> int:
    if args.m < 1:
        raise InvalidM(f"--m must be >= 1, got {args.m}")
    if args.d < 1:
        raise DimensionMismatch(f"--d must be >= 1, got {args.d}")
    out.write(sphere.to_csv(sphere.discretize(args.d, args.m)))
    return 0


def _positive_workers(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="empcp",
                                description="Nonparametric change-point tests for multivariate data.")
    sub = p.add_subparsers(dest="command", required=True)
    workers = dict(type=_positive_workers, default=os.cpu_count() or 1,
                   help="threads for replicate computation (default: all cores)")

    def common(sp, method: bool):
        sp.add_argument("input", help="comma-separated data file, one observation per line")
        sp.add_argument("--stat", choices="stuv", type=str.lower, required=not method)
        sp.add_argument("--m", type=int, default=None,
                        help="directions for u/v (default 8 if d=2, 32 if d>=3)")
        sp.add_argument("--output", choices=("json", "csv"), default="json")

    t = sub.add_parser("test", help="run a change-point test on a data file")
    common(t, method=True)
    t.add_argument("--combine", choices=("max", "mean"), default="max")
    t.add_argument("--all", action="store_true", help="run all eight statistics")
    t.add_argument("--method", choices=("hat", "check", "sim"), default="check")
    t.add_argument("--N", type=int, default=1000, help="number of replicates")
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--seed", type=int, required=True)
    t.add_argument("--share-multipliers", action=argparse.BooleanOptionalAction, default=True,
                   help="use one multiplier matrix for all statistics")
    t.add_argument("--workers", **workers)
    t.set_defaults(func=cmd_test)

    e = sub.add_parser("estimate", help="locate the most likely change point")
    common(e, method=False)
    e.add_argument("--profile", action="store_true", help="include the per-split profile")
    e.set_defaults(func=cmd_estimate, N=None)

    s = sub.add_parser("simulate", help="run a Monte Carlo experiment from a spec file")
    s.add_argument("spec")
    s.add_argument("--full", action="store_true", help="1000 trials of 1000 replicates")
    s.add_argument("--timing", action="store_true", help="fill the seconds column")
    s.add_argument("--workers", **workers)
    s.set_defaults(func=cmd_simulate)

    g = sub.add_parser("discretize", help="print the direction set as CSV")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.set_defaults(func=cmd_discretize)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    if args.command == "test" and args.stat is None and not args.all:
        print("empcp test: one of --stat or --all is required", file=sys.stderr)
        return EXIT_PARSE
    try:
        return args.func(args, out)
    except (InputError, SpecParseError) as exc:
        print(f"empcp {args.command}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SimRequiresUnivariate, InvalidN, InvalidM, DimensionMismatch, LengthMismatch,
            EmpcpError, ValueError) as exc:
        print(f"empcp {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
