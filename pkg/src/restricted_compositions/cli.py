"""Command-line interface.

Usage:
    rcomp root fib 2                       # root, S'(root), count constant, mean slope
    rcomp count fib 2 1000                 # exact count and summand statistics at n
    rcomp table fib 2 20 --check-paper     # alpha_m table against published values
    rcomp table poly k4 22,31 --check-paper
    rcomp compare plrs:2 2 fib             # limit of c_num(n)/c_den(n)
    rcomp threshold poly:1,0,0             # smallest m with F_k > P(k) for all k >= m
    rcomp outpace plrs:1,1,1 fib 100

Exit codes: 0 success, 1 --check-paper deviation, 2 usage or parse error,
3 numerical indeterminacy, 4 domain precondition violated.

Configuration precedence: flags > RCOMP_* environment variables > config
file (``--config``, flat ``key = value`` lines) > defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, fields, replace
from typing import IO, Optional, Sequence

from . import __version__
from .compare import (
    build_table_fibonacci,
    build_table_polynomial,
    classify_ratio_adaptive,
    round7,
)
from .counting import build_count_table, stats_at
from .errors import (
    CompositionsError,
    Indeterminate,
    InvalidSpec,
    LimitTooLarge,
    PrecisionExhausted,
    SpecParseError,
    TailNotConverged,
)
from .sequences import (
    Kind,
    certified_fibonacci_threshold,
    outpacing_index,
    parse_spec,
    ratio_certificate_index,
)
from .series import RestrictedSeries, find_root

__all__ = ["CliConfig", "load_config", "main"]

ENV_PREFIX = "RCOMP_"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_DOMAIN = 4


class ConfigError(CompositionsError, ValueError):
    code = "CONFIG_ERROR"


class UsageError(CompositionsError, ValueError):
    code = "USAGE"


@dataclass(frozen=True)
class CliConfig:
    abs_tol: float = 1e-9
    precision_cap_bits: int = 512
    table_limit: int = 2000
    output_format: str = "plain"
    memory_budget_bytes: int = 256 * 2**20

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ConfigError(f"abs_tol must be positive, got {self.abs_tol}")
        for name in ("precision_cap_bits", "table_limit", "memory_budget_bytes"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.output_format not in ("csv", "json", "plain"):
            raise ConfigError(f"output_format must be csv, json or plain, got {self.output_format!r}")


_FIELD_TYPES = {f.name: f.type for f in fields(CliConfig)}


def _coerce(key: str, value: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _FIELD_TYPES[key]
    try:
        if kind in ("float", float):
            return float(value)
        if kind in ("int", int):
            return int(value)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    return value.strip().lower()


def read_config_file(path: str) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            values[key.strip()] = _coerce(key.strip(), value.strip())
    return values


def read_environment(environ) -> dict:
    values = {}
    for name, value in environ.items():
        if name.startswith(ENV_PREFIX) and name != ENV_PREFIX + "CONFIG":
            values[name[len(ENV_PREFIX):].lower()] = _coerce(name[len(ENV_PREFIX):].lower(), value)
    return values


def load_config(flags: dict, environ=None, config_path: Optional[str] = None) -> CliConfig:
    environ = os.environ if environ is None else environ
    merged: dict = {}
    path = config_path or environ.get(ENV_PREFIX + "CONFIG")
    if path:
        merged.update(read_config_file(path))
    merged.update(read_environment(environ))
    merged.update({k: v for k, v in flags.items() if v is not None})
    return CliConfig(**merged)


# --- rendering ---------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    return round7(value)


def _emit(records: list[dict], columns: Sequence[str], cfg: CliConfig, out: IO[str]) -> None:
    if cfg.output_format == "json":
        for record in records:
            out.write(json.dumps(record, sort_keys=False) + "\n")
    elif cfg.output_format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(columns)
        for record in records:
            writer.writerow([_fmt(record.get(c)) for c in columns])
    else:
        width = max(len(c) for c in columns)
        for i, record in enumerate(records):
            if i:
                out.write("\n")
            for c in columns:
                value = record.get(c)
                out.write(f"{c.ljust(width)}  {'null' if value is None else _fmt(value)}\n")


# --- commands ----------------------------------------------------------------


def cmd_root(args, cfg: CliConfig, out: IO[str]) -> int:
    spec = parse_spec(args.seq)
    analysis = find_root(RestrictedSeries(spec, args.m), cfg.abs_tol, precision_cap=cfg.precision_cap_bits)
    record = analysis.as_dict()
    if cfg.output_format != "json":
        record["gamma_error"] = f"{float(analysis.gamma_error):.3e}"
    _emit([record], list(record), cfg, out)
    return EXIT_OK


def cmd_count(args, cfg: CliConfig, out: IO[str]) -> int:
    spec = parse_spec(args.seq)
    series = RestrictedSeries(spec, args.m)
    if args.n < 0:
        raise UsageError(f"n must be non-negative, got {args.n}")
    if args.n > cfg.table_limit:
        raise LimitTooLarge(f"n={args.n} exceeds the table limit {cfg.table_limit} (raise it with --limit)")
    limit = max(args.n, 0)
    table = build_count_table(series, limit, memory_budget=cfg.memory_budget_bytes)
    if table.counts[args.n] == 0:
        record = {"sequence": spec.label, "m": args.m, "n": args.n, "count": "0",
                  "mean_summands": None, "ones_density": None}
    else:
        stats = stats_at(table, args.n)
        record = {"sequence": spec.label, "m": args.m, **stats.as_dict()}
    _emit([record], list(record), cfg, out)
    return EXIT_OK


def _parse_m_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",")]
    except ValueError:
        raise SpecParseError(text, 0, "expected a comma-separated list of cut indices") from None
    return values


def cmd_table(args, cfg: CliConfig, out: IO[str]) -> int:
    status = EXIT_OK
    if args.which == "fib":
        if len(args.args) != 2:
            raise SpecParseError(" ".join(args.args), 0, "usage: table fib M_FROM M_TO")
        try:
            m_from, m_to = (int(a) for a in args.args)
        except ValueError:
            raise SpecParseError(" ".join(args.args), 0, "cut indices must be integers") from None
        rows = build_table_fibonacci(m_from, m_to, cfg.abs_tol, precision_cap=cfg.precision_cap_bits)
        columns = ["m", "smallest_part", "gamma", "mean_slope"]
        records = []
        for row in rows:
            record = {"m": row.m, "smallest_part": row.smallest_part, "gamma": row.gamma,
                      "mean_slope": row.derived_column}
            if args.check_paper:
                record["reference_gamma"] = row.reference[0] if row.reference else None
                record["reference_mean_slope"] = row.reference[1] if row.reference else None
                record["deviation"] = row.flagged
                if row.flagged:
                    status = EXIT_CHECK_FAILED
            records.append(record)
        if args.check_paper:
            columns += ["reference_gamma", "reference_mean_slope", "deviation"]
    else:
        if len(args.args) != 2:
            raise SpecParseError(" ".join(args.args), 0, "usage: table poly SPEC M1,M2,...")
        poly = parse_spec(args.args[0])
        rows = build_table_polynomial(poly, _parse_m_list(args.args[1]), cfg.abs_tol,
                                      precision_cap=cfg.precision_cap_bits)
        columns = ["m", "polynomial", "alpha", "gamma_p", "ratio"]
        records = []
        for row in rows:
            record = {"m": row.m, "polynomial": row.sequence_label, "alpha": row.gamma,
                      "gamma_p": row.companion_gamma, "ratio": row.derived_column}
            if args.check_paper:
                ref = row.reference or (None, None, None)
                record.update({
                    "reference_alpha": ref[0],
                    "reference_gamma_p": ref[1],
                    "reference_ratio": ref[2],
                    "discrepancy": row.flagged if row.reference else None,
                    "reference_alpha_shift": row.reference_alpha_shift,
                })
            records.append(record)
        if args.check_paper:
            columns += ["reference_alpha", "reference_gamma_p", "reference_ratio", "discrepancy",
                        "reference_alpha_shift"]

    if args.check_paper:
        flagged = [row.m for row in rows if row.flagged]
        if flagged:
            print(f"reference mismatch at m = {', '.join(map(str, flagged))}", file=sys.stderr)
    if cfg.output_format == "json":
        # field names of TableRow, so records re-parse with TableRow.from_dict
        records = [row.as_dict() for row in rows]
        if not args.check_paper:
            for record in records:
                record.pop("reference", None)
                record.pop("discrepancy", None)
                record.pop("reference_alpha_shift", None)
        columns = []
    _emit(records, columns, cfg, out)
    return status


def cmd_compare(args, cfg: CliConfig, out: IO[str]) -> int:
    num = RestrictedSeries(parse_spec(args.num), args.m)
    den = RestrictedSeries(parse_spec(args.den), args.m)
    result = classify_ratio_adaptive(num, den, cfg.abs_tol, precision_cap=cfg.precision_cap_bits)
    record = result.as_dict()
    if cfg.output_format != "json":
        record["root_ratio"] = result.root_ratio
        record["certified_margin"] = f"{result.certified_margin:.3e}"
    _emit([record], list(record), cfg, out)
    return EXIT_OK


def cmd_threshold(args, cfg: CliConfig, out: IO[str]) -> int:
    spec = parse_spec(args.poly)
    if spec.kind is not Kind.POLYNOMIAL:
        raise InvalidSpec(f"threshold needs a polynomial spec, got {spec.label}")
    m = certified_fibonacci_threshold(spec)
    if cfg.output_format == "plain":
        out.write(f"{m}\n")
    else:
        record = {"polynomial": spec.label, "threshold": m, "certificate_index": ratio_certificate_index(spec)}
        _emit([record], list(record), cfg, out)
    return EXIT_OK


def cmd_outpace(args, cfg: CliConfig, out: IO[str]) -> int:
    a, b = parse_spec(args.a), parse_spec(args.b)
    n = outpacing_index(a, b, args.horizon)
    if cfg.output_format == "plain":
        out.write(f"{'none' if n is None else n}\n")
    else:
        record = {"a": a.label, "b": b.label, "horizon": args.horizon, "index": n}
        _emit([record], list(record), cfg, out)
    return EXIT_OK


# --- entry point -------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol", dest="abs_tol", type=float, default=None, help="absolute root tolerance")
    parser.add_argument("--format", dest="output_format", choices=("csv", "json", "plain"), default=None)
    parser.add_argument("--limit", dest="table_limit", type=int, default=None, help="count table limit")
    parser.add_argument("--precision-cap", dest="precision_cap_bits", type=int, default=None)
    parser.add_argument("--memory-budget", dest="memory_budget_bytes", type=int, default=None)
    parser.add_argument("--config", default=None, help="flat key = value config file")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common)
    parser = _Parser(prog="rcomp", description="Asymptotics of compositions with restricted parts.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("root", parents=[common], help="root of S_m(x) = 1 and asymptotic constants")
    p.add_argument("seq")
    p.add_argument("m", type=int)
    p.set_defaults(func=cmd_root)

    p = sub.add_parser("count", parents=[common], help="exact composition count and statistics at n")
    p.add_argument("seq")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("table", parents=[common], help="reproduce the alpha_m or polynomial tables")
    p.add_argument("which", choices=("fib", "poly"))
    p.add_argument("args", nargs="+")
    p.add_argument("--check-paper", action="store_true", help="compare against published values")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("compare", parents=[common], help="limit of c_num(n)/c_den(n)")
    p.add_argument("num")
    p.add_argument("m", type=int)
    p.add_argument("den")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("threshold", parents=[common], help="smallest m with F_k > P(k) for all k >= m")
    p.add_argument("poly")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("outpace", parents=[common], help="first index from which A_k > B_k up to a horizon")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("horizon", type=int)
    p.set_defaults(func=cmd_outpace)
    return parser


def main(argv: Optional[Sequence[str]] = None, *, out: IO[str] = None, environ=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = {f.name: getattr(args, f.name, None) for f in fields(CliConfig)}
    try:
        cfg = load_config(flags, environ, args.config)
        return args.func(args, cfg, out)
    except (SpecParseError, ConfigError, UsageError) as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (Indeterminate, PrecisionExhausted, TailNotConverged) as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CompositionsError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
