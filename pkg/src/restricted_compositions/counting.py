"""Exact big-integer counts of compositions with restricted parts.

For the part set {H_i : i >= m} the tables satisfy

    c(n) = sum_p c(n - p)
    w(n) = sum_p (w(n - p) + c(n - p))          total number of summands
    u(n) = sum_p (u(n - p) + [p == 1] c(n - p)) total number of summands equal to 1

with c(0) = 1 and w(0) = u(0) = 0, the sums running over parts p <= n.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import IO, Iterator, Optional, Union

import gmpy2
from gmpy2 import mpfr, mpz

from .errors import (
    CompositionsError,
    LimitTooLarge,
    MismatchedSeries,
    NoCompositions,
    NTooLarge,
)
from .sequences import parse_spec
from .series import RestrictedSeries, RootAnalysis

__all__ = [
    "DEFAULT_LIMIT",
    "DEFAULT_MEMORY_BUDGET",
    "BRUTE_FORCE_MAX_N",
    "CountTable",
    "CompositionStats",
    "build_count_table",
    "stats_at",
    "brute_force_count",
    "enumerate_compositions",
    "asymptotic_residual",
    "dump_count_table",
    "load_count_table",
    "estimate_table_bytes",
]

DEFAULT_LIMIT = 2000
DEFAULT_MEMORY_BUDGET = 256 * 2**20
BRUTE_FORCE_MAX_N = 30
TABLE_FORMAT_VERSION = 1
_TABLE_MAGIC = "# restricted-compositions count table"


@dataclass(frozen=True)
class CountTable:
    series: RestrictedSeries
    limit: int
    counts: tuple[int, ...]
    summand_totals: tuple[int, ...]
    ones_totals: tuple[int, ...]

    def __len__(self) -> int:
        return self.limit + 1


@dataclass(frozen=True)
class CompositionStats:
    n: int
    count: int
    mean_summands: Optional[float]
    ones_density: Optional[float]

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "count": str(self.count),
            "mean_summands": self.mean_summands,
            "ones_density": self.ones_density,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CompositionStats":
        return cls(int(data["n"]), int(data["count"]), data.get("mean_summands"), data.get("ones_density"))


def estimate_table_bytes(limit: int) -> int:
    """Upper estimate of the memory a table up to ``limit`` occupies.

    c(n) <= 2^n and w(n), u(n) <= n 2^n, so the three arrays hold at most
    about 3 n / 8 bytes per entry plus object overhead.
    """
    n = limit + 1
    payload = 3 * (n * (n + 1) // 2) // 8 + 3 * n * n.bit_length() // 8
    return payload + 3 * 32 * n


def build_count_table(
    series: RestrictedSeries,
    limit: int,
    *,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    resume: Optional[CountTable] = None,
) -> CountTable:
    """Fill c, w, u for 0..limit; ``resume`` continues a shorter table."""
    if limit < 0:
        raise ValueError(f"limit must be non-negative, got {limit}")
    needed = estimate_table_bytes(limit)
    if needed > memory_budget:
        raise LimitTooLarge(f"table up to {limit} needs about {needed} bytes, budget is {memory_budget}")
    parts = series.parts_up_to(limit)

    if resume is not None:
        if resume.series != series:
            raise MismatchedSeries(f"cannot resume a {resume.series.label} table as {series.label}")
        if resume.limit >= limit:
            return CountTable(
                series,
                limit,
                resume.counts[: limit + 1],
                resume.summand_totals[: limit + 1],
                resume.ones_totals[: limit + 1],
            )
        c = list(resume.counts)
        w = list(resume.summand_totals)
        u = list(resume.ones_totals)
    else:
        c, w, u = [1], [0], [0]

    has_one = bool(parts) and parts[0] == 1
    for n in range(len(c), limit + 1):
        cn = wn = un = 0
        for p in parts:
            if p > n:
                break
            prev = c[n - p]
            cn += prev
            wn += w[n - p] + prev
            un += u[n - p]
        if has_one:
            un += c[n - 1]
        c.append(cn)
        w.append(wn)
        u.append(un)
    return CountTable(series, limit, tuple(c), tuple(w), tuple(u))


def stats_at(table: CountTable, n: int) -> CompositionStats:
    """Count, mean number of summands and share of summands equal to 1 at n.

    At n = 0 only the empty composition exists; its statistics are reported
    as undefined (None).
    """
    if not 0 <= n <= table.limit:
        raise ValueError(f"n={n} outside table range 0..{table.limit}")
    count = table.counts[n]
    if count == 0:
        raise NoCompositions(f"{table.series.label}: no compositions of {n}")
    if n == 0:
        return CompositionStats(0, count, None, None)
    w = table.summand_totals[n]
    u = table.ones_totals[n]
    # int / int is correctly rounded for arbitrary-size operands
    return CompositionStats(n, count, w / count, u / w)


def enumerate_compositions(series: RestrictedSeries, n: int) -> Iterator[tuple[int, ...]]:
    """Yield every ordered tuple of parts summing to n (exponential!)."""
    parts = series.parts_up_to(n)
    prefix: list[int] = []

    def walk(remaining: int):
        if remaining == 0:
            yield tuple(prefix)
            return
        for p in parts:
            if p > remaining:
                break
            prefix.append(p)
            yield from walk(remaining - p)
            prefix.pop()

    yield from walk(n)


def brute_force_count(series: RestrictedSeries, n: int) -> int:
    """Count compositions of n by depth-first enumeration of part sequences.

    Independent of the table recurrence: every composition is reached as a
    distinct path; the final part of a path is recognised by membership of
    the remainder in the part set rather than by one more recursion level.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > BRUTE_FORCE_MAX_N:
        raise NTooLarge(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    if n == 0:
        return 1
    parts = series.parts_up_to(n)
    part_set = frozenset(parts)
    total = 0
    stack = [n]
    while stack:
        remaining = stack.pop()
        if remaining in part_set:
            total += 1
        for p in parts:
            if p >= remaining:
                break
            stack.append(remaining - p)
    return total


def asymptotic_residual(table: CountTable, analysis: RootAnalysis, n: int) -> float:
    """c(n) * gamma^(n+1) * S'(gamma) - 1; tends to 0 as n grows."""
    if analysis.series != table.series:
        raise MismatchedSeries(f"root of {analysis.series.label} does not match table of {table.series.label}")
    if not 0 <= n <= table.limit:
        raise ValueError(f"n={n} outside table range 0..{table.limit}")
    prec = max(analysis.precision, 128) + table.counts[n].bit_length()
    with gmpy2.context(precision=prec):
        value = mpz(table.counts[n]) * mpfr(analysis.gamma) ** (n + 1) * mpfr(analysis.derivative_at_root) - 1
        return float(value)


# --- persistence -------------------------------------------------------------


def dump_count_table(table: CountTable, fp: IO[str]) -> None:
    """Write the table as versioned text, one ``n c w u`` record per line."""
    fp.write(f"{_TABLE_MAGIC}\n")
    fp.write(f"version {TABLE_FORMAT_VERSION}\n")
    fp.write(f"spec {table.series.spec.label}\n")
    fp.write(f"cut-index {table.series.cut_index}\n")
    fp.write(f"limit {table.limit}\n")
    for n in range(table.limit + 1):
        fp.write(f"{n} {table.counts[n]} {table.summand_totals[n]} {table.ones_totals[n]}\n")


class TableFormatError(CompositionsError, ValueError):
    code = "TABLE_FORMAT"


def load_count_table(source: Union[IO[str], str]) -> CountTable:
    """Read a table written by :func:`dump_count_table`.

    The first record and the last few are re-derived from the recurrences
    before the table is accepted.
    """
    fp = io.StringIO(source) if isinstance(source, str) else source
    lines = [line.rstrip("\n") for line in fp]
    if not lines or lines[0] != _TABLE_MAGIC:
        raise TableFormatError("missing count-table header")
    header = {}
    for line in lines[1:5]:
        key, _, value = line.partition(" ")
        header[key] = value
    if header.get("version") != str(TABLE_FORMAT_VERSION):
        raise TableFormatError(f"unsupported table version {header.get('version')!r}")
    series = RestrictedSeries(parse_spec(header["spec"]), int(header["cut-index"]))
    limit = int(header["limit"])
    records = lines[5:]
    if len(records) != limit + 1:
        raise TableFormatError(f"expected {limit + 1} records, found {len(records)}")
    c, w, u = [], [], []
    for expected_n, line in enumerate(records):
        fields = line.split()
        if len(fields) != 4 or int(fields[0]) != expected_n:
            raise TableFormatError(f"bad record for n={expected_n}: {line!r}")
        c.append(int(fields[1]))
        w.append(int(fields[2]))
        u.append(int(fields[3]))
    _spot_check(series, c, w, u)
    return CountTable(series, limit, tuple(c), tuple(w), tuple(u))


def _spot_check(series: RestrictedSeries, c: list, w: list, u: list, tail: int = 16) -> None:
    limit = len(c) - 1
    if (c[0], w[0], u[0]) != (1, 0, 0):
        raise TableFormatError("record n=0 must be '0 1 0 0'")
    parts = series.parts_up_to(limit)
    for n in range(max(1, limit - tail + 1), limit + 1):
        usable = [p for p in parts if p <= n]
        cn = sum(c[n - p] for p in usable)
        wn = sum(w[n - p] + c[n - p] for p in usable)
        un = sum(u[n - p] for p in usable) + (c[n - 1] if 1 in usable else 0)
        if (cn, wn, un) != (c[n], w[n], u[n]):
            raise TableFormatError(f"record n={n} does not satisfy the composition recurrences")
