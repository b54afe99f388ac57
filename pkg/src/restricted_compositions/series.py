"""Certified evaluation of S_m(x) = sum_{i>=m} x^{H_i} and its root S_m(x) = 1.

All enclosures are computed with MPFR under directed rounding: lower bounds
round toward -inf, upper bounds toward +inf, and the omitted tail is bounded
by the geometric majorant over all integer exponents past the last one summed.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional, Union

import gmpy2
from gmpy2 import mpfr, mpz

from .errors import (
    InadmissibleIndex,
    PrecisionExhausted,
    TailNotConverged,
    XOutOfRange,
)
from .sequences import Kind, SequenceSpec, min_admissible_index, recurrence_order

__all__ = [
    "DEFAULT_PRECISION",
    "DEFAULT_PRECISION_CAP",
    "DEFAULT_TOL",
    "MAX_TERMS",
    "RestrictedSeries",
    "CertifiedValue",
    "RootAnalysis",
    "evaluate_series",
    "evaluate_series_derivative",
    "find_root",
    "root_sequence",
    "exponents_identical",
]

DEFAULT_PRECISION = 96
DEFAULT_PRECISION_CAP = 512
DEFAULT_TOL = 1e-9
MAX_TERMS = 10**6

# x^{H+1}/(1-x) tail tolerance used while certifying signs, relative to abs_tol
_SIGN_TAIL_FACTOR = 1e-4
_NEWTON_WINDOW = 1e-3

Real = Union[float, int, str, "mpfr"]


@dataclass(frozen=True)
class RestrictedSeries:
    """A part sequence with its first ``cut_index - 1`` terms forbidden."""

    spec: SequenceSpec
    cut_index: int

    def __post_init__(self):
        first = min_admissible_index(self.spec)
        if self.cut_index < first:
            raise InadmissibleIndex(
                f"cut index {self.cut_index} is below {first}, the first admissible index of {self.spec.label}"
            )

    def exponents(self) -> Iterator[int]:
        return self.spec.terms(self.cut_index)

    def parts_up_to(self, n: int) -> list[int]:
        return list(itertools.takewhile(lambda h: h <= n, self.exponents()))

    @property
    def smallest_part(self) -> int:
        return next(self.exponents())

    @property
    def label(self) -> str:
        return f"{self.spec.label}@{self.cut_index}"


def exponents_identical(a: RestrictedSeries, b: RestrictedSeries) -> bool:
    """Exact test that the two exponent sequences coincide term by term.

    Both sequences satisfy homogeneous linear recurrences (orders r_a, r_b),
    so their difference satisfies one of order r_a + r_b; agreement on that
    many consecutive terms therefore forces agreement everywhere.
    """
    if a.spec == b.spec and a.cut_index == b.cut_index:
        return True
    window = recurrence_order(a.spec) + recurrence_order(b.spec)
    return list(itertools.islice(a.exponents(), window)) == list(itertools.islice(b.exponents(), window))


@dataclass(frozen=True)
class CertifiedValue:
    lower: mpfr
    upper: mpfr

    @property
    def _precision(self) -> int:
        return max(self.lower.precision, self.upper.precision) + 1

    @property
    def midpoint(self) -> mpfr:
        with gmpy2.context(precision=self._precision):
            return (self.lower + self.upper) / 2

    @property
    def width(self) -> mpfr:
        with gmpy2.context(precision=self._precision, round=gmpy2.RoundUp):
            return self.upper - self.lower

    def __contains__(self, value) -> bool:
        return self.lower <= value <= self.upper

    def compare(self, value) -> int:
        """+1 if the whole enclosure exceeds ``value``, -1 if below, 0 if undecided."""
        if self.lower > value:
            return 1
        if self.upper < value:
            return -1
        return 0

    def __float__(self) -> float:
        return float(self.midpoint)


@dataclass(frozen=True)
class RootAnalysis:
    series: RestrictedSeries
    gamma: mpfr
    gamma_error: mpfr
    derivative_at_root: mpfr
    count_constant: mpfr
    mean_slope: mpfr
    precision: int

    @property
    def lower(self) -> mpfr:
        return self.gamma - self.gamma_error

    @property
    def upper(self) -> mpfr:
        return self.gamma + self.gamma_error

    def as_dict(self) -> dict:
        return {
            "sequence": self.series.spec.label,
            "m": self.series.cut_index,
            "gamma": float(self.gamma),
            "gamma_error": float(self.gamma_error),
            "derivative_at_root": float(self.derivative_at_root),
            "count_constant": float(self.count_constant),
            "mean_slope": float(self.mean_slope),
            "precision": self.precision,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RootAnalysis":
        from .sequences import parse_spec

        prec = int(data.get("precision", 53))
        with gmpy2.context(precision=prec):
            return cls(
                series=RestrictedSeries(parse_spec(data["sequence"]), int(data["m"])),
                gamma=mpfr(data["gamma"]),
                gamma_error=mpfr(data["gamma_error"]),
                derivative_at_root=mpfr(data["derivative_at_root"]),
                count_constant=mpfr(data["count_constant"]),
                mean_slope=mpfr(data["mean_slope"]),
                precision=prec,
            )


def _contexts(precision: int):
    down = gmpy2.context(precision=precision, round=gmpy2.RoundDown)
    up = gmpy2.context(precision=precision, round=gmpy2.RoundUp)
    return down, up


def _to_point(x: Real, precision: int) -> mpfr:
    with gmpy2.context(precision=precision):
        return mpfr(x)


def _check_x(x: mpfr) -> None:
    if not (0 < x < 1):
        raise XOutOfRange(f"x must lie in (0, 1), got {x}")


def _enclose(series: RestrictedSeries, x: mpfr, abs_tol, precision: int, derivative: bool) -> CertifiedValue:
    down, up = _contexts(precision)
    log_lo = down.log(x)
    log_hi = up.log(x)
    one_minus_lo = down.sub(1, x)
    tol = mpfr(abs_tol)
    lo_sum = mpfr(0)
    hi_sum = mpfr(0)
    tail = None
    for count, h in enumerate(series.exponents(), start=1):
        if count > MAX_TERMS:
            raise TailNotConverged(
                f"{series.label}: tail still above {abs_tol} after {MAX_TERMS} terms at x={x}"
            )
        h = mpz(h)
        if derivative:
            # h * x^(h-1)
            t_lo = down.mul(h, down.exp(down.mul(h - 1, log_lo)))
            t_hi = up.mul(h, up.exp(up.mul(h - 1, log_hi)))
        else:
            t_lo = down.exp(down.mul(h, log_lo))
            t_hi = up.exp(up.mul(h, log_hi))
        lo_sum = down.add(lo_sum, t_lo)
        hi_sum = up.add(hi_sum, t_hi)
        # remaining exponents are distinct integers >= n = h + 1
        n = h + 1
        x_pow = up.exp(up.mul(n, log_hi))  # x^n
        if derivative:
            # sum_{k>=n} k x^(k-1) = n x^(n-1)/(1-x) + x^n/(1-x)^2
            x_pow_prev = up.exp(up.mul(n - 1, log_hi))
            tail = up.add(
                up.div(up.mul(n, x_pow_prev), one_minus_lo),
                up.div(x_pow, up.mul(one_minus_lo, one_minus_lo)),
            )
        else:
            tail = up.div(x_pow, one_minus_lo)
        if tail <= tol:
            break
    return CertifiedValue(lo_sum, up.add(hi_sum, tail))


def evaluate_series(
    series: RestrictedSeries, x: Real, abs_tol: float = DEFAULT_TOL, *, precision: int = DEFAULT_PRECISION
) -> CertifiedValue:
    """Enclosure of S_m(x) whose width is at most abs_tol plus rounding."""
    if abs_tol <= 0:
        raise ValueError("abs_tol must be positive")
    xp = _to_point(x, precision)
    _check_x(xp)
    return _enclose(series, xp, abs_tol, precision, derivative=False)


def evaluate_series_derivative(
    series: RestrictedSeries, x: Real, abs_tol: float = DEFAULT_TOL, *, precision: int = DEFAULT_PRECISION
) -> CertifiedValue:
    """Enclosure of S_m'(x) = sum_{i>=m} H_i x^(H_i - 1)."""
    if abs_tol <= 0:
        raise ValueError("abs_tol must be positive")
    xp = _to_point(x, precision)
    _check_x(xp)
    return _enclose(series, xp, abs_tol, precision, derivative=True)


class _SignOracle:
    """Certified sign of S(x) - 1, escalating tail tolerance and precision."""

    def __init__(self, series: RestrictedSeries, abs_tol: float, precision: int, cap: int):
        self.series = series
        self.base_tail = abs_tol * _SIGN_TAIL_FACTOR
        self.precision = precision
        self.cap = cap

    def __call__(self, x: mpfr) -> int:
        if x <= 0:
            return -1
        if x >= 1:
            return 1
        tail = self.base_tail
        prec = self.precision
        while True:
            value = _enclose(self.series, x, tail, prec, derivative=False)
            sign = value.compare(1)
            if sign:
                return sign
            floor = 2.0 ** (-(prec - 8))
            if tail > floor:
                tail = max(tail * 1e-8, floor)
            elif prec < self.cap:
                prec = min(2 * prec, self.cap)
                self.precision = max(self.precision, prec)
            else:
                return 0


def find_root(
    series: RestrictedSeries,
    abs_tol: float = DEFAULT_TOL,
    *,
    precision: int = DEFAULT_PRECISION,
    precision_cap: int = DEFAULT_PRECISION_CAP,
) -> RootAnalysis:
    """Certified root of S_m(x) = 1 in (0, 1) plus the asymptotic constants.

    Bisection on certified signs narrows the bracket; once it is small,
    Newton predictions are tested by probing both sides of the predicted
    root.  The final bracket [gamma - err, gamma + err] has certified signs
    at both ends, so the true root lies inside it.
    """
    if abs_tol <= 0:
        raise ValueError("abs_tol must be positive")
    if abs_tol < 2.0 ** (-(precision_cap - 16)):
        raise PrecisionExhausted(f"abs_tol {abs_tol} is below what {precision_cap} bits can certify")
    # enough bits to represent bracket endpoints to well below abs_tol
    precision = max(precision, math.ceil(-math.log2(abs_tol)) + 24)
    if precision > precision_cap:
        raise PrecisionExhausted(f"abs_tol {abs_tol} needs more than {precision_cap} bits")
    sign = _SignOracle(series, abs_tol, precision, precision_cap)

    with gmpy2.context(precision=precision_cap):
        lo, hi = mpfr(0), mpfr(1)
        target = mpfr(2 * abs_tol)
        guess: Optional[mpfr] = None
        while hi - lo > target:
            width = hi - lo
            if width < _NEWTON_WINDOW:
                lo, hi, guess = _newton_probe(series, sign, lo, hi, guess, abs_tol)
                if hi - lo <= target or hi - lo < width / 2:
                    continue
            mid = (lo + hi) / 2
            s = sign(mid)
            if s == 0:
                # mid may be the root itself; step off it by half the tolerance
                lo, hi = _straddle(series, sign, lo, hi, mid, mpfr(abs_tol) / 2, precision_cap)
                continue
            if s > 0:
                hi = mid
            else:
                lo = mid

        gamma = (lo + hi) / 2
        err = (hi - lo) / 2
        # re-certify the final claim at gamma -/+ abs_tol
        if sign(gamma - mpfr(abs_tol)) > 0 or sign(gamma + mpfr(abs_tol)) < 0:
            raise PrecisionExhausted(f"{series.label}: final bracket failed re-certification")

    work = sign.precision
    deriv = evaluate_series_derivative(series, gamma, abs_tol * _SIGN_TAIL_FACTOR, precision=work).midpoint
    with gmpy2.context(precision=work):
        count_constant = 1 / deriv
        mean_slope = count_constant / gamma
    return RootAnalysis(
        series=series,
        gamma=gamma,
        gamma_error=err,
        derivative_at_root=deriv,
        count_constant=count_constant,
        mean_slope=mean_slope,
        precision=work,
    )


def _straddle(series, sign, lo, hi, mid, delta, precision_cap):
    left, right = sign(mid - delta), sign(mid + delta)
    if left < 0 < right:
        return mid - delta, mid + delta
    if left > 0:
        return lo, mid - delta
    if right < 0:
        return mid + delta, hi
    raise PrecisionExhausted(
        f"{series.label}: sign of S(x) - 1 undecidable near x={mid} with {precision_cap} bits"
    )


def _newton_probe(series, sign, lo, hi, guess, abs_tol):
    """One safeguarded Newton step that shrinks [lo, hi] when its probes certify."""
    x0 = guess if guess is not None and lo < guess < hi else (lo + hi) / 2
    prec = sign.precision
    s = evaluate_series(series, x0, abs_tol * _SIGN_TAIL_FACTOR, precision=prec).midpoint
    d = evaluate_series_derivative(series, x0, abs_tol * _SIGN_TAIL_FACTOR, precision=prec).midpoint
    candidate = x0 - (s - 1) / d
    if not (lo < candidate < hi):
        return lo, hi, None
    delta = mpfr(abs_tol) * mpfr("0.49")
    left, right = candidate - delta, candidate + delta
    if left > lo and sign(left) < 0:
        lo = left
    if right < hi and sign(right) > 0:
        hi = right
    return lo, hi, candidate


def _root_task(args):
    spec, m, abs_tol, precision, cap = args
    return find_root(RestrictedSeries(spec, m), abs_tol, precision=precision, precision_cap=cap)


def root_sequence(
    spec: SequenceSpec,
    m_from: int,
    m_to: int,
    abs_tol: float = DEFAULT_TOL,
    *,
    precision: int = DEFAULT_PRECISION,
    precision_cap: int = DEFAULT_PRECISION_CAP,
    workers: int = 1,
) -> list[RootAnalysis]:
    """Roots for every cut index in [m_from, m_to], ordered by m.

    Consecutive roots must be certifiably increasing; an overlapping pair is
    recomputed at a tighter tolerance before giving up.
    """
    if m_from > m_to:
        raise ValueError(f"empty range {m_from}..{m_to}")
    first = min_admissible_index(spec)
    if m_from < first:
        raise InadmissibleIndex(f"cut index {m_from} is below {first} for {spec.label}")
    jobs = [(spec, m, abs_tol, precision, precision_cap) for m in range(m_from, m_to + 1)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            roots = list(pool.map(_root_task, jobs))
    else:
        roots = [_root_task(job) for job in jobs]

    for i in range(1, len(roots)):
        prev, cur = roots[i - 1], roots[i]
        tol = abs_tol
        while not cur.lower > prev.upper:
            tol /= 1000
            prev = find_root(prev.series, tol, precision=precision, precision_cap=precision_cap)
            cur = find_root(cur.series, tol, precision=precision, precision_cap=precision_cap)
            if cur.upper < prev.lower:
                raise AssertionError(f"roots decrease between m={prev.series.cut_index} and {cur.series.cut_index}")
        roots[i - 1], roots[i] = prev, cur
    return roots
