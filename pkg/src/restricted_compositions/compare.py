"""Ratio limits of composition counts between two part sequences.

If c_A(n) ~ K_A gamma_A^{-n} and c_B(n) ~ K_B gamma_B^{-n}, the ratio
c_A(n)/c_B(n) behaves like (gamma_B/gamma_A)^n: it vanishes, stays bounded
away from 0 and infinity, or diverges according to whether gamma_B/gamma_A is
below, equal to, or above 1.  Equality is decided exactly (identical exponent
sequences), never from floating-point roots.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Optional, Sequence

import gmpy2
from gmpy2 import mpfr

from .errors import (
    InadmissibleIndex,
    Indeterminate,
    InvalidSpec,
    MismatchedSeries,
    PrecisionExhausted,
    VerdictMismatch,
)
from .sequences import Kind, SequenceSpec, fibonacci
from .series import (
    DEFAULT_PRECISION_CAP,
    DEFAULT_TOL,
    RestrictedSeries,
    RootAnalysis,
    exponents_identical,
    find_root,
    root_sequence,
)

__all__ = [
    "Verdict",
    "RatioClassification",
    "TableRow",
    "classify_ratio",
    "classify_ratio_adaptive",
    "classify_plrs_vs_fibonacci",
    "build_table_fibonacci",
    "build_table_polynomial",
    "round7",
    "REFERENCE_FIBONACCI_TABLE",
    "REFERENCE_POLYNOMIAL_TABLE",
    "REFERENCE_TOLERANCE",
]

# Published reference values, copied as printed (7 decimals).
# m -> (alpha_m, 1/(alpha_m r_m'(alpha_m)))
REFERENCE_FIBONACCI_TABLE: dict[int, tuple[str, str]] = {
    2: ("0.5276126", "0.5615856"),
    3: ("0.6855205", "0.3167463"),
    4: ("0.7889604", "0.2018247"),
    5: ("0.8645115", "0.1232169"),
    6: ("0.9137569", "0.0765024"),
    7: ("0.9458315", "0.0471977"),
    8: ("0.9661554", "0.0291894"),
    9: ("0.9789482", "0.0180354"),
    10: ("0.9869358", "0.0111476"),
    11: ("0.9919058", "0.0068893"),
    12: ("0.9949897", "0.0042579"),
    13: ("0.9969005", "0.0026315"),
    14: ("0.9980833", "0.0016264"),
    15: ("0.9988150", "0.0010051"),
    16: ("0.9992674", "0.0006212"),
    17: ("0.9995472", "0.0003839"),
    18: ("0.9997201", "0.0002373"),
    19: ("0.9998270", "0.0001466"),
    20: ("0.9998931", "0.0000906"),
}

# (degree of the monomial k^d, m) -> (alpha_m, gamma_P, alpha_m / gamma_P)
REFERENCE_POLYNOMIAL_TABLE: dict[tuple[int, int], tuple[str, str, str]] = {
    (4, 4): ("0.9137569", "0.9839813", "0.9286324"),
    (4, 13): ("0.9988150", "0.9997143", "0.9991004"),
    (4, 22): ("0.9999844", "0.9999571", "1.0000273"),
    (4, 31): ("0.9999998", "0.9999878", "1.0000120"),
    (6, 15): ("0.9995472", "0.9999988", "0.9995484"),
    (6, 31): ("0.9999998", "1.0000000", "0.9999998"),
    (6, 55): ("1.0000000", "1.0000000", "1.0000000"),
    (9, 31): ("0.9999998", "1.0000000", "1.0000000"),
    (9, 55): ("1.0000000", "1.0000000", "1.0000000"),
    (9, 75): ("1.0000000", "1.0000000", "1.0000000"),
}

REFERENCE_TOLERANCE = 1e-6

_DOMINATION_WINDOW = 200


class Verdict(enum.Enum):
    ZERO = "ZERO"
    FINITE_POSITIVE = "FINITE_POSITIVE"
    INFINITE = "INFINITE"


@dataclass(frozen=True)
class RatioClassification:
    """Limit of c_num(n) / c_den(n) as n grows.

    ``root_ratio`` is gamma_den / gamma_num; ``certified_margin`` is the
    distance from 1 of the certified enclosure of that ratio (0 when the
    verdict is structural).
    """

    numerator: RestrictedSeries
    denominator: RestrictedSeries
    verdict: Verdict
    root_ratio: mpfr
    certified_margin: float
    method: str = "numerical"
    numerator_root: Optional[RootAnalysis] = field(default=None, compare=False, repr=False)
    denominator_root: Optional[RootAnalysis] = field(default=None, compare=False, repr=False)

    def as_dict(self) -> dict:
        return {
            "numerator": self.numerator.spec.label,
            "denominator": self.denominator.spec.label,
            "m": self.numerator.cut_index,
            "verdict": self.verdict.value,
            "root_ratio": float(self.root_ratio),
            "certified_margin": self.certified_margin,
            "method": self.method,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RatioClassification":
        from .sequences import parse_spec

        m = int(data["m"])
        return cls(
            numerator=RestrictedSeries(parse_spec(data["numerator"]), m),
            denominator=RestrictedSeries(parse_spec(data["denominator"]), m),
            verdict=Verdict(data["verdict"]),
            root_ratio=mpfr(data["root_ratio"]),
            certified_margin=float(data["certified_margin"]),
            method=data.get("method", "numerical"),
        )


def _ratio_enclosure(num: RootAnalysis, den: RootAnalysis) -> tuple[mpfr, mpfr, mpfr]:
    prec = max(num.precision, den.precision, 128)
    down = gmpy2.context(precision=prec, round=gmpy2.RoundDown)
    up = gmpy2.context(precision=prec, round=gmpy2.RoundUp)
    low = down.div(down.sub(den.gamma, den.gamma_error), up.add(num.gamma, num.gamma_error))
    high = up.div(up.add(den.gamma, den.gamma_error), down.sub(num.gamma, num.gamma_error))
    with gmpy2.context(precision=prec):
        mid = den.gamma / num.gamma
    return low, high, mid


def classify_ratio(
    num: RestrictedSeries,
    den: RestrictedSeries,
    abs_tol: float = DEFAULT_TOL,
    *,
    precision_cap: int = DEFAULT_PRECISION_CAP,
) -> RatioClassification:
    """Classify lim c_num(n)/c_den(n) from the ordering of the two roots.

    Raises :class:`Indeterminate` when the certified root enclosures overlap
    while the exponent sequences differ.
    """
    if num.cut_index != den.cut_index:
        raise MismatchedSeries(f"cut indices differ: {num.cut_index} vs {den.cut_index}")
    if exponents_identical(num, den):
        return RatioClassification(num, den, Verdict.FINITE_POSITIVE, mpfr(1), 0.0, method="structural")
    num_root = find_root(num, abs_tol, precision_cap=precision_cap)
    den_root = find_root(den, abs_tol, precision_cap=precision_cap)
    low, high, mid = _ratio_enclosure(num_root, den_root)
    if low > 1:
        verdict, margin = Verdict.INFINITE, float(low - 1)
    elif high < 1:
        verdict, margin = Verdict.ZERO, float(1 - high)
    else:
        raise Indeterminate(
            f"roots of {num.label} and {den.label} are not separated at abs_tol={abs_tol:g}"
        )
    return RatioClassification(num, den, verdict, mid, margin, "numerical", num_root, den_root)


def classify_ratio_adaptive(
    num: RestrictedSeries,
    den: RestrictedSeries,
    abs_tol: float = DEFAULT_TOL,
    *,
    precision_cap: int = DEFAULT_PRECISION_CAP,
    shrink: float = 1e-4,
) -> RatioClassification:
    """:func:`classify_ratio`, retried at tighter tolerances until the cap."""
    tol = abs_tol
    while True:
        try:
            return classify_ratio(num, den, tol, precision_cap=precision_cap)
        except Indeterminate:
            tol *= shrink
            if tol < 2.0 ** (-(precision_cap - 40)):
                raise
        except PrecisionExhausted as exc:
            raise Indeterminate(f"{num.label} vs {den.label}: {exc}") from exc


def _structural_verdict(spec: SequenceSpec) -> Verdict:
    if spec.kind is Kind.FIBONACCI:
        return Verdict.FINITE_POSITIVE
    # every other admissible PLRS grows at least as fast as Fibonacci
    return Verdict.ZERO


def classify_plrs_vs_fibonacci(
    spec: SequenceSpec,
    m: int,
    abs_tol: float = DEFAULT_TOL,
    *,
    precision_cap: int = DEFAULT_PRECISION_CAP,
) -> RatioClassification:
    """Limit of c_H(n)/c_F(n) for a PLRS H against Fibonacci at cut index m.

    Depth 1 with c_1 >= 2, depth 2 other than (1, 1), and depth >= 3 all
    dominate Fibonacci termwise, so the verdict is ZERO; the unit depth-2
    recurrence is Fibonacci itself (FINITE_POSITIVE).  The termwise
    domination H_k >= F_k is checked on a window past m; if it fails (this
    happens for interior zero coefficients, e.g. c = [1, 0, 1]) the case
    analysis does not apply and the numerical verdict is returned with
    ``method="numerical"``.  Structural verdicts are cross-checked against
    the certified root comparison.
    """
    if spec.kind not in (Kind.PLRS, Kind.FIBONACCI):
        raise InvalidSpec(f"expected a PLRS, got {spec.label}")
    if m < 2:
        raise InadmissibleIndex(f"cut index must be >= 2, got {m}")
    h_series = RestrictedSeries(spec, m)
    f_series = RestrictedSeries(SequenceSpec.fibonacci(), m)
    numeric = classify_ratio_adaptive(h_series, f_series, abs_tol, precision_cap=precision_cap)

    pairs = list(zip(itertools.islice(h_series.exponents(), _DOMINATION_WINDOW),
                     itertools.islice(f_series.exponents(), _DOMINATION_WINDOW)))
    dominated = all(h >= f for h, f in pairs)
    if spec.kind is not Kind.FIBONACCI and not (dominated and any(h > f for h, f in pairs)):
        return numeric

    structural = _structural_verdict(spec)
    if structural is not numeric.verdict:
        raise VerdictMismatch(
            f"{spec.label} at m={m}: structural {structural.value} vs numerical {numeric.verdict.value}"
        )
    return RatioClassification(
        h_series,
        f_series,
        structural,
        numeric.root_ratio,
        numeric.certified_margin,
        "structural",
        numeric.numerator_root,
        numeric.denominator_root,
    )


# --- tables ------------------------------------------------------------------


def round7(value) -> str:
    """Fixed 7-decimal rendering, round-half-even on the exact binary value."""
    if isinstance(value, mpfr):
        text = gmpy2.digits(value, 10)
        mantissa, exponent, _ = text
        negative = mantissa.startswith("-")
        digits = mantissa.lstrip("-")
        dec = Decimal(f"{'-' if negative else ''}0.{digits}e{exponent}")
    else:
        dec = Decimal(value)
    return str(dec.quantize(Decimal("1e-7"), rounding=ROUND_HALF_EVEN))


@dataclass(frozen=True)
class TableRow:
    m: int
    sequence_label: str
    gamma: mpfr
    companion_gamma: Optional[mpfr]
    derived_column: mpfr
    gamma_error: mpfr
    smallest_part: Optional[int] = None
    companion_error: Optional[mpfr] = None
    reference: Optional[tuple[str, ...]] = None
    discrepancy: Optional[tuple[bool, ...]] = None
    reference_alpha_shift: Optional[int] = None

    @property
    def flagged(self) -> bool:
        return bool(self.discrepancy) and any(self.discrepancy)

    def values(self) -> tuple:
        if self.companion_gamma is None:
            return (self.gamma, self.derived_column)
        return (self.gamma, self.companion_gamma, self.derived_column)

    def as_dict(self) -> dict:
        out = {
            "m": self.m,
            "sequence_label": self.sequence_label,
            "smallest_part": self.smallest_part,
            "gamma": float(self.gamma),
            "companion_gamma": None if self.companion_gamma is None else float(self.companion_gamma),
            "derived_column": float(self.derived_column),
            "gamma_error": float(self.gamma_error),
        }
        if self.reference is not None:
            out["reference"] = list(self.reference)
            out["discrepancy"] = list(self.discrepancy)
        if self.reference_alpha_shift is not None:
            out["reference_alpha_shift"] = self.reference_alpha_shift
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TableRow":
        companion = data.get("companion_gamma")
        reference = data.get("reference")
        discrepancy = data.get("discrepancy")
        return cls(
            m=int(data["m"]),
            sequence_label=data["sequence_label"],
            gamma=mpfr(data["gamma"]),
            companion_gamma=None if companion is None else mpfr(companion),
            derived_column=mpfr(data["derived_column"]),
            gamma_error=mpfr(data["gamma_error"]),
            smallest_part=data.get("smallest_part"),
            reference=None if reference is None else tuple(reference),
            discrepancy=None if discrepancy is None else tuple(discrepancy),
            reference_alpha_shift=data.get("reference_alpha_shift"),
        )


def _deviates(value, reference: str) -> bool:
    return abs(float(value) - float(reference)) > REFERENCE_TOLERANCE


def build_table_fibonacci(
    m_from: int,
    m_to: int,
    abs_tol: float = DEFAULT_TOL,
    *,
    precision_cap: int = DEFAULT_PRECISION_CAP,
    workers: int = 1,
) -> list[TableRow]:
    """alpha_m and the mean-summand slope for m_from <= m <= m_to."""
    if not 2 <= m_from <= m_to:
        raise InadmissibleIndex(f"need 2 <= m_from <= m_to, got {m_from}..{m_to}")
    roots = root_sequence(
        SequenceSpec.fibonacci(), m_from, m_to, abs_tol, precision_cap=precision_cap, workers=workers
    )
    rows = []
    for r in roots:
        m = r.series.cut_index
        ref = REFERENCE_FIBONACCI_TABLE.get(m)
        disc = None
        if ref is not None:
            disc = (_deviates(r.gamma, ref[0]), _deviates(r.mean_slope, ref[1]))
        rows.append(
            TableRow(
                m=m,
                sequence_label="fib",
                gamma=r.gamma,
                companion_gamma=None,
                derived_column=r.mean_slope,
                gamma_error=r.gamma_error,
                smallest_part=fibonacci(m),
                reference=ref,
                discrepancy=disc,
            )
        )
    return rows


def _alpha_shift(m: int, reference_alpha: str, abs_tol: float, precision_cap: int) -> Optional[int]:
    """Offset s (|s| <= 3) with round7(alpha_{m+s}) equal to the reference value."""
    fib = SequenceSpec.fibonacci()
    for s in (0, 1, -1, 2, -2, 3, -3):
        if m + s < 2:
            continue
        alpha = find_root(RestrictedSeries(fib, m + s), abs_tol, precision_cap=precision_cap).gamma
        if round7(alpha) == reference_alpha:
            return s
    return None


def build_table_polynomial(
    poly: SequenceSpec,
    m_values: Sequence[int],
    abs_tol: float = DEFAULT_TOL,
    *,
    precision_cap: int = DEFAULT_PRECISION_CAP,
) -> list[TableRow]:
    """alpha_m, gamma_P(m) and alpha_m / gamma_P(m) for each requested m.

    Rows with a published reference carry it alongside per-column
    discrepancy flags, plus the Fibonacci index offset (if any) under which
    the published alpha column is reproduced.
    """
    if poly.kind is not Kind.POLYNOMIAL:
        raise InvalidSpec(f"expected a polynomial spec, got {poly.label}")
    fib = SequenceSpec.fibonacci()
    monomial_degree = poly.degree if poly.pretty.startswith("k^") else None
    rows = []
    for m in m_values:
        alpha = find_root(RestrictedSeries(fib, m), abs_tol, precision_cap=precision_cap)
        gamma_p = find_root(RestrictedSeries(poly, m), abs_tol, precision_cap=precision_cap)
        with gmpy2.context(precision=max(alpha.precision, gamma_p.precision)):
            ratio = alpha.gamma / gamma_p.gamma
        ref = REFERENCE_POLYNOMIAL_TABLE.get((monomial_degree, m)) if monomial_degree else None
        disc = shift = None
        if ref is not None:
            disc = tuple(_deviates(v, r) for v, r in zip((alpha.gamma, gamma_p.gamma, ratio), ref))
            if disc[0]:
                shift = _alpha_shift(m, ref[0], abs_tol, precision_cap)
        rows.append(
            TableRow(
                m=m,
                sequence_label=poly.pretty,
                gamma=alpha.gamma,
                companion_gamma=gamma_p.gamma,
                derived_column=ratio,
                gamma_error=alpha.gamma_error,
                companion_error=gamma_p.gamma_error,
                reference=ref,
                discrepancy=disc,
                reference_alpha_shift=shift,
            )
        )
    return rows
