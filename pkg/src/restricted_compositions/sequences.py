"""Part sequences: Fibonacci, positive linear recurrences and integer polynomials.

Terms are exact Python integers.  Indexing is 1-based throughout:

* Fibonacci: ``F_1 = F_2 = 1``, ``F_k = F_{k-1} + F_{k-2}``.
* PLRS with coefficients ``c_1..c_L``: ``H_1 = 1``; for ``1 <= n < L``,
  ``H_{n+1} = c_1 H_n + ... + c_n H_1 + 1``; afterwards the plain recurrence
  ``H_{n+1} = c_1 H_n + ... + c_L H_{n+1-L}``.
* Polynomial with degree-descending coefficients ``a_s..a_0``: ``P(k)``.

The depth-2 recurrence with unit coefficients is the Fibonacci sequence.
``SequenceSpec`` stores it as ``FIBONACCI`` so that ``plrs:1,1`` and ``fib``
name the same part sequence under the Fibonacci indexing.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .errors import InvalidSpec, NonIncreasingWindow, SpecParseError

__all__ = [
    "Kind",
    "SequenceSpec",
    "SequenceWindow",
    "parse_spec",
    "generate_terms",
    "min_admissible_index",
    "outpacing_index",
    "certified_fibonacci_threshold",
    "ratio_certificate_index",
    "fibonacci",
    "recurrence_order",
]


class Kind(enum.Enum):
    FIBONACCI = "fib"
    PLRS = "plrs"
    POLYNOMIAL = "poly"


@dataclass(frozen=True)
class SequenceSpec:
    kind: Kind
    plrs_coeffs: tuple[int, ...] = ()
    poly_coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "plrs_coeffs", tuple(int(c) for c in self.plrs_coeffs))
        object.__setattr__(self, "poly_coeffs", tuple(int(a) for a in self.poly_coeffs))
        if self.kind is Kind.FIBONACCI:
            if self.plrs_coeffs or self.poly_coeffs:
                raise InvalidSpec("Fibonacci spec takes no coefficients")
        elif self.kind is Kind.PLRS:
            c = self.plrs_coeffs
            if self.poly_coeffs:
                raise InvalidSpec("PLRS spec takes no polynomial coefficients")
            if not c:
                raise InvalidSpec("PLRS needs depth L >= 1")
            if any(ci < 0 for ci in c):
                raise InvalidSpec(f"PLRS coefficients must be non-negative, got {list(c)}")
            if c[0] <= 0 or c[-1] <= 0:
                raise InvalidSpec(f"PLRS needs c_1 > 0 and c_L > 0, got {list(c)}")
            if c == (1,):
                raise InvalidSpec("the constant PLRS c=[1] is not strictly increasing")
            if c == (1, 1):
                object.__setattr__(self, "kind", Kind.FIBONACCI)
                object.__setattr__(self, "plrs_coeffs", ())
        elif self.kind is Kind.POLYNOMIAL:
            a = self.poly_coeffs
            if self.plrs_coeffs:
                raise InvalidSpec("polynomial spec takes no PLRS coefficients")
            if len(a) < 2:
                raise InvalidSpec("polynomial must have degree >= 1")
            if a[0] <= 0:
                raise InvalidSpec(f"leading coefficient must be positive, got {a[0]}")
        else:  # pragma: no cover
            raise InvalidSpec(f"unknown kind {self.kind!r}")

    @classmethod
    def fibonacci(cls) -> "SequenceSpec":
        return cls(Kind.FIBONACCI)

    @classmethod
    def plrs(cls, coeffs: Sequence[int]) -> "SequenceSpec":
        return cls(Kind.PLRS, plrs_coeffs=tuple(coeffs))

    @classmethod
    def polynomial(cls, coeffs: Sequence[int]) -> "SequenceSpec":
        return cls(Kind.POLYNOMIAL, poly_coeffs=tuple(coeffs))

    @classmethod
    def monomial(cls, degree: int) -> "SequenceSpec":
        return cls.polynomial((1,) + (0,) * degree)

    @property
    def depth(self) -> int:
        """Recurrence depth L (2 for Fibonacci)."""
        if self.kind is Kind.FIBONACCI:
            return 2
        if self.kind is Kind.PLRS:
            return len(self.plrs_coeffs)
        raise InvalidSpec("polynomial sequences have no recurrence depth")

    @property
    def coefficients(self) -> tuple[int, ...]:
        """Recurrence coefficients c_1..c_L (``(1, 1)`` for Fibonacci)."""
        if self.kind is Kind.FIBONACCI:
            return (1, 1)
        if self.kind is Kind.PLRS:
            return self.plrs_coeffs
        raise InvalidSpec("polynomial sequences have no recurrence coefficients")

    @property
    def degree(self) -> int:
        return len(self.poly_coeffs) - 1

    @property
    def label(self) -> str:
        """Canonical text form, accepted back by :func:`parse_spec`."""
        if self.kind is Kind.FIBONACCI:
            return "fib"
        if self.kind is Kind.PLRS:
            return "plrs:" + ",".join(map(str, self.plrs_coeffs))
        return "poly:" + ",".join(map(str, self.poly_coeffs))

    @property
    def pretty(self) -> str:
        """Short human label; monomials render as ``k^d``."""
        if self.kind is Kind.POLYNOMIAL and self.poly_coeffs[0] == 1 and not any(self.poly_coeffs[1:]):
            return f"k^{self.degree}"
        return self.label

    def __str__(self) -> str:
        return self.label

    def poly_value(self, k: int) -> int:
        value = 0
        for a in self.poly_coeffs:
            value = value * k + a
        return value

    def terms(self, start: int = 1) -> Iterator[int]:
        """Infinite iterator over the raw terms with index >= ``start``.

        No admissibility check is made; use :func:`generate_terms` for
        validated windows.
        """
        if start < 1:
            raise ValueError(f"indices start at 1, got {start}")
        if self.kind is Kind.POLYNOMIAL:
            return (self.poly_value(k) for k in itertools.count(start))
        return itertools.islice(self._recurrence_terms(), start - 1, None)

    def term(self, index: int) -> int:
        if self.kind is Kind.POLYNOMIAL:
            return self.poly_value(index)
        if self.kind is Kind.FIBONACCI:
            return fibonacci(index)
        return next(self.terms(index))

    def _recurrence_terms(self) -> Iterator[int]:
        if self.kind is Kind.FIBONACCI:
            a, b = 1, 1
            while True:
                yield a
                a, b = b, a + b
        c = self.plrs_coeffs
        depth = len(c)
        history: list[int] = []  # most recent term last
        while True:
            n = len(history)
            if n == 0:
                h = 1
            elif n < depth:
                h = sum(c[j] * history[n - 1 - j] for j in range(n)) + 1
            else:
                h = sum(c[j] * history[n - 1 - j] for j in range(depth))
            history.append(h)
            if len(history) > depth:
                del history[0]
            yield h


def fibonacci(k: int) -> int:
    """F_k by fast doubling (F_0 = 0, F_1 = 1)."""
    if k < 0:
        raise ValueError("negative Fibonacci index")

    def pair(n: int) -> tuple[int, int]:
        if n == 0:
            return 0, 1
        a, b = pair(n >> 1)
        c = a * (2 * b - a)
        d = a * a + b * b
        return (d, c + d) if n & 1 else (c, d)

    return pair(k)[0]


def recurrence_order(spec: SequenceSpec) -> int:
    """Order of a homogeneous linear recurrence satisfied by the terms.

    For PLRS and Fibonacci the recurrence holds for every index past the
    initial segment; a degree-s polynomial satisfies the finite-difference
    recurrence of order s + 1 everywhere.
    """
    if spec.kind is Kind.POLYNOMIAL:
        return spec.degree + 1
    return spec.depth


@dataclass(frozen=True)
class SequenceWindow:
    spec: SequenceSpec
    start_index: int
    terms: tuple[int, ...] = field(default_factory=tuple)

    @property
    def stop_index(self) -> int:
        return self.start_index + len(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __getitem__(self, i):
        return self.terms[i]


def generate_terms(spec: SequenceSpec, start_index: int, count: int) -> SequenceWindow:
    """Return ``H_start .. H_{start+count-1}`` as a validated window."""
    if start_index < 1:
        raise ValueError(f"start_index must be positive, got {start_index}")
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    if start_index < min_admissible_index(spec):
        raise NonIncreasingWindow(
            f"{spec.label}: index {start_index} is below the first admissible "
            f"index {min_admissible_index(spec)}"
        )
    terms = tuple(itertools.islice(spec.terms(start_index), count))
    if terms[0] < 1 or any(b <= a for a, b in zip(terms, terms[1:])):
        raise NonIncreasingWindow(f"{spec.label}: terms {terms[:8]} are not strictly increasing positive")
    return SequenceWindow(spec, start_index, terms)


# --- polynomial helpers ------------------------------------------------------


def _derivative(coeffs: Sequence[int]) -> list[int]:
    s = len(coeffs) - 1
    return [a * (s - j) for j, a in enumerate(coeffs[:-1])]


def _shift_by_one(coeffs: Sequence[int]) -> list[int]:
    """Coefficients of P(x + 1), degree-descending."""
    s = len(coeffs) - 1
    out = [0] * (s + 1)
    for j, a in enumerate(coeffs):
        power = s - j
        for i in range(power + 1):
            # a * C(power, i) x^i
            out[s - i] += a * math.comb(power, i)
    return out


def _cauchy_bound(coeffs: Sequence[int]) -> int:
    """Integer B with every real root of the polynomial strictly below B."""
    lead = coeffs[0]
    if len(coeffs) == 1:
        return 0
    ratio = max(Fraction(abs(a), abs(lead)) for a in coeffs[1:])
    return math.floor(1 + ratio) + 1


def _poly_eval(coeffs: Sequence[int], x: int) -> int:
    value = 0
    for a in coeffs:
        value = value * x + a
    return value


def min_admissible_index(spec: SequenceSpec) -> int:
    """Smallest index from which the terms are positive and strictly increasing.

    For polynomials: beyond the Cauchy bound of P' the polynomial is
    increasing on the reals; the bound is then walked down over the integers.
    """
    if spec.kind is Kind.FIBONACCI:
        return 2
    if spec.kind is Kind.PLRS:
        return 1
    coeffs = spec.poly_coeffs
    start = max(1, _cauchy_bound(_derivative(coeffs)))
    while _poly_eval(coeffs, start) < 1:
        start += 1
    while start > 1:
        prev = _poly_eval(coeffs, start - 1)
        if prev < 1 or prev >= _poly_eval(coeffs, start):
            break
        start -= 1
    return start


def outpacing_index(a: SequenceSpec, b: SequenceSpec, horizon: int) -> Optional[int]:
    """Smallest n <= horizon with A_k > B_k for every n <= k <= horizon.

    An empirical witness only: nothing is claimed beyond ``horizon``.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be positive, got {horizon}")
    a_terms = list(itertools.islice(a.terms(1), horizon))
    b_terms = list(itertools.islice(b.terms(1), horizon))
    n = horizon + 1
    while n > 1 and a_terms[n - 2] > b_terms[n - 2]:
        n -= 1
    return None if n == horizon + 1 else n


def ratio_certificate_index(spec: SequenceSpec) -> int:
    """Index K with P(k) > 0 and P(k+1) <= 3/2 P(k) for every real k >= K.

    Derived from the Cauchy bounds of P and of 3P(x) - 2P(x+1), whose leading
    coefficient a_s is positive.  Also K >= 3, where F_{k+1} >= 3/2 F_k starts
    to hold.
    """
    if spec.kind is not Kind.POLYNOMIAL:
        raise InvalidSpec("threshold certificates apply to polynomial specs")
    coeffs = list(spec.poly_coeffs)
    shifted = _shift_by_one(coeffs)
    gap = [3 * p - 2 * q for p, q in zip(coeffs, shifted)]
    # leading term of gap is a_s > 0, so gap(x) > 0 past its Cauchy bound
    return max(3, _cauchy_bound(coeffs), _cauchy_bound(gap))


def certified_fibonacci_threshold(spec: SequenceSpec) -> int:
    """Smallest m with F_k > P(k) for every k >= m, with a proof of the tail.

    Past ``K = ratio_certificate_index(P)`` the Fibonacci ratio is at least
    3/2 and the polynomial ratio at most 3/2, so once F_k > P(k) at some
    k >= K it holds for all larger k by induction.  Below that point the
    answer is found by exhaustive scan.
    """
    if spec.kind is not Kind.POLYNOMIAL:
        raise InvalidSpec("the Fibonacci threshold is defined for polynomial specs")
    k = ratio_certificate_index(spec)
    while fibonacci(k) <= spec.poly_value(k):
        k += 1
    while k > 1 and fibonacci(k - 1) > spec.poly_value(k - 1):
        k -= 1
    return k


# --- text format -------------------------------------------------------------


def _parse_int_list(text: str, offset: int) -> list[int]:
    values: list[int] = []
    pos = offset
    if pos >= len(text):
        raise SpecParseError(text, pos, "expected a comma-separated list of integers")
    for chunk in text[offset:].split(","):
        stripped = chunk.strip()
        lead = len(chunk) - len(chunk.lstrip())
        if not stripped:
            raise SpecParseError(text, pos + lead, "empty coefficient")
        try:
            values.append(int(stripped, 10))
        except ValueError:
            raise SpecParseError(text, pos + lead, f"{stripped!r} is not an integer") from None
        pos += len(chunk) + 1
    return values


def parse_spec(text: str) -> SequenceSpec:
    """Parse ``fib``, ``plrs:c1,...,cL``, ``poly:a_s,...,a_0`` or ``k<d>``.

    ``k4`` (or ``k^4``) is shorthand for the monomial ``poly:1,0,0,0,0``.
    """
    raw = text
    text = text.strip()
    if not text:
        raise SpecParseError(raw, 0, "empty sequence spec")
    lowered = text.lower()
    if lowered in ("fib", "fibonacci"):
        return SequenceSpec.fibonacci()
    if lowered.startswith("k"):
        digits = lowered[1:].lstrip("^")
        if not digits.isdigit():
            raise SpecParseError(raw, 1, "monomial shorthand is k<degree>, e.g. k4")
        try:
            return SequenceSpec.monomial(int(digits))
        except InvalidSpec as exc:
            raise SpecParseError(raw, 1, str(exc)) from None
    head, sep, _ = text.partition(":")
    if not sep:
        raise SpecParseError(raw, 0, "expected 'fib', 'plrs:...', 'poly:...' or 'k<d>'")
    head_l = head.strip().lower()
    if head_l not in ("plrs", "poly"):
        raise SpecParseError(raw, 0, f"unknown sequence kind {head.strip()!r}")
    values = _parse_int_list(text, len(head) + 1)
    try:
        if head_l == "plrs":
            return SequenceSpec.plrs(values)
        return SequenceSpec.polynomial(values)
    except InvalidSpec as exc:
        raise SpecParseError(raw, len(head) + 1, str(exc)) from None
