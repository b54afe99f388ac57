import itertools
from decimal import Decimal

import pytest
from gmpy2 import mpfr
from hypothesis import given, settings
from hypothesis import strategies as st

from restricted_compositions.compare import (
    REFERENCE_FIBONACCI_TABLE,
    RatioClassification,
    TableRow,
    Verdict,
    build_table_fibonacci,
    build_table_polynomial,
    classify_plrs_vs_fibonacci,
    classify_ratio,
    classify_ratio_adaptive,
    round7,
)
from restricted_compositions.counting import build_count_table
from restricted_compositions.errors import Indeterminate, InvalidSpec, MismatchedSeries
from restricted_compositions.sequences import Kind, SequenceSpec, parse_spec
from restricted_compositions.series import RestrictedSeries

FIB = SequenceSpec.fibonacci()


def _rs(text, m):
    return RestrictedSeries(parse_spec(text), m)


def test_same_sequence_is_finite_positive():
    r = classify_ratio(_rs("fib", 4), _rs("fib", 4))
    assert r.verdict is Verdict.FINITE_POSITIVE
    assert r.method == "structural"


def test_two_spellings_of_fibonacci():
    r = classify_ratio(_rs("plrs:1,1", 3), _rs("fib", 3))
    assert r.verdict is Verdict.FINITE_POSITIVE


def test_doubling_plrs_is_zero():
    r = classify_ratio(_rs("plrs:2", 2), _rs("fib", 2))
    assert r.verdict is Verdict.ZERO
    assert r.certified_margin > 0.1


def test_quartic_at_31_is_infinite():
    r = classify_ratio_adaptive(_rs("k4", 31), _rs("fib", 31))
    assert r.verdict is Verdict.INFINITE
    assert abs(float(r.root_ratio) - 1.0000011) < 1e-6


def test_quartic_at_22_is_zero():
    # recomputed alpha_22 / gamma_P(22) = 0.9999646 < 1
    r = classify_ratio_adaptive(_rs("k4", 22), _rs("fib", 22))
    assert r.verdict is Verdict.ZERO
    assert abs(float(r.root_ratio) - 0.9999646) < 1e-6


def test_quartic_ratio_crosses_one_at_28():
    assert classify_ratio_adaptive(_rs("k4", 27), _rs("fib", 27)).verdict is Verdict.ZERO
    assert classify_ratio_adaptive(_rs("k4", 28), _rs("fib", 28)).verdict is Verdict.INFINITE


def test_cut_index_mismatch():
    with pytest.raises(MismatchedSeries):
        classify_ratio(_rs("fib", 2), _rs("fib", 3))


def test_loose_tolerance_is_indeterminate_then_adaptive_resolves():
    with pytest.raises(Indeterminate):
        classify_ratio(_rs("k4", 31), _rs("fib", 31), 1e-4)
    assert classify_ratio_adaptive(_rs("k4", 31), _rs("fib", 31), 1e-4).verdict is Verdict.INFINITE


def test_ratio_classification_round_trip():
    r = classify_ratio(_rs("plrs:1,1,1", 3), _rs("fib", 3))
    back = RatioClassification.from_dict(r.as_dict())
    assert back.as_dict() == r.as_dict()
    assert (back.numerator, back.denominator, back.verdict) == (r.numerator, r.denominator, r.verdict)


PLRS_SMALL = [list(c) for d in (1, 2, 3) for c in itertools.product((1, 2), repeat=d) if list(c) != [1]]


@pytest.mark.parametrize("coeffs", PLRS_SMALL, ids=lambda c: "plrs:" + ",".join(map(str, c)))
def test_plrs_classification(coeffs):
    spec = SequenceSpec.plrs(coeffs)
    expected = Verdict.FINITE_POSITIVE if coeffs == [1, 1] else Verdict.ZERO
    for m in range(2, 7):
        r = classify_plrs_vs_fibonacci(spec, m)
        assert r.verdict is expected
        assert r.method == "structural"
        if expected is Verdict.ZERO:
            numeric = classify_ratio_adaptive(RestrictedSeries(spec, m), RestrictedSeries(FIB, m))
            assert numeric.verdict is Verdict.ZERO


@pytest.mark.parametrize("coeffs, m", [([1, 0, 1], 6), ([1, 0, 0, 1], 4), ([1, 0, 0, 2], 10)])
def test_undominated_plrs_falls_back_to_numerical(coeffs, m):
    spec = SequenceSpec.plrs(coeffs)
    r = classify_plrs_vs_fibonacci(spec, m)
    assert r.method == "numerical"
    assert r.verdict is Verdict.INFINITE
    # the count ratio grows, as an infinite limit requires
    # window sums, since single counts can vanish when the smallest parts are large
    h = build_count_table(RestrictedSeries(spec, m), 3000).counts
    f = build_count_table(RestrictedSeries(FIB, m), 3000).counts
    early, late = range(900, 1000), range(2900, 3000)
    assert sum(h[n] for n in late) * sum(f[n] for n in early) > sum(h[n] for n in early) * sum(f[n] for n in late)


@given(
    st.lists(st.integers(0, 3), min_size=1, max_size=4).filter(lambda c: c[0] >= 1 and c[-1] >= 1 and c != [1]),
    st.integers(2, 6),
)
@settings(max_examples=30, deadline=None)
def test_structural_verdict_agrees_with_numerical(coeffs, m):
    spec = SequenceSpec.plrs(coeffs)
    r = classify_plrs_vs_fibonacci(spec, m)  # raises VerdictMismatch on disagreement
    if r.method == "structural" and spec.kind is not Kind.FIBONACCI:
        assert r.verdict is Verdict.ZERO


def test_plrs_classifier_rejects_polynomial():
    with pytest.raises(InvalidSpec):
        classify_plrs_vs_fibonacci(parse_spec("k2"), 3)


def test_zero_verdict_matches_count_ratio_trend():
    h = build_count_table(_rs("plrs:1,1,1", 2), 1000).counts
    f = build_count_table(_rs("fib", 2), 1000).counts
    assert Decimal(h[1000]) / Decimal(f[1000]) < Decimal(h[200]) / Decimal(f[200]) / 10


@pytest.mark.parametrize(
    "value, text",
    [("0.52761255", "0.5276126"), ("0.52761265", "0.5276126"), ("1", "1.0000000"), (mpfr("0.5"), "0.5000000")],
)
def test_round7_half_even(value, text):
    assert round7(value) == text


def test_fibonacci_table_against_reference():
    rows = build_table_fibonacci(2, 20)
    assert [r.m for r in rows] == list(range(2, 21))
    for row in rows:
        ref_alpha, ref_slope = REFERENCE_FIBONACCI_TABLE[row.m]
        assert abs(float(row.gamma) - float(ref_alpha)) <= 1e-6
        if row.m != 2:
            assert abs(float(row.derived_column) - float(ref_slope)) <= 1e-6
    # the published m = 2 slope is 0.5615856; alpha_2 = 0.5276126 and
    # S'(alpha_2) = 3.3749752 give 0.5615834
    assert round7(rows[0].derived_column) == "0.5615834"
    assert rows[0].discrepancy == (False, True)


def test_table_row_round_trip():
    for row in build_table_fibonacci(3, 5) + build_table_polynomial(parse_spec("k4"), [13]):
        back = TableRow.from_dict(row.as_dict())
        assert back.as_dict() == row.as_dict()


def test_polynomial_table_flags_index_shift():
    rows = {r.m: r for r in build_table_polynomial(parse_spec("k4"), [4, 13, 22, 31])}
    for m in (4, 13, 22):
        assert rows[m].flagged
        assert rows[m].reference_alpha_shift == 2
    assert round7(rows[4].derived_column) == "0.7904871"
    assert round7(rows[13].derived_column) == "0.9969353"
    assert round7(rows[22].derived_column) == "0.9999646"
    assert round7(rows[31].derived_column) == "1.0000011"


@pytest.mark.parametrize("degree, m", [(6, 55), (9, 75), (6, 31)])
def test_higher_degree_rows_match_reference(degree, m):
    (row,) = build_table_polynomial(SequenceSpec.monomial(degree), [m])
    if row.reference is not None:
        assert not row.flagged
