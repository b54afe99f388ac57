import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import compositions, exponents
from restricted_compositions.counting import (
    BRUTE_FORCE_MAX_N,
    TableFormatError,
    asymptotic_residual,
    brute_force_count,
    build_count_table,
    dump_count_table,
    enumerate_compositions,
    estimate_table_bytes,
    load_count_table,
    stats_at,
)
from restricted_compositions.errors import LimitTooLarge, MismatchedSeries, NoCompositions, NTooLarge
from restricted_compositions.sequences import SequenceSpec, parse_spec
from restricted_compositions.series import RestrictedSeries, find_root

FIB = SequenceSpec.fibonacci()


def _oracle_stats(series, n):
    parts = [p for p in series.parts_up_to(n)]
    comps = compositions(parts, n)
    return len(comps), sum(len(c) for c in comps), sum(c.count(1) for c in comps)


def test_fib_m2_small_values():
    table = build_count_table(RestrictedSeries(FIB, 2), 10)
    # parts {1, 2, 3, 5, 8}; c(5) = c(4) + c(3) + c(2) + c(0)
    assert table.counts[:6] == (1, 1, 2, 4, 7, 14)


def test_fib_m2_at_four():
    table = build_count_table(RestrictedSeries(FIB, 2), 4)
    s = stats_at(table, 4)
    assert s.count == 7
    # 1111, 112 x3, 22, 13 x2: 4 + 9 + 2 + 4 = 19 summands, 4 + 6 + 0 + 2 = 12 ones
    assert s.mean_summands == pytest.approx(19 / 7)
    assert s.ones_density == pytest.approx(12 / 19)


def test_no_compositions():
    table = build_count_table(RestrictedSeries(FIB, 3), 5)
    assert table.counts[1] == 0
    with pytest.raises(NoCompositions):
        stats_at(table, 1)


def test_empty_composition():
    s = stats_at(build_count_table(RestrictedSeries(FIB, 2), 0), 0)
    assert s.count == 1
    assert s.mean_summands is None and s.ones_density is None


SPECS = [("fib", 2, ()), ("fib", 3, ()), ("fib", 4, ()), ("plrs", 1, (1, 1, 1)), ("plrs", 2, (1, 1, 1)),
         ("poly", 2, (1, 0, 0)), ("plrs", 1, (2,))]


def _series(kind, m, coeffs):
    if kind == "fib":
        return RestrictedSeries(FIB, m)
    if kind == "plrs":
        return RestrictedSeries(SequenceSpec.plrs(coeffs), m)
    return RestrictedSeries(SequenceSpec.polynomial(coeffs), m)


@pytest.mark.parametrize("kind, m, coeffs", SPECS)
def test_table_matches_enumeration(kind, m, coeffs):
    series = _series(kind, m, coeffs)
    assert series.parts_up_to(40) == [e for e in exponents(kind, m, 40, coeffs) if e <= 40]
    table = build_count_table(series, 16)
    for n in range(17):
        c, w, u = _oracle_stats(series, n)
        assert (table.counts[n], table.summand_totals[n], table.ones_totals[n]) == (c, w, u)


@pytest.mark.parametrize("kind, m, coeffs", SPECS)
def test_brute_force_matches_table(kind, m, coeffs):
    series = _series(kind, m, coeffs)
    table = build_count_table(series, 22)
    assert [brute_force_count(series, n) for n in range(23)] == list(table.counts)


def test_enumerate_compositions_matches_oracle():
    series = _series("plrs", 1, (1, 1, 1))
    assert sorted(enumerate_compositions(series, 9)) == sorted(compositions(series.parts_up_to(9), 9))


def test_brute_force_limit():
    with pytest.raises(NTooLarge):
        brute_force_count(RestrictedSeries(FIB, 2), BRUTE_FORCE_MAX_N + 1)


def test_memory_budget():
    assert estimate_table_bytes(1000) < estimate_table_bytes(2000)
    with pytest.raises(LimitTooLarge):
        build_count_table(RestrictedSeries(FIB, 2), 5000, memory_budget=10**6)


@given(st.integers(0, 120), st.integers(0, 120))
@settings(max_examples=30, deadline=None)
def test_resume_equals_fresh(a, b):
    series = RestrictedSeries(FIB, 3)
    short = build_count_table(series, a)
    assert build_count_table(series, b, resume=short) == build_count_table(series, b)


def test_resume_rejects_other_series():
    with pytest.raises(MismatchedSeries):
        build_count_table(RestrictedSeries(FIB, 3), 10, resume=build_count_table(RestrictedSeries(FIB, 2), 5))


@given(st.integers(1, 300))
@settings(max_examples=20, deadline=None)
def test_statistics_bounds(n):
    series = RestrictedSeries(FIB, 2)
    s = stats_at(build_count_table(series, n), n)
    # every composition has between ceil(n / largest part) and n summands
    assert 1 <= s.mean_summands <= n
    assert 0 <= s.ones_density <= 1


def test_count_monotone_with_one_as_part():
    table = build_count_table(RestrictedSeries(FIB, 2), 400)
    assert all(a < b for a, b in zip(table.counts[1:], table.counts[2:]))


def test_round_trip_text_format():
    table = build_count_table(RestrictedSeries(parse_spec("plrs:1,1,1"), 2), 150)
    buf = io.StringIO()
    dump_count_table(table, buf)
    assert load_count_table(buf.getvalue()) == table


def test_corrupted_table_rejected():
    table = build_count_table(RestrictedSeries(FIB, 2), 30)
    buf = io.StringIO()
    dump_count_table(table, buf)
    lines = buf.getvalue().splitlines()
    n, c, w, u = lines[-1].split()
    lines[-1] = f"{n} {int(c) + 1} {w} {u}"
    with pytest.raises(TableFormatError):
        load_count_table("\n".join(lines) + "\n")
    with pytest.raises(TableFormatError):
        load_count_table("not a table\n")


@pytest.mark.parametrize("m", [2, 3])
def test_residual_decays(m):
    series = RestrictedSeries(FIB, m)
    table = build_count_table(series, 400)
    root = find_root(series, 1e-40, precision_cap=512)
    r100 = abs(asymptotic_residual(table, root, 100))
    r400 = abs(asymptotic_residual(table, root, 400))
    assert r400 < r100
    assert r400 < 1e-20


def test_residual_rejects_mismatched_root():
    table = build_count_table(RestrictedSeries(FIB, 2), 10)
    with pytest.raises(MismatchedSeries):
        asymptotic_residual(table, find_root(RestrictedSeries(FIB, 3)), 5)


@given(st.sampled_from(["fib", "plrs:1,1,1", "plrs:2", "k2", "k3"]), st.integers(2, 6))
@settings(max_examples=25, deadline=None)
def test_nested_part_sets_order_counts(text, m):
    spec = parse_spec(text)
    # parts from index m + 1 are a subset of parts from index m
    small = build_count_table(RestrictedSeries(spec, m + 1), 200).counts
    large = build_count_table(RestrictedSeries(spec, m), 200).counts
    assert all(a <= b for a, b in zip(small, large))
