import dataclasses
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fanclose.bounds import (B_LOWER, LinearFormContext, a_bounds, aggregate, aleksentsev_bound,
                             aleksentsev_E, aleksentsev_rhs, beta3_height, congA_value,
                             f_upper_from_master, log_ratio_lemma, lower_n, lower_n_window,
                             matveev_upper_n, partition, pell_system_solutions, phi_form_check,
                             sweep, sweep_interval, upper_n_aleksentsev)
from fanclose.errors import PreconditionTooSmall, RegimeAmbiguous
from fanclose.family import family_points
from fanclose.numerics import PrecisionContext, contains, endpoints, to_float
from fanclose.triple import build_triple
from oracles import aleksentsev_n_bisect, matveev_bound_plain, triples_upto

CTX = PrecisionContext(80)


def _proxy():
    return LinearFormContext.from_bc(10 ** 13, 10 ** 26, CTX)


def test_aleksentsev_bound_finite_and_monotone():
    lf = _proxy()
    a = aleksentsev_bound(lf, 10 ** 9, 10 ** 10, CTX)
    b = aleksentsev_bound(lf, 10 ** 9, 10 ** 11, CTX)
    assert (a < 0) is True and (b < a) is True
    hi = aleksentsev_bound(LinearFormContext.from_bc(10 ** 13, 10 ** 26, PrecisionContext(160)),
                           10 ** 9, 10 ** 10, PrecisionContext(160))
    lo_a, hi_a = endpoints(a)
    lo_h, hi_h = endpoints(hi)
    assert lo_a <= lo_h and hi_h <= hi_a


def test_aleksentsev_E_clamp():
    lf = _proxy()
    E = aleksentsev_E(lf, 0, 1, CTX)
    assert contains(E, 3)


def test_aleksentsev_scales_with_B3():
    lf = _proxy()
    lf2 = dataclasses.replace(lf, log_s_sqrt_b=2 * lf.log_s_sqrt_b)
    ratio = aleksentsev_bound(lf2, 10 ** 9, 10 ** 10, CTX) / aleksentsev_bound(lf, 10 ** 9, 10 ** 10, CTX)
    assert contains(ratio, 2)


def test_aleksentsev_precondition():
    with pytest.raises(PreconditionTooSmall):
        aleksentsev_bound(_proxy(), 10, 249, CTX)


def test_upper_n_matches_bisection():
    N = upper_n_aleksentsev(10 ** 13, 10 ** 26, CTX)
    lo, hi = aleksentsev_n_bisect(10 ** 13, 10 ** 26)
    assert hi <= to_float(N) <= hi + 1 + hi * 2e-9
    # N fails the inequality, so does everything above it
    assert (aleksentsev_rhs(10 ** 13, 10 ** 26, N, CTX) < N) is True


@settings(max_examples=15, deadline=None)
@given(st.integers(13, 40), st.integers(2, 30), st.integers(0, 3), st.integers(0, 3))
def test_upper_n_monotone(eb, ratio10, db, dc):
    b, c = 10 ** eb, 10 ** (eb + ratio10)
    base = to_float(upper_n_aleksentsev(b, c, CTX))
    assert to_float(upper_n_aleksentsev(b * 10 ** db, c * 10 ** (db + dc), CTX)) >= base


def test_upper_n_below_global_scale():
    for b, c in [(10 ** 13, 10 ** 16), (10 ** 13, 10 ** 39), (10 ** 20, 10 ** 60)]:
        assert to_float(upper_n_aleksentsev(b, c, CTX)) < 1e19


def test_matveev_constants_and_side_conditions():
    res = matveev_upper_n(10 ** 30, 10 ** 60, Fraction(19, 10), Fraction(21, 10), ctx=CTX)
    k = res.constants
    assert contains(k.E, Fraction(4 * 10 ** 15 + 1, 12 * 10 ** 15))
    assert contains(k.C3, 3) and contains(k.E1, Fraction("0.033653"))
    assert all(res.side_conditions.values())
    assert (k.C0 >= CTX.iv.log(k.C0 * k.T)) is True


def test_matveev_matches_plain_reimplementation():
    res = matveev_upper_n(10 ** 30, 10 ** 60, Fraction(19, 10), Fraction(21, 10), ctx=CTX)
    ref = matveev_bound_plain(10 ** 30, 10 ** 60, 2.1)
    assert math.isclose(to_float(res.n_upper), ref, rel_tol=1e-6)


def test_matveev_window_check():
    with pytest.raises(ValueError):
        matveev_upper_n(10 ** 30, 10 ** 80, Fraction(19, 10), Fraction(21, 10), ctx=CTX)


def test_lower_n_examples():
    lb = lower_n(10 ** 13, 10 ** 40, CTX)
    assert lb.method == "prmarg"
    assert math.isclose(to_float(lb.value(CTX)), 0.125 * math.sqrt(1e27), rel_tol=1e-9)
    lb = lower_n(10 ** 13, 10 ** 28, CTX)
    assert math.isclose(math.exp(to_float(lb.sub["prmarg2"])), 12.5, rel_tol=1e-9)
    b = 10 ** 20
    c = 10 ** 27                          # c = b^1.35
    lb = lower_n(b, c, CTX)
    assert lb.method.startswith("pr3.9 i")
    want = (15.927 * b * b / c) ** 0.25
    assert math.isclose(to_float(lb.value(CTX)), want, rel_tol=1e-9)


def test_lower_n_boundaries_ambiguous():
    with pytest.raises(RegimeAmbiguous):
        lower_n(10 ** 13, 10 ** 39, CTX)
    with pytest.raises(RegimeAmbiguous):
        lower_n(10 ** 13, 4 * 10 ** 26, CTX)


def test_lower_window_dominated_by_pointwise():
    lb = lower_n_window(CTX.interval(30 * math.log(10)), Fraction(3, 2), Fraction(151, 100), CTX, False)
    assert to_float(lb.log_value) > 0


def test_phi_form():
    for f in range(2, 101):
        cert = phi_form_check(f, 3, 5, 1)
        assert cert.discriminant == -16 * f * f
    cert = phi_form_check(2, 1, 1, 1)
    assert cert.positive and cert.value == 20 * 9 + 2 * 2 * 3 * (-2) + 4
    with pytest.raises(ValueError):
        phi_form_check(2, 0, 1, 1)


def test_f_upper_examples():
    assert f_upper_from_master(1, 12) == Fraction(12, 2) + Fraction(1, 24)
    assert f_upper_from_master(2, 8) == Fraction(17, 8)
    for r, s, _ in triples_upto(200):
        bound = f_upper_from_master(r, s)
        assert build_triple(r, s).f <= bound and bound > Fraction(s, 2 * r)


def test_log_ratio_lemma_random_triples():
    rng = random.Random(5)
    pool = [p for f in range(2, 40) for p in family_points(f, 10 ** 12)]
    for r, s in rng.sample(pool, min(1000, len(pool))):
        assert log_ratio_lemma(build_triple(r, s), PrecisionContext(40))


def test_a_bounds_vacuous_below_threshold():
    rec = a_bounds(build_triple(1, 12))
    assert rec.vacuous and rec.ok


def test_a_bounds_large_triples():
    for f, k in [(3, 20), (5, 14), (1000, 3)]:
        from fanclose.family import gcd_family
        tp = gcd_family(f, k).triple()
        assert tp.b > B_LOWER
        rec = a_bounds(tp)
        assert not rec.vacuous and rec.ok


def test_pell_system_and_congruence():
    tp = build_triple(1, 12)
    sols = pell_system_solutions(tp.b, tp.c, 10 ** 4)
    assert (0, 1, 12) in sols
    for x, y, z in sols:
        assert z * z - tp.c * x * x == tp.c - 1
    # index (n, m) = (0, 0) gives the seed; A n term vanishes
    assert congA_value(tp.b, tp.c, tp.A, 0, 0, 1) % tp.c == 0


def test_beta3_height_bounded():
    tp = build_triple(12, 119)
    h = beta3_height(tp, CTX)
    # equality when gcd(r²c, s²b) = 1, so only "h > A3" must be impossible
    assert (h > LinearFormContext.from_triple(tp, CTX).A3) is not True


def test_partition_alignment():
    parts = partition(Fraction(1233, 1000), Fraction(13, 10), Fraction(1, 100))
    assert parts[0] == (Fraction(1233, 1000), Fraction(124, 100))
    assert parts[-1][1] == Fraction(13, 10)
    assert all(a < b for a, b in parts)
    assert all(parts[i][1] == parts[i + 1][0] for i in range(len(parts) - 1))


def test_degenerate_sweep():
    assert sweep(Fraction(3, 2), Fraction(3, 2), Fraction(1, 100)) == []
    with pytest.raises(ValueError):
        sweep(Fraction(1), Fraction(2), Fraction(1, 100))


def test_sweep_row_i_near_mu2():
    row = sweep_interval(Fraction(2), Fraction(201, 100), PrecisionContext(30))
    assert 29.8 <= to_float(row.log10_b) <= 35.8
    agg = aggregate([row])
    assert "i" in agg and agg["i"]["published_log10_b"] == pytest.approx(32.838, abs=1e-3)
