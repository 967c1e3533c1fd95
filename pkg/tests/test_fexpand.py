import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fanclose.errors import CapMissing, DomainViolation
from fanclose.family import family_points
from fanclose.fexpand import (EXPANSIONS, ceil_power, envelopes_hold, estimate_F, estimate_F_exact,
                              large_negative_contradiction, leading_estimate, load_caps,
                              prsec_bound, prsec_chain_check, prsec_exponent_ok, theta_gap,
                              transcription_matches)
from fanclose.numerics import PrecisionContext, contains, to_float
from fanclose.triple import build_triple, f_sequence

POINTS = [(r, s) for f in range(16, 21) for r, s in family_points(f, 10 ** 8) if s > 31 * r]


def _F(r, s, level):
    return f_sequence(build_triple(r, s), level).F_at(level)


@pytest.mark.parametrize("level", [1, 2, 3, 4])
def test_containment_on_family_points(level):
    assert POINTS
    for r, s in POINTS:
        lo, hi = estimate_F_exact(level, r, s)
        assert lo <= _F(r, s, level) <= hi
        assert contains(estimate_F(level, r, s), _F(r, s, level))


@pytest.mark.parametrize("level", [1, 2, 3, 4])
def test_transcription_and_envelopes(level):
    for r, s in POINTS[:20]:
        assert transcription_matches(level, r, s)
        assert envelopes_hold(level, r, s)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 10 ** 6), st.integers(32, 10 ** 4), st.sampled_from([1, 2, 3, 4]))
def test_envelopes_hold_off_the_curve(r, mult, level):
    s = r * mult
    assert envelopes_hold(level, r, s)


def test_domain():
    with pytest.raises(DomainViolation):
        estimate_F_exact(1, 1, 100)
    with pytest.raises(DomainViolation):
        estimate_F_exact(1, 10, 310)
    with pytest.raises(ValueError):
        estimate_F_exact(5, 10, 1000)


def test_leading_behaviour_above_two():
    # asymptotic: needs r^(θ−2) well above r^(2−θ)
    for r in (10 ** 12, 10 ** 20):
        for theta in (Fraction(11, 5), Fraction(5, 2)):
            s = ceil_power(r, theta / 2)   # s ≈ r^θ
            mid = sum(estimate_F_exact(1, r, s)) / 2
            lead = leading_estimate(r, s)
            assert lead / 2 < mid < 2 * lead


def test_sign_below_two():
    for r in (10 ** 4, 10 ** 6):
        s = ceil_power(r, Fraction(17, 20))   # s ≈ r^1.7
        _, hi = estimate_F_exact(1, r, s)
        assert hi < 0


def test_prsec_all_cases_hold():
    caps = load_caps()
    for case in "abcd":
        v = prsec_bound(case, caps, PrecisionContext(80))
        assert v.holds, v.as_dict()
        assert prsec_exponent_ok(case)
        assert large_negative_contradiction(v).disjoint


def test_prsec_displayed_values():
    a = prsec_bound("a")
    up = [b for b in a.branches if b.side == "upper"][0]
    lo = [b for b in a.branches if b.side == "lower"][0]
    assert to_float(up.value) < 5 and up.cap_used == "b < 10^50"
    assert to_float(lo.value) > -7e6 and lo.cap_used == "b < 10^38"
    d = prsec_bound("d")
    assert all(to_float(b.value) < 2e6 for b in d.branches if b.side == "upper")


def test_prsec_missing_cap(tmp_path):
    caps = load_caps()
    del caps["a"]["upper"]
    with pytest.raises(CapMissing):
        prsec_bound("a", caps)
    p = tmp_path / "caps.json"
    p.write_text(json.dumps({"cases": {"a": {}}}))
    with pytest.raises(CapMissing):
        prsec_bound("a", load_caps(str(p)))


def test_prsec_chain_exact():
    r = 10 ** 4
    s = ceil_power(r, Fraction(9, 10))   # θ = 1.8, level 1 window
    out = prsec_chain_check("a", r, s)
    assert all(out.values())


def test_theta_gap():
    g = theta_gap(10 ** 3, Fraction(3, 2))
    assert g.positive and g.below_inverse_r2
    assert to_float(g.gap) < 1e-6
    g = theta_gap(2, Fraction(121, 100))
    assert g.positive and g.below_inverse_r2
    # c is an integer, so c = b^θ exactly never happens; the gap is strictly positive
    assert (g.gap > 0) is True


def test_expansion_table():
    assert sorted(EXPANSIONS) == [1, 2, 3, 4]
