import pytest
from hypothesis import given, settings, strategies as st

from fanclose.errors import NotATriple
from fanclose.family import gcd_family
from fanclose.triple import (TripleParams, build_triple, classify_F, f_sequence, le2f_holds,
                             p_sequence, triple_from_master)
from oracles import triples_upto

SMALL_TRIPLES = triples_upto(300)


def test_build_examples():
    tp = build_triple(2, 8)
    assert (tp.b, tp.c, tp.t, tp.f, tp.A, tp.F) == (5, 65, 18, 2, 9, 0)
    tp = build_triple(1, 12)
    assert (tp.b, tp.c, tp.t, tp.f, tp.A, tp.F) == (2, 145, 17, 5, 27, 2)
    tp = build_triple(2, 3)
    assert (tp.t, tp.f) == (7, 1)


def test_build_rejects():
    with pytest.raises(NotATriple):
        build_triple(2, 4)
    with pytest.raises(ValueError):
        build_triple(5, 5)
    with pytest.raises(NotATriple):
        triple_from_master(1, 12, 4)


def test_params_validate():
    with pytest.raises(ValueError, match="F = s-2rf"):
        TripleParams(1, 12, 17, 5, 2, 145, 27, 3)


def test_classify_examples():
    c = classify_F(build_triple(2, 8))
    assert c.F == 0 and all(c.zero) and c.consistent
    c = classify_F(build_triple(1, 12))
    assert c.sign == 1 and all(c.positive) and not c.c_lt_4b2
    c = classify_F(build_triple(12, 119))
    assert c.F == -1 and all(c.negative) and c.c_lt_4b2 and c.c_lt_4b2 == (145 ** 2 * 4 > 14162)


def test_f_sequence_example():
    seq = f_sequence(build_triple(1, 12), 2)
    assert list(seq.F) == [-12, -1, 2, 21]
    assert list(seq.P) == [0, 1, 10, 99]
    assert seq.F_at(1) ** 2 - 2 * 5 * seq.F_at(1) * seq.F_at(2) + seq.F_at(2) ** 2 == 25


def test_f_sequence_zero_case():
    seq = f_sequence(build_triple(2, 8), 1)
    assert seq.F_at(1) == 0
    assert (2, 8) == (seq.P_at(0) * 2, seq.P_at(1) * 2)


def test_f_sequence_seeds():
    seq = f_sequence(build_triple(3, 18), 0)
    assert list(seq.F) == [-18, -3] and list(seq.P) == [0, 1]


def test_f_sequence_bounds():
    with pytest.raises(ValueError):
        f_sequence(build_triple(1, 12), -1)


def test_p_sequence_determinant():
    for f in range(1, 30):
        P = p_sequence(f, 15)
        assert all(P[i] ** 2 - P[i - 1] * P[i + 1] == 1 for i in range(1, 16))


def test_brute_force_triples_agree():
    for r, s, t in SMALL_TRIPLES:
        tp = build_triple(r, s)
        assert tp.t == t
        assert classify_F(tp).consistent


@pytest.mark.parametrize("r,s,t", SMALL_TRIPLES[::7])
def test_le2f_on_brute_triples(r, s, t):
    seq = f_sequence(build_triple(r, s), 10)
    for i in range(0, 10):
        assert le2f_holds(seq, i) in (None, True)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 40), st.integers(1, 8))
def test_family_points_are_triples(f, k):
    p = gcd_family(f, k)
    tp = build_triple(p.r, p.s)
    assert tp.f == f and tp.A == f * f + tp.b
    assert tp.s * tp.F == f * f - tp.r ** 2
