from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from fanclose.errors import NoConvergentWorks
from fanclose.family import gcd_family
from fanclose.numerics import PrecisionContext
from fanclose.reduction import (ReductionProblem, constant_problem, problem_from_triple,
                                reduce_once, reduce_to_fixpoint)
from oracles import reduction_oracle

CTX = PrecisionContext(173)
SQRT2 = lambda c: c.iv.sqrt(2)
MU = lambda c: c.iv.sqrt(3) / 7


def test_synthetic_matches_oracle():
    p = constant_problem(SQRT2, MU, 10 ** 19, 1000, 3)
    out = reduce_once(p, CTX)
    ref = reduction_oracle(lambda: mpmath.sqrt(2), lambda: mpmath.sqrt(3) / 7, 10 ** 19, 1000, 3)
    assert out.new_bound == ref == 49


def test_retry_records_passes():
    p = constant_problem(SQRT2, Fraction(11, 97), 10 ** 6, 10, 3)
    out = reduce_once(p, CTX)
    assert out.passes >= 2


def test_M_one_contracts_or_fails():
    p = constant_problem(SQRT2, MU, 1, 1000, 3)
    try:
        out = reduce_once(p, CTX)
    except NoConvergentWorks:
        return
    assert out.new_bound <= 1


def test_tight_M_two_single_pass():
    tr = reduce_to_fixpoint(constant_problem(SQRT2, MU, 2, 1000, 3), 1, CTX)
    assert tr.final_bound <= 2 and len(tr.steps) <= 1


def test_no_convergent_when_mu_rational_with_kappa_rational_like():
    # μ = 0 gives ‖qμ‖ = 0 and ε < 0 for every q
    with pytest.raises(NoConvergentWorks):
        reduce_once(constant_problem(SQRT2, 0, 10 ** 6, 10, 3), CTX)


def test_precision_floor():
    with pytest.raises(ValueError):
        reduce_once(constant_problem(SQRT2, MU, 10, 1, 3), PrecisionContext(100))
    with pytest.raises(ValueError):
        ReductionProblem(SQRT2, MU, 0, SQRT2, SQRT2)


def test_determinism_across_precision():
    p = constant_problem(SQRT2, MU, 10 ** 19, 1000, 3)
    a = reduce_to_fixpoint(p, 1, PrecisionContext(173))
    b = reduce_to_fixpoint(p, 1, PrecisionContext(200))
    assert a.final_bound == b.final_bound
    assert [s.new_bound for s in a.steps] == [s.new_bound for s in b.steps]


@pytest.mark.parametrize("f,k", [(3, 1), (5, 2), (10 ** 7 + 19, 1)])
def test_family_triples_reduce_below_seven(f, k):
    tp = gcd_family(f, k).triple()
    tr = reduce_to_fixpoint(problem_from_triple(tp), 1, CTX)
    assert tr.initial > 10 ** 12 and tr.final_bound <= 6


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 30), st.integers(1, 12), st.integers(1, 999))
def test_planted_solution_never_excluded(m, extra, seed):
    """With 0 < mκ − l + μ < A·B^(−l) planted, the reduced bound stays ≥ l."""
    l = m + extra
    A, B = 10, 3

    def kap(c):
        return c.iv.sqrt(2) + c.interval(Fraction(seed, 1000))

    def mu(c):
        # δ = A·B^(−l)/2 puts the linear form strictly inside (0, A·B^(−l))
        return l - m * kap(c) + c.interval(Fraction(A, 2 * B ** l))

    M = 10 ** 6
    try:
        out = reduce_once(constant_problem(kap, mu, M, A, B), CTX)
    except NoConvergentWorks:
        return
    assert out.new_bound >= l
