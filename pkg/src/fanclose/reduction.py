"""Baker–Davenport reduction in the Dujella–Pethő form.

For 0 < mκ − l + μ < A·B^{−l} with m < l ≤ M: take a convergent p/q of κ
with q > 6M and ε = ‖qμ‖ − M‖qκ‖.  If ε > 0 there is no solution with
log(Aq/ε)/log B ≤ l ≤ M.

For a triple, Λ1 = 2m·log β1 − 2l·log β2 + log β3 satisfies
0 < Λ1 < (8c/(b−1))·β2^{−4l}; dividing by 2·log β2 gives

    κ = log β1 / log β2,   μ = log β3 / (2 log β2),
    A = 8c / ((b−1)·2·log β2),   B = β2⁴.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .bounds import LinearFormContext, aleksentsev_l_bound
from .errors import NoConvergentWorks, PrecisionExhausted
from .numerics import (REDUCTION_DIGITS, PrecisionContext, ceil_hi, cf_expand, contains_zero,
                       floor_lo, nearest_int_distance, to_float)
from .triple import TripleParams

RETRY_BUDGET = 25


@dataclass(frozen=True)
class ReductionProblem:
    """κ, μ, A, B are callables ``ctx -> interval`` so any precision can be used."""

    kappa: Callable
    mu: Callable
    M: int
    A: Callable
    B: Callable
    label: str = ""

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be at least 1")

    def with_M(self, M: int) -> "ReductionProblem":
        return ReductionProblem(self.kappa, self.mu, M, self.A, self.B, self.label)


@dataclass(frozen=True)
class ReductionOutcome:
    new_bound: int
    q_used: int
    epsilon: object
    passes: int
    M: int

    def as_dict(self) -> dict:
        return {"M": self.M, "new_bound": self.new_bound, "q": self.q_used,
                "epsilon": to_float(self.epsilon), "passes": self.passes}


def _convergent_denominators(kappa, need: int, count, ctx: PrecisionContext) -> list[int]:
    """Denominators q > need of κ's convergents, ``count(qs)`` deciding when enough are in."""
    depth = 64
    while True:
        cf = cf_expand(kappa, depth, ctx, strict=False)
        qs = [q for q in cf.denominators() if q > need]
        if count(qs):
            return qs
        if len(cf) < depth:
            # expansion stopped early: out of precision (or κ rational)
            if qs:
                return qs
            raise PrecisionExhausted(f"no convergent with q > {need} at {ctx.digits} digits")
        depth *= 2


def reduce_once(p: ReductionProblem, ctx: PrecisionContext, retries: int = RETRY_BUDGET) -> ReductionOutcome:
    """One reduction step.

    Convergents are tried in order from the first q > 6M.  Those with
    q·|μ| < 1 are skipped without using the retry budget: there ‖qμ‖ is just
    q·|μ|, which for the tiny μ of genuine triples is hopeless.
    """
    if ctx.digits < REDUCTION_DIGITS:
        raise ValueError(f"reductions need at least {REDUCTION_DIGITS} digits")
    iv = ctx.iv
    kappa, mu = p.kappa(ctx), p.mu(ctx)
    A, B = p.A(ctx), p.B(ctx)
    log_B = iv.log(B)
    abs_mu = abs(mu)

    def visible(q):
        return (q * abs_mu >= 1) is not False

    def enough(qs):
        # visibility is monotone in q, so count from the top
        n = 0
        for q in reversed(qs):
            if not visible(q):
                break
            n += 1
        return n >= retries + 1

    qs = _convergent_denominators(kappa, 6 * p.M, enough, ctx)
    tried = 0
    for q in qs:
        small = not visible(q)
        if not small:
            tried += 1
            if tried > retries + 1:
                break
        try:
            eps = nearest_int_distance(q * mu, ctx) - p.M * nearest_int_distance(q * kappa, ctx)
        except PrecisionExhausted:
            continue
        if not (eps > 0) is True:
            continue
        value = iv.log(A * q / eps) / log_B
        new = max(ceil_hi(value) - 1, 0) if floor_lo(value) != ceil_hi(value) else floor_lo(value)
        return ReductionOutcome(min(new, p.M), q, eps, max(tried, 1), p.M)
    raise NoConvergentWorks(f"no convergent among {tried} tried gives ε > 0 (M = {p.M})")


@dataclass(frozen=True)
class ReductionTrace:
    initial: int
    final_bound: int
    steps: tuple[ReductionOutcome, ...] = field(default_factory=tuple)
    stalled: bool = False

    def as_dict(self) -> dict:
        return {"initial": self.initial, "final_bound": self.final_bound, "stalled": self.stalled,
                "steps": [s.as_dict() for s in self.steps]}


def reduce_to_fixpoint(p: ReductionProblem, floor: int = 1, ctx: PrecisionContext | None = None,
                       retries: int = RETRY_BUDGET) -> ReductionTrace:
    """Repeat reduce_once with M ← new bound until it stops decreasing or reaches ``floor``.

    A NoConvergentWorks after at least one successful step ends the loop
    with the bound reached so far (``stalled=True``).
    """
    if floor < 1:
        raise ValueError("floor must be at least 1")
    ctx = ctx or PrecisionContext(REDUCTION_DIGITS)
    steps = []
    M = p.M
    stalled = False
    while M > floor:
        try:
            out = reduce_once(p.with_M(M), ctx, retries)
        except NoConvergentWorks:
            if not steps:
                raise
            stalled = True
            break
        steps.append(out)
        if out.new_bound >= M:
            break
        M = out.new_bound
    return ReductionTrace(p.M, M, tuple(steps), stalled)


# ---------------------------------------------------------------------------
# the linear form of a triple

def problem_from_triple(tp: TripleParams, M: int | None = None, label: str = "") -> ReductionProblem:
    """Reduction data for Λ1 of the triple; M defaults to the Aleksentsev bound on l."""
    cache = {}

    def lf(ctx):
        if ctx.digits not in cache:
            cache[ctx.digits] = LinearFormContext.from_triple(tp, ctx)
        return cache[ctx.digits]

    def kappa(ctx):
        f = lf(ctx)
        return f.log_alpha / f.log_beta

    def mu(ctx):
        f = lf(ctx)
        return f.log_beta3 / (2 * f.log_beta)

    def A(ctx):
        f = lf(ctx)
        return ctx.iv.mpf(8 * tp.c) / ((tp.b - 1) * 2 * f.log_beta)

    def B(ctx):
        return ctx.iv.exp(4 * lf(ctx).log_beta)

    if M is None:
        M = ceil_hi(aleksentsev_l_bound(lf(PrecisionContext(80))))
    return ReductionProblem(kappa, mu, M, A, B, label or f"r={tp.r}, s={tp.s}")


def constant_problem(kappa, mu, M: int, A, B, label: str = "") -> ReductionProblem:
    """Problem from fixed numbers; each of kappa, mu, A, B may be a number,
    a decimal string, or a callable ``ctx -> interval``."""
    def wrap(x):
        if callable(x):
            return x
        return lambda ctx: ctx.interval(x) if not isinstance(x, str) else ctx.iv.mpf(x)
    return ReductionProblem(wrap(kappa), wrap(mu), M, wrap(A), wrap(B), label)
