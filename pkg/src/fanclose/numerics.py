"""Certified real arithmetic on top of mpmath's interval context.

Every inexact quantity in the package is an mpmath ``ivmpf`` produced by a
:class:`PrecisionContext`.  Each context owns a private interval context, so
two computations at different precisions never interfere through global
state.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable

from mpmath import libmp
from mpmath.ctx_iv import MPIntervalContext

from .errors import PrecisionExhausted

BOUND_DIGITS = 80
REDUCTION_DIGITS = 173
DIGITS_CEILING = 2000

ROUNDINGS = ("floor", "ceiling", "nearest")


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision (decimal digits) plus the rounding used for reports.

    Interval results always enclose the exact value; ``rounding`` only
    decides which endpoint :meth:`point` hands back when a single number is
    wanted.
    """

    digits: int = BOUND_DIGITS
    rounding: str = "nearest"

    def __post_init__(self):
        if not isinstance(self.digits, int) or self.digits < 1:
            raise ValueError(f"digits must be a positive integer, got {self.digits!r}")
        if self.rounding not in ROUNDINGS:
            raise ValueError(f"rounding must be one of {ROUNDINGS}")

    @cached_property
    def iv(self) -> MPIntervalContext:
        ctx = MPIntervalContext()
        ctx.dps = self.digits
        return ctx

    def with_digits(self, digits: int) -> "PrecisionContext":
        return PrecisionContext(digits, self.rounding)

    def doubled(self) -> "PrecisionContext":
        return self.with_digits(2 * self.digits)

    def interval(self, x):
        """Enclose ``x`` (int, Fraction, decimal string, pair or interval)."""
        iv = self.iv
        if isinstance(x, Fraction):
            return iv._mpq((x.numerator, x.denominator))
        if isinstance(x, tuple):
            lo, hi = x
            return iv.make_mpf((_raw_lo(self.interval(lo)), _raw_hi(self.interval(hi))))
        if hasattr(x, "_mpi_"):
            return iv.make_mpf(x._mpi_)
        # ints, floats (exact binary rationals) and decimal strings
        return iv.mpf(x)

    def point(self, x):
        """Collapse an interval to one endpoint according to ``rounding``."""
        if self.rounding == "floor":
            return x.a
        if self.rounding == "ceiling":
            return x.b
        return x.mid


def default_context(digits: int | None = None) -> PrecisionContext:
    """Context for bound computations, honoring FANCLOSE_DIGITS."""
    if digits is None:
        env = os.environ.get("FANCLOSE_DIGITS")
        digits = int(env) if env else BOUND_DIGITS
    return PrecisionContext(digits)


def _raw_lo(x):
    return x._mpi_[0]


def _raw_hi(x):
    return x._mpi_[1]


def endpoints(x) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of an interval."""
    lo, hi = x._mpi_
    return Fraction(*libmp.to_rational(lo)), Fraction(*libmp.to_rational(hi))


def lower(x) -> Fraction:
    return endpoints(x)[0]


def upper(x) -> Fraction:
    return endpoints(x)[1]


def to_float(x) -> float:
    """Midpoint as a float, for logging and CSV output only."""
    lo, hi = x._mpi_
    return (libmp.to_float(lo) + libmp.to_float(hi)) / 2


def width(x):
    return x.delta


def floor_lo(x) -> int:
    return int(libmp.to_int(x._mpi_[0], libmp.round_floor))


def ceil_hi(x) -> int:
    return int(libmp.to_int(x._mpi_[1], libmp.round_ceiling))


def certified_floor(x) -> int:
    """floor(x), provided both endpoints agree on it."""
    a = floor_lo(x)
    b = int(libmp.to_int(x._mpi_[1], libmp.round_floor))
    if a != b:
        raise PrecisionExhausted(f"floor undecided on [{x.a}, {x.b}]")
    return a


def is_point(x) -> bool:
    lo, hi = x._mpi_
    return lo == hi


def contains_zero(x) -> bool:
    lo, hi = x._mpi_
    return libmp.mpf_le(lo, libmp.fzero) and libmp.mpf_ge(hi, libmp.fzero)


def certainly_lt(x, y) -> bool:
    return (x < y) is True


def certainly_gt(x, y) -> bool:
    return (x > y) is True


def certainly_positive(x) -> bool:
    return (x > 0) is True


def decide_lt(x, y) -> bool:
    """x < y as a certified boolean; ambiguity raises PrecisionExhausted."""
    res = x < y
    if res is None:
        raise PrecisionExhausted(f"cannot order [{x.a},{x.b}] and [{y.a},{y.b}]")
    return res


def contains(x, value) -> bool:
    """Whether the exact rational ``value`` lies in the closed interval ``x``."""
    lo, hi = endpoints(x)
    value = Fraction(value)
    return lo <= value <= hi


def disjoint(x, y) -> bool:
    xl, xh = endpoints(x)
    yl, yh = endpoints(y)
    return xh < yl or yh < xl


def with_precision_retry(fn: Callable[[PrecisionContext], object], ctx: PrecisionContext,
                         digits_max: int = DIGITS_CEILING):
    """Run ``fn(ctx)``, doubling digits on PrecisionExhausted up to ``digits_max``."""
    cur = ctx
    while True:
        try:
            return fn(cur)
        except PrecisionExhausted:
            if cur.digits >= digits_max:
                raise
            cur = cur.with_digits(min(2 * cur.digits, digits_max))


def is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


@dataclass(frozen=True)
class ContinuedFraction:
    partial_quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...] = field(repr=False)

    def __len__(self):
        return len(self.partial_quotients)

    def denominators(self) -> list[int]:
        return [q for _, q in self.convergents]


def convergents_of(quotients) -> tuple[tuple[int, int], ...]:
    p_prev, p = 1, quotients[0]
    q_prev, q = 0, 1
    out = [(p, q)]
    for a in quotients[1:]:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        out.append((p, q))
    return tuple(out)


def _cf_rational(x: Fraction, depth: int) -> list[int]:
    quotients = []
    num, den = x.numerator, x.denominator
    while den and len(quotients) < depth:
        a, rem = divmod(num, den)
        quotients.append(a)
        num, den = den, rem
    return quotients


def cf_expand(x, depth: int, ctx: PrecisionContext, strict: bool = True) -> ContinuedFraction:
    """First ``depth`` partial quotients of ``x`` > 0, each one certified.

    ``x`` may be an int or Fraction (expanded exactly, possibly terminating
    early), an interval, or a callable ``ctx -> interval`` re-evaluated at
    the given precision.  With ``strict=False`` the expansion stops quietly
    at the first quotient the precision cannot decide.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        if x <= 0:
            raise ValueError("cf_expand needs x > 0")
        qs = _cf_rational(x, depth)
        return ContinuedFraction(tuple(qs), convergents_of(qs))
    y = x(ctx) if callable(x) else ctx.interval(x)
    if not certainly_positive(y):
        if (y > 0) is False:
            raise ValueError("cf_expand needs x > 0")
        raise PrecisionExhausted("sign of x undecided")
    # every point between two reals shares the partial quotients on which
    # their exact rational endpoints agree, so expand both endpoints exactly
    lo, hi = endpoints(y)
    quotients = []
    pn, pd, qn, qd = (int(v) for v in (lo.numerator, lo.denominator, hi.numerator, hi.denominator))
    while len(quotients) < depth:
        a, ra = divmod(pn, pd)
        b, rb = divmod(qn, qd)
        if a != b:
            if strict or not quotients:
                raise PrecisionExhausted(
                    f"partial quotient {len(quotients)} undecided at {ctx.digits} digits")
            break
        quotients.append(a)
        if len(quotients) == depth:
            break
        if ra == 0 or rb == 0:
            if (ra == 0 and rb == 0) or not strict:
                break
            raise PrecisionExhausted(
                f"partial quotient {len(quotients)} undecided at {ctx.digits} digits")
        pn, pd, qn, qd = pd, ra, qd, rb
    return ContinuedFraction(tuple(quotients), convergents_of(quotients))


def nearest_int_distance(x, ctx: PrecisionContext):
    """Certified interval for the distance from ``x`` to the nearest integer."""
    y = ctx.interval(x) if not hasattr(x, "_mpi_") else x
    half = ctx.iv.mpf(1) / 2
    shifted = y + half
    n_lo = floor_lo(shifted)
    n_hi = int(libmp.to_int(shifted._mpi_[1], libmp.round_floor))
    if n_lo != n_hi:
        raise PrecisionExhausted("nearest integer ambiguous at this precision")
    d = abs(y - n_lo)
    # clip to the mathematically possible range
    lo, hi = d._mpi_
    if libmp.mpf_gt(hi, half._mpi_[1]):
        hi = half._mpi_[1]
    return ctx.iv.make_mpf((lo, hi))
