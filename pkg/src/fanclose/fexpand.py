"""Certified expansions of F_1..F_4 in r and s, and the |F_i| window bounds.

Put u = r⁻² + s⁻².  The binomial series with remainder,

    √(1+u) = 1 + u/2 − u²/8 + L·u³/16,   0 < L < 1,

turns f = rs(√(1+u) − 1) into a polynomial in L, and so does every
F_i = 2f·F_{i−1} − F_{i−2}.  The free term is transcribed below per level;
the coefficients of L, L², ... are only known through sign envelopes.
Endpoints are exact rationals, so containment checks are exact.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable

from sympy import integer_nthroot

from .errors import CapMissing, DomainViolation
from .numerics import PrecisionContext, default_context, endpoints, to_float

Q = Fraction


# ---------------------------------------------------------------------------
# free terms

def _main1(r, s):
    return Q(s, 4 * r ** 2) - Q(r ** 2, s) + Q(1, 2 * s) + Q(r ** 2, 4 * s ** 3)


def _main2(r, s):
    return (Q(s ** 2, 4 * r ** 3) - Q(r ** 3, s ** 2) - Q(s ** 2, 16 * r ** 5) + Q(1, r)
            - Q(1, 4 * r ** 3) + Q(5 * r, 4 * s ** 2) - Q(3, 8 * r * s ** 2) + Q(r ** 3, 2 * s ** 4)
            - Q(r, 4 * s ** 4) - Q(r ** 3, 16 * s ** 6))


def _main3(r, s):
    r2, r4, r6 = r ** 2, r ** 4, r ** 6
    return (Q((16 * r4 - 8 * r2 + 1) * s ** 3, 64 * r ** 8)
            + Q((32 * r4 - 22 * r2 + 3) * s, 32 * r6)
            + Q(128 * r4 - 96 * r2 + 15, 64 * r4 * s)
            + Q(-16 * r6 + 32 * r4 - 26 * r2 + 5, 16 * r2 * s ** 3)
            + Q(48 * r4 - 56 * r2 + 15, 64 * s ** 5)
            + Q(-6 * r4 + 3 * r2, 32 * s ** 7)
            + Q(r4, 64 * s ** 9))


def _main4(r, s):
    r2, r3, r4, r5, r6, r8 = r ** 2, r ** 3, r ** 4, r ** 5, r ** 6, r ** 8
    return (Q((64 * r6 - 48 * r4 + 12 * r2 - 1) * s ** 4, 256 * r ** 11)
            + Q((32 * r6 - 36 * r4 + 11 * r2 - 1) * s ** 2, 32 * r ** 9)
            + Q(128 * r6 - 192 * r4 + 69 * r2 - 7, 64 * r ** 7)
            + Q(96 * r6 - 144 * r4 + 60 * r2 - 7, 32 * r5 * s ** 2)
            + Q(-128 * r8 + 352 * r6 - 504 * r4 + 250 * r2 - 35, 128 * r3 * s ** 4)
            + Q(32 * r6 - 60 * r4 + 39 * r2 - 7, 32 * r * s ** 6)
            + Q(-24 * r5 + 27 * r3 - 7 * r, 64 * s ** 8)
            + Q(2 * r5 - r3, 32 * s ** 10)
            - Q(r5, 256 * s ** 12))


# ---------------------------------------------------------------------------
# envelopes: each coefficient of L^k (k ≥ 1) lies in (−bound, 0)

def _env1(r, s):
    # the L-coefficient of F_1 is known exactly; it is its own envelope
    return [Q(s, 8 * r ** 4) + Q(3, 8 * r ** 2 * s) + Q(3, 8 * s ** 3) + Q(r ** 2, 8 * s ** 5)]


def _env2(r, s):
    return [Q(s ** 2, r ** 5), Q(s ** 2, r ** 9)]


def _env3(r, s):
    s3 = s ** 3
    return [Q(17 * s3, 128 * r ** 6), Q(9 * s3, 256 * r ** 10), Q(s3, 256 * r ** 14)]


def _env4(r, s):
    s4 = s ** 4
    return [Q(17 * s4, 128 * r ** 7), Q(25 * s4, 256 * r ** 11), Q(s4, 128 * r ** 15),
            Q(s4, 2048 * r ** 19)]


@dataclass(frozen=True)
class ExpansionSpec:
    level: int
    main_term: Callable[[int, int], Fraction]
    envelopes: Callable[[int, int], list]
    names: tuple[str, ...]

    def remainder_bounds(self, r: int, s: int) -> list[tuple[int, Fraction, Fraction]]:
        """(power of L, lower, upper) for each remainder coefficient."""
        return [(k + 1, -e, Q(0)) for k, e in enumerate(self.envelopes(r, s))]


EXPANSIONS = {
    1: ExpansionSpec(1, _main1, _env1, ("H1",)),
    2: ExpansionSpec(2, _main2, _env2, ("H2", "J2")),
    3: ExpansionSpec(3, _main3, _env3, ("H3", "J3", "K3")),
    4: ExpansionSpec(4, _main4, _env4, ("H4", "J4", "K4", "M4")),
}


def _check_domain(level: int, r: int, s: int):
    if level not in EXPANSIONS:
        raise ValueError("level must be 1, 2, 3 or 4")
    if r < 2:
        raise DomainViolation(f"r = {r} < 2")
    if s <= 31 * r:
        raise DomainViolation(f"s = {s} <= 31r = {31 * r}")


def estimate_F_exact(level: int, r: int, s: int) -> tuple[Fraction, Fraction]:
    """Rational enclosure [main − Σ envelopes, main] of F_level."""
    _check_domain(level, r, s)
    spec = EXPANSIONS[level]
    main = spec.main_term(r, s)
    return main - sum(spec.envelopes(r, s)), main


def estimate_F(level: int, r: int, s: int, ctx: PrecisionContext | None = None):
    """Certified interval containing F_level for s > 31r, r ≥ 2."""
    ctx = ctx or default_context()
    return ctx.interval(estimate_F_exact(level, r, s))


# ---------------------------------------------------------------------------
# exact polynomial in L, for checking the transcription

def _pmul(a, b):
    out = [Q(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _padd(a, b, sb=1):
    n = max(len(a), len(b))
    a = a + [Q(0)] * (n - len(a))
    b = b + [Q(0)] * (n - len(b))
    return [x + sb * y for x, y in zip(a, b)]


def L_polynomial(level: int, r: int, s: int) -> list[Fraction]:
    """Coefficients of F_level as a polynomial in L (index = power of L)."""
    u = Q(1, r * r) + Q(1, s * s)
    f = [r * s * (u / 2 - u * u / 8), r * s * u ** 3 / 16]
    prev, cur = [Q(-s)], [Q(-r)]
    for _ in range(level):
        prev, cur = cur, _padd(_pmul([2 * c for c in f], cur), prev, -1)
    return cur


def transcription_matches(level: int, r: int, s: int) -> bool:
    return L_polynomial(level, r, s)[0] == EXPANSIONS[level].main_term(r, s)


def envelopes_hold(level: int, r: int, s: int) -> bool:
    """Every L^k coefficient (k ≥ 1) lies in its envelope (−e, 0); level 1 is an equality."""
    poly = L_polynomial(level, r, s)[1:]
    env = EXPANSIONS[level].envelopes(r, s)
    if len(poly) != len(env):
        return False
    if level == 1:
        return poly[0] == -env[0]
    return all(-e < c < 0 for c, e in zip(poly, env))


# ---------------------------------------------------------------------------
# the window bounds on |F_i|

@dataclass(frozen=True)
class ThetaWindow:
    """A θ window with its cap on b, given either exactly (``b_max``) or as log10 b."""

    theta_lo: Fraction
    theta_hi: Fraction
    b_max_log10: Fraction | None = None
    b_max: Fraction | None = None
    provenance: str = ""
    r_min: int = 2

    @property
    def cap_label(self) -> str | None:
        if self.b_max is not None:
            return f"b < {float(self.b_max):.4g}"
        if self.b_max_log10 is not None:
            return f"b < 10^{float(self.b_max_log10):g}"
        return None

    def r_max(self, ctx: PrecisionContext):
        """An upper bound on r = √(b−1) under the cap."""
        iv = ctx.iv
        if self.b_max is not None:
            return iv.sqrt(ctx.interval(self.b_max))
        if self.b_max_log10 is None:
            raise CapMissing(f"no b-cap for θ ∈ [{self.theta_lo}, {self.theta_hi})")
        return iv.mpf(10) ** (ctx.interval(self.b_max_log10) / 2)


def load_caps(path=None) -> dict:
    """Cap table: {case: {branch: ThetaWindow}}.  Default is the packaged caps.json."""
    if path is None:
        text = resources.files("fanclose").joinpath("data/caps.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    raw = json.loads(text)
    out = {}
    for case, branches in raw["cases"].items():
        out[case] = {}
        for name, w in branches.items():
            lg, bm = w.get("b_max_log10"), w.get("b_max")
            out[case][name] = ThetaWindow(
                Q(w["theta"][0]), Q(w["theta"][1]),
                None if lg is None else Q(lg), None if bm is None else Q(bm),
                w.get("provenance", ""))
    return out


@dataclass(frozen=True)
class BranchBound:
    """Bound c·r^e (sign included) on one θ sub-window, and the target it must beat."""

    name: str
    level: int
    side: str                 # "upper" or "lower"
    theta: tuple[Fraction, Fraction]
    coefficient: Fraction
    exponent: Fraction
    target: Fraction
    value: object = None
    holds: bool | None = None
    cap_used: str | None = None


@dataclass(frozen=True)
class PrsecVerdict:
    case: str
    level: int
    theta: tuple[Fraction, Fraction]
    claim: Fraction
    branches: tuple[BranchBound, ...]
    upper: object
    lower: object

    @property
    def holds(self) -> bool:
        return all(b.holds for b in self.branches)

    def as_dict(self) -> dict:
        return {
            "case": self.case,
            "level": self.level,
            "theta": [str(self.theta[0]), str(self.theta[1])],
            "claim": f"|F_{self.level}| < {self.claim}",
            "holds": self.holds,
            "upper": to_float(self.upper),
            "lower": to_float(self.lower),
            "branches": [{
                "name": b.name, "side": b.side,
                "theta": [str(b.theta[0]), str(b.theta[1])],
                "bound": f"{'+' if b.coefficient > 0 else '-'}{abs(b.coefficient)}*r^{b.exponent}",
                "cap": b.cap_used,
                "value": to_float(b.value), "target": str(b.target), "holds": b.holds,
            } for b in self.branches],
        }


# for each case: (level, θ range, claim, branches)
# a branch is (name, side, θ sub-window, coefficient, exponent of r, target, needs cap)
# with the exponent taken at the worst end of the sub-window
_PRSEC = {
    "a": (1, (Q(164, 100), Q(205, 100)), Q(7 * 10 ** 6), (
        ("upper", "upper", (Q(164, 100), Q(205, 100)), Q(1, 4), Q(5, 100), Q(5), True),
        ("lower", "lower", (Q(164, 100), Q(205, 100)), Q(-1), Q(36, 100), Q(-7 * 10 ** 6), True),
    )),
    "b": (2, (Q(140, 100), Q(164, 100)), Q(3 * 10 ** 6), (
        ("upper_hi", "upper", (Q(150, 100), Q(164, 100)), Q(1, 4), Q(28, 100), Q(3 * 10 ** 6), True),
        ("upper_lo", "upper", (Q(140, 100), Q(150, 100)), Q(1, 4), Q(0), Q(1), False),
        ("lower_hi", "lower", (Q(150, 100), Q(164, 100)), Q(-1), Q(0), Q(-1), False),
        ("lower_lo", "lower", (Q(140, 100), Q(150, 100)), Q(-1), Q(20, 100), Q(-2 * 10 ** 6), True),
    )),
    "c": (3, (Q(130, 100), Q(140, 100)), Q(6 * 10 ** 6), (
        ("upper", "upper", (Q(130, 100), Q(140, 100)), Q(1, 4), Q(20, 100), Q(6 * 10 ** 6), True),
        ("lower", "lower", (Q(130, 100), Q(140, 100)), Q(-1), Q(10, 100), Q(-5000), True),
    )),
    "d": (4, (Q(123, 100), Q(130, 100)), Q(2 * 10 ** 6), (
        ("upper", "upper", (Q(123, 100), Q(130, 100)), Q(1, 4), Q(20, 100), Q(2 * 10 ** 6), True),
        ("lower", "lower", (Q(123, 100), Q(130, 100)), Q(-1), Q(8, 100), Q(-600), True),
    )),
}

# the exponent of r in the leading term, as a function of θ: upper and lower branch
_EXPONENT = {
    1: (lambda t: t - 2, lambda t: 2 - t),
    2: (lambda t: 2 * t - 3, lambda t: 3 - 2 * t),
    3: (lambda t: 3 * t - 4, lambda t: 4 - 3 * t),
    4: (lambda t: 4 * t - 5, lambda t: 5 - 4 * t),
}


def prsec_exponent_ok(case: str) -> bool:
    """Each branch exponent dominates the leading exponent on its whole sub-window."""
    level, _, _, branches = _PRSEC[case]
    up, lo = _EXPONENT[level]
    for _, side, (t0, t1), _, e, _, _ in branches:
        fn = up if side == "upper" else lo
        worst = max(fn(t0), fn(t1))
        if e < worst:
            return False
    return True


def prsec_bound(case: str, caps: dict | None = None,
                ctx: PrecisionContext | None = None) -> PrsecVerdict:
    """Replay the |F_i| bound of one θ case in interval arithmetic."""
    ctx = ctx or default_context()
    if case not in _PRSEC:
        raise ValueError("case must be one of a, b, c, d")
    caps = load_caps() if caps is None else caps
    iv = ctx.iv
    level, theta, claim, spec = _PRSEC[case]
    out = []
    for name, side, sub, coef, expo, target, needs_cap in spec:
        cap_used = None
        if needs_cap:
            window = caps.get(case, {}).get(name)
            if window is None:
                raise CapMissing(f"case {case}: no cap for branch {name}")
            rmax = window.r_max(ctx)
            if window.cap_label is None:
                raise CapMissing(f"case {case}: branch {name} has an empty cap")
            cap_used = window.cap_label
            value = ctx.interval(coef) * rmax ** ctx.interval(expo)
        else:
            # r^e with e ≤ 0 is at most 1 for r ≥ 1
            if expo > 0:
                raise CapMissing(f"case {case}: branch {name} needs a cap")
            value = ctx.interval(coef)
        # the chain F < c·r^e is strict, so an uncapped r^e ≤ 1 may meet the target
        tgt = ctx.interval(target)
        if side == "upper":
            holds = ((value <= tgt) if not needs_cap else (value < tgt)) is True
        else:
            holds = ((value >= tgt) if not needs_cap else (value > tgt)) is True
        out.append(BranchBound(name, level, side, sub, coef, expo, target, value, holds, cap_used))
    ups = [b.value for b in out if b.side == "upper"]
    los = [b.value for b in out if b.side == "lower"]
    upper = max(ups, key=lambda x: to_float(x))
    lower = min(los, key=lambda x: to_float(x))
    return PrsecVerdict(case, level, theta, claim, tuple(out), upper, lower)


def prsec_chain_check(case: str, r: int, s: int) -> dict:
    """Exact check, at one (r, s), of the intermediate inequalities of a case.

    Returns the named inequalities with their truth values; meaningful for
    s inside the case's θ window and s > 31r.
    """
    level = _PRSEC[case][0]
    lo, hi = estimate_F_exact(level, r, s)
    m = EXPANSIONS[level].main_term(r, s)
    out = {"main term is the upper endpoint": hi == m}
    if level == 1:
        out["F1 < s/(4r^2)"] = hi < Q(s, 4 * r * r)
        out["F1 > -r^2/s"] = lo > -Q(r * r, s)
    elif level == 2:
        out["F2 < s^2/(4r^3) - r^3/s^2 + 2/r"] = hi < Q(s * s, 4 * r ** 3) - Q(r ** 3, s * s) + Q(2, r)
        out["F2 > -r^3/s^2"] = lo > -Q(r ** 3, s * s)
    elif level == 3:
        out["F3 < s^3/(4r^4)"] = hi < Q(s ** 3, 4 * r ** 4)
        out["F3 > -r^4/s^3"] = lo > -Q(r ** 4, s ** 3)
    else:
        out["F4 < s^4/(4r^5)"] = hi < Q(s ** 4, 4 * r ** 5)
        out["F4 > -r^5/s^4"] = lo > -Q(r ** 5, s ** 4)
    return out


@dataclass(frozen=True)
class Contradiction:
    """A certified bound interval for F_i that misses the forced half-line F_i < threshold."""

    case: str
    level: int
    bound_lower: Fraction
    bound_upper: Fraction
    forced_upper: Fraction

    @property
    def disjoint(self) -> bool:
        return self.bound_lower > self.forced_upper


def large_negative_contradiction(verdict: PrsecVerdict, threshold=Q(-10 ** 7)) -> Contradiction:
    lo, _ = endpoints(verdict.lower)
    _, hi = endpoints(verdict.upper)
    return Contradiction(verdict.case, verdict.level, lo, hi, Q(threshold))


# ---------------------------------------------------------------------------
# θ versus log c / log b

@dataclass(frozen=True)
class GapVerdict:
    r: int
    theta: Fraction
    b: int
    c: int
    gap: object
    positive: bool
    below_inverse_r2: bool


def ceil_power(r: int, theta: Fraction) -> int:
    """⌈r^{2θ}⌉ exactly."""
    theta = Q(theta)
    p, q = theta.numerator, theta.denominator
    N = r ** (2 * p)
    root, exact = integer_nthroot(N, q)
    return int(root) if exact else int(root) + 1


def theta_gap(r: int, theta, ctx: PrecisionContext | None = None, c: int | None = None) -> GapVerdict:
    """Certify 0 < θ − log c/log b < 1/r² with b = r²+1, c = ⌈r^{2θ}⌉ + 1 by default."""
    ctx = ctx or default_context()
    theta = Q(theta)
    if r < 2:
        raise ValueError("need r >= 2")
    if not Q(12, 10) < theta < Q(205, 100):
        raise ValueError("need 1.2 < theta < 2.05")
    b = r * r + 1
    c = ceil_power(r, theta) + 1 if c is None else c
    iv = ctx.iv
    gap = ctx.interval(theta) - iv.log(iv.mpf(c)) / iv.log(iv.mpf(b))
    return GapVerdict(r, theta, b, c, gap, (gap > 0) is True,
                      (gap < ctx.interval(Q(1, r * r))) is True)


def leading_estimate(r: int, s: int) -> Fraction:
    """The leading size ¼·r^{θ−2} of F_1, which is s/(4r²) when s = r^θ."""
    return Q(s, 4 * r * r)
