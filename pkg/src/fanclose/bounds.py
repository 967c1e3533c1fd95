"""Upper and lower bounds on the index n, and the θ-sweep that combines them.

Upper bounds come from lower bounds for the linear form

    Λ1 = 2m·log β1 − 2l·log β2 + log β3,
    β1 = s + √c,  β2 = r + √b,  β3 = s√b / (r√c),

via Aleksentsev's theorem and Matveev's theorem.  Lower bounds are the
regime-dependent estimates n > g(b, c).  Everything is carried in natural
log space so that b and c may be far beyond float range; every inexact
quantity is an interval from a :class:`PrecisionContext`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import PrecisionExhausted, PreconditionTooSmall, RegimeAmbiguous, SideConditionFailed
from .numerics import PrecisionContext, default_context, endpoints, to_float
from .triple import TripleParams

ALEKSENTSEV_N_MIN = 250
ALEKSENTSEV_L_CONST = "6.005171e11"
ALEKSENTSEV_N_CONST = "1.5002e11"
B_LOWER = Fraction(1024 * 10 ** 10)          # b > 1.024·10^13
PR39_GUARD = 1000
FALLBACK_GUARD = 7
PR38_J0_RATIO = 7164532

# (mu_lo, mu_hi, K) for the quartic-root bounds; intervals are b^mu_lo <= c < b^mu_hi
PR39_CASES = (
    (Fraction(132, 100), Fraction(140, 100), "15.927", "i"),
    (Fraction(127, 100), Fraction(132, 100), "15.830", "ii"),
    (Fraction(122, 100), Fraction(127, 100), "15.387", "iii"),
    (Fraction(116, 100), Fraction(122, 100), "12.850", "iv"),
)

# rows of the final b-bounds, with the published log10 b for comparison
B_BOUND_ROWS = (
    ("i", Fraction(2), Fraction(293, 100), math.log10(6.89e32)),
    ("ii", Fraction(3, 2), Fraction(2), math.log10(1.26e49)),
    ("iii", Fraction(7, 5), Fraction(3, 2), math.log10(2.07e62)),
    ("iv", Fraction(13, 10), Fraction(7, 5), math.log10(6.26e73)),
    ("v", Fraction(1233, 1000), Fraction(13, 10), 69.0),
)


def _iv(ctx: PrecisionContext):
    return ctx.iv


def _num(ctx, x):
    """Interval for an int, Fraction, decimal string or interval."""
    if hasattr(x, "_mpi_"):
        return x
    if isinstance(x, str):
        return ctx.iv.mpf(x)
    return ctx.interval(Fraction(x))


def _log(ctx, x):
    """Natural log of a positive int/Fraction/interval, without forming huge floats."""
    iv = ctx.iv
    if isinstance(x, int) and x.bit_length() > 900:
        shift = x.bit_length() - 200
        head = iv._mpq((x >> shift, 1))
        top = iv._mpq(((x >> shift) + 1, 1))
        return iv.log(iv.make_mpf((head._mpi_[0], top._mpi_[1]))) + shift * iv.log(2)
    return iv.log(_num(ctx, x))


def _log1m_exp_neg(ctx, y):
    """log(1 − e^{−y}) for y > 0."""
    iv = ctx.iv
    return iv.log(1 - iv.exp(-y))


# ---------------------------------------------------------------------------
# the linear form

@dataclass(frozen=True)
class LinearFormContext:
    """Heights and log-data of Λ1 for one pair (b, c).

    ``r, s, t`` are the exact integers when built from a triple, else None
    (a proxy pair with r = √(b−1), s = √(c−1)).
    """

    log_b: object
    log_c: object
    log_alpha: object
    log_beta: object
    log_beta3: object
    log_s_sqrt_b: object
    b: int | None = None
    c: int | None = None
    r: int | None = None
    s: int | None = None
    t: int | None = None
    rho: int = 1

    @property
    def B1(self):
        return 2 * self.log_alpha

    @property
    def B2(self):
        return 2 * self.log_beta

    @property
    def B3(self):
        return 4 * self.log_s_sqrt_b

    @property
    def A1(self):
        return self.log_alpha / 2

    @property
    def A2(self):
        return self.log_beta / 2

    @property
    def A3(self):
        return self.log_s_sqrt_b

    @classmethod
    def from_logs(cls, log_b, log_c, ctx: PrecisionContext, **exact):
        """Build from ln b and ln c (intervals), with r = √(b−1), s = √(c−1)."""
        # log(s + √c) = ½ log c + log(1 + √(1 − 1/c))
        iv = ctx.iv
        one_b = iv.exp(-log_b)
        one_c = iv.exp(-log_c)
        log_alpha = log_c / 2 + iv.log(1 + iv.sqrt(1 - one_c))
        log_beta = log_b / 2 + iv.log(1 + iv.sqrt(1 - one_b))
        log_s = (log_c + iv.log(1 - one_c)) / 2
        log_r = (log_b + iv.log(1 - one_b)) / 2
        log_beta3 = log_s + log_b / 2 - log_r - log_c / 2
        return cls(log_b, log_c, log_alpha, log_beta, log_beta3, log_s + log_b / 2, **exact)

    @classmethod
    def from_bc(cls, b, c, ctx: PrecisionContext):
        if not 1 < b < c:
            raise ValueError("need 1 < b < c")
        return cls.from_logs(_log(ctx, b), _log(ctx, c), ctx,
                             b=int(b) if isinstance(b, int) else None,
                             c=int(c) if isinstance(c, int) else None)

    @classmethod
    def from_triple(cls, tp: TripleParams, ctx: PrecisionContext, rho: int = 1):
        iv = ctx.iv
        r, s = iv.mpf(tp.r), iv.mpf(tp.s)
        sb, sc = iv.sqrt(iv.mpf(tp.b)), iv.sqrt(iv.mpf(tp.c))
        return cls(_log(ctx, tp.b), _log(ctx, tp.c), iv.log(s + sc), iv.log(r + sb),
                   iv.log(s * sb / (r * sc)), iv.log(s * sb),
                   b=tp.b, c=tp.c, r=tp.r, s=tp.s, t=tp.t, rho=rho)


def beta3_height(tp: TripleParams, ctx: PrecisionContext):
    """Exact h(β3) = ½ log(s²b / gcd(r²c, s²b)); never exceeds B3/8·4 = log(s√b)."""
    g = math.gcd(tp.r ** 2 * tp.c, tp.s ** 2 * tp.b)
    return _log(ctx, tp.s ** 2 * tp.b // g) / 2


# ---------------------------------------------------------------------------
# Aleksentsev

def aleksentsev_constant(ctx: PrecisionContext, n: int = 3, D: int = 4):
    """5.3·n^{−n+1/2}(n+1)^{n+1}(n+8)²(n+5)·31.44ⁿ·D²·log(3nD)."""
    iv = ctx.iv
    nn = iv.mpf(n)
    return (iv.mpf("5.3") * nn ** (-n) * iv.sqrt(nn) * iv.mpf(n + 1) ** (n + 1)
            * iv.mpf(n + 8) ** 2 * (n + 5) * iv.mpf("31.44") ** n * D * D * iv.log(iv.mpf(3 * n * D)))


def aleksentsev_E(lf: LinearFormContext, m: int, l: int, ctx: PrecisionContext):
    """max over i, j of |b_i|/B_j + |b_j|/B_i, clamped below by 3."""
    iv = ctx.iv
    coeffs = (iv.mpf(2 * m), iv.mpf(2 * l), iv.mpf(1))
    heights = (lf.B1, lf.B2, lf.B3)
    best = iv.mpf(3)
    for i in range(3):
        for j in range(3):
            cand = coeffs[i] / heights[j] + coeffs[j] / heights[i]
            if (cand > best) is not False:
                best = iv.make_mpf((max(best._mpi_[0], cand._mpi_[0], key=_rawkey),
                                    max(best._mpi_[1], cand._mpi_[1], key=_rawkey)))
    return best


def _rawkey(raw):
    from mpmath import libmp
    return libmp.to_float(raw)


def aleksentsev_bound(lf: LinearFormContext, m: int, l: int, ctx: PrecisionContext | None = None):
    """Certified lower bound on log|Λ1| for 2m·log β1 − 2l·log β2 + log β3."""
    ctx = ctx or default_context()
    if l < ALEKSENTSEV_N_MIN:
        raise PreconditionTooSmall(f"l = {l} < {ALEKSENTSEV_N_MIN}")
    if m < 0:
        raise ValueError("m must be nonnegative")
    E = aleksentsev_E(lf, m, l, ctx)
    return -aleksentsev_constant(ctx) * ctx.iv.log(E) * lf.B1 * lf.B2 * lf.B3


def _fixed_point(g, start, ctx: PrecisionContext, rel=Fraction(1, 10 ** 12), max_iter=500):
    """Largest-solution bound for n < g(n) with g concave increasing.

    Iterates n ↦ upper(g(n)) from ``start``, then returns N slightly above
    the limit with g(N) < N certified.  Any n ≥ N then also has g(n) < n.
    """
    iv = ctx.iv
    n = iv.mpf(start)
    for _ in range(max_iter):
        nxt = g(n)
        hi = iv.mpf(nxt.b)
        if abs(to_float(hi) - to_float(n)) <= float(rel) * to_float(n):
            n = hi
            break
        n = hi
    else:
        raise PrecisionExhausted("fixed-point iteration did not settle")
    N = n * (1 + iv.mpf(10) ** -9) + 1
    N = iv.mpf(N.b)
    if not (g(N) < N) is True:
        raise PrecisionExhausted("could not certify the fixed point")
    return N


def aleksentsev_l_bound(lf: LinearFormContext, ctx: PrecisionContext | None = None):
    """l < 6.005171e11·log α·log(s√b)·log(2l/log β) + ¼·log(b/(b−1)); at least 250."""
    ctx = ctx or default_context()
    iv = ctx.iv
    K = iv.mpf(ALEKSENTSEV_L_CONST) * lf.log_alpha * lf.log_s_sqrt_b
    tail = -_log1m_exp_neg(ctx, lf.log_b) / 4

    def g(l):
        return K * iv.log(2 * l / lf.log_beta) + tail

    start = iv.mpf(ALEKSENTSEV_N_MIN)
    if (g(start) < start) is True:
        return start
    return _fixed_point(g, ALEKSENTSEV_N_MIN, ctx)


def _aleksentsev_n_log(log_b, log_c, ctx: PrecisionContext):
    iv = ctx.iv
    l4 = iv.log(iv.mpf(4))
    L4b, L4c = log_b + l4, log_c + l4
    K = iv.mpf(ALEKSENTSEV_N_CONST) * L4b * L4c
    ratio = 4 * (log_b + log_c) / (log_b * L4b)

    def g(n):
        return K * iv.log(n * ratio)

    start = iv.mpf(ALEKSENTSEV_N_MIN)
    if (g(start) < start) is True:
        return start
    return _fixed_point(g, ALEKSENTSEV_N_MIN, ctx)


def upper_n_aleksentsev(b, c, ctx: PrecisionContext | None = None):
    """Certified N with n < N for every n ≥ 250 allowed by the Aleksentsev corollary."""
    ctx = ctx or default_context()
    return _aleksentsev_n_log(_log(ctx, b), _log(ctx, c), ctx)


def aleksentsev_rhs(b, c, n, ctx: PrecisionContext | None = None):
    """Right side 1.5002e11·log(4b)·log(4c)·log(4n·log(bc)/(log b·log(4b)))."""
    ctx = ctx or default_context()
    iv = ctx.iv
    lb, lc = _log(ctx, b), _log(ctx, c)
    l4 = iv.log(iv.mpf(4))
    return (iv.mpf(ALEKSENTSEV_N_CONST) * (lb + l4) * (lc + l4)
            * iv.log(4 * _num(ctx, n) * (lb + lc) / (lb * (lb + l4))))


# ---------------------------------------------------------------------------
# Matveev

@dataclass(frozen=True)
class MatveevConstants:
    E: object
    E1: object
    C3star: object
    C3: object
    C1: object
    C2: object
    T: object
    C0: object
    Omega: object
    omega: object
    W0: object = None
    S: object = None

    def as_dict(self) -> dict:
        return {k: (None if v is None else to_float(v)) for k, v in self.__dict__.items()}


def matveev_base_constants(ctx: PrecisionContext) -> dict:
    """The choices that do not depend on (b, c): E, E1, C3*, C3, C1, C2."""
    iv = ctx.iv
    E = (4 + iv.mpf(10) ** -15) / 12
    C3 = iv.mpf(3)
    l2 = iv.log(iv.mpf(2))
    C1 = (1 + iv.exp(iv.mpf(-6)) / 148) * (3 * l2 + 2) * 4 / (3 * C3)
    C2 = 16 * (6 + 5 / (3 * l2 + 2)) * iv.exp(iv.mpf(6)) / (iv.sqrt(iv.mpf(3)) * C3)
    return {"E": E, "E1": iv.mpf("0.033653"), "C3star": iv.mpf("2.8"), "C3": C3, "C1": C1, "C2": C2}


def matveev_constants(lf: LinearFormContext, ctx: PrecisionContext) -> MatveevConstants:
    iv = ctx.iv
    k = matveev_base_constants(ctx)
    E, C1, C2, C3 = k["E"], k["C1"], k["C2"], k["C3"]
    e = iv.e
    Omega = lf.A1 * lf.A2 * lf.A3
    D = 4
    omega = Omega * (D * C1 / e) ** 3 * C3 * iv.exp(C3) * E * e / 2
    T = 96 * E * e * C1 ** 2 * C2 * lf.A1 * lf.A2
    lt = iv.log(T)
    llt = iv.log(lt)
    lllt = iv.log(llt)
    C0 = lt + llt + lllt + 2 * iv.log(lllt)
    return MatveevConstants(E=E, E1=k["E1"], C3star=k["C3star"], C3=C3, C1=C1, C2=C2,
                            T=T, C0=C0, Omega=Omega, omega=omega)


def matveev_S(mc: MatveevConstants, lf: LinearFormContext, Del, n, ctx: PrecisionContext):
    iv = ctx.iv
    lb2 = lf.log_beta
    Del = _num(ctx, Del)
    inner = ((Del + 1) * (1 / (2 * mc.C0 * mc.C2 * mc.omega) + 1 / (6 * mc.C1 * lf.A3)) * n
             + 1 / (6 * mc.C1 * lb2))
    return 1 + iv.log(1 + inner * (1 + lb2))


def matveev_W0(mc: MatveevConstants, lf: LinearFormContext, l, ctx: PrecisionContext):
    iv = ctx.iv
    l = _num(ctx, l)
    inner = l / (2 * mc.C0 * mc.C2 * mc.omega) + (1 / lf.log_beta + l / lf.A3) / (6 * mc.C1)
    return 1 + iv.log(1 + inner * (1 + lf.log_alpha))


def matveev_side_conditions(mc: MatveevConstants, lf: LinearFormContext, W0, ctx: PrecisionContext) -> dict:
    """Each hypothesis of Matveev's theorem mapped to True (certified) or False."""
    iv = ctx.iv
    C0, C1, C2, C3, E1, om = mc.C0, mc.C1, mc.C2, mc.C3, mc.E1, mc.omega
    maxA = lf.A1
    for a in (lf.A2, lf.A3):
        if (a > maxA) is not False:
            maxA = iv.make_mpf((max(maxA._mpi_[0], a._mpi_[0], key=_rawkey),
                                max(maxA._mpi_[1], a._mpi_[1], key=_rawkey)))
    mn = C0 if (C0 < W0) is True else W0 if (W0 < C0) is True else iv.make_mpf(
        (min(C0._mpi_[0], W0._mpi_[0], key=_rawkey), min(C0._mpi_[1], W0._mpi_[1], key=_rawkey)))
    inner = max((C0 * om / (4 * C1 * lf.A3), C0, 2 * E1 * C3 / C1), key=lambda x: to_float(x))
    e = iv.e
    return {
        "C3* exp(C3*) E e / 2 >= e^3": (mc.C3star * iv.exp(mc.C3star) * mc.E * e / 2 >= e ** 3) is True,
        "C0 >= 2C3": (C0 >= 2 * C3) is True,
        "C0 >= log(4 C2 max{C0 w/(4 C1 A3), C0, 2 E1 C3/C1})": (C0 >= iv.log(4 * C2 * inner)) is True,
        "C0 >= log(C0 T)": (C0 >= iv.log(C0 * mc.T)) is True,
        "W0 >= 2C3": (W0 >= 2 * C3) is True,
        "2w min{C0,W0} >= C3": (2 * om * mn >= C3) is True,
        "w min{C0,W0} >= 2C1C3 max A": (om * mn >= 2 * C1 * C3 * maxA) is True,
        "3(4C1)^2 4C0 Omega >= C3 max A": (3 * (4 * C1) ** 2 * 4 * C0 * mc.Omega >= C3 * maxA) is True,
    }


@dataclass(frozen=True)
class MatveevResult:
    n_upper: object
    constants: MatveevConstants
    side_conditions: dict


def _matveev_log(log_b, log_c, del_, Del, n_seed, ctx: PrecisionContext, lf=None) -> MatveevResult:
    iv = ctx.iv
    del_, Del = Fraction(del_), Fraction(Del)
    if not Fraction(116, 100) < del_ < Del < Fraction(41, 10):
        raise ValueError("need 1.16 < del < Del < 4.1")
    if (log_c < _num(ctx, del_) * log_b) is True or (log_c > _num(ctx, Del) * log_b) is True:
        raise ValueError("c must lie in [b^del, b^Del]")
    lf = lf or LinearFormContext.from_logs(log_b, log_c, ctx)
    mc = matveev_constants(lf, ctx)
    l4 = iv.log(iv.mpf(4))
    K = 17472 * mc.C0 * mc.C1 ** 3 * mc.C2 * mc.E * iv.e * (log_b + l4) * (log_c + l4)

    def g(n):
        return K * matveev_S(mc, lf, Del, n, ctx)

    seed = max(int(n_seed), 1) if not hasattr(n_seed, "_mpi_") else n_seed
    N = _fixed_point(g, seed if not hasattr(seed, "_mpi_") else seed.b, ctx)
    S = matveev_S(mc, lf, Del, N, ctx)
    mc = MatveevConstants(**{**mc.__dict__, "S": S, "W0": S})
    side = matveev_side_conditions(mc, lf, S, ctx)
    bad = [k for k, ok in side.items() if not ok]
    if bad:
        raise SideConditionFailed(f"Matveev hypothesis fails: {bad[0]}")
    return MatveevResult(N, mc, side)


def matveev_upper_n(b, c, del_, Del, n_seed=ALEKSENTSEV_N_MIN,
                    ctx: PrecisionContext | None = None) -> MatveevResult:
    """Certified n-bound from Matveev's theorem for b^del ≤ c ≤ b^Del."""
    ctx = ctx or default_context()
    return _matveev_log(_log(ctx, b), _log(ctx, c), del_, Del, n_seed, ctx)


# ---------------------------------------------------------------------------
# lower bounds on n

@dataclass(frozen=True)
class LowerBound:
    """n > exp(log_value); ``sub`` holds every candidate that entered the max."""

    log_value: object
    method: str
    sub: dict = field(default_factory=dict)
    guard: int | None = None
    fallback: bool = False

    def value(self, ctx: PrecisionContext):
        return ctx.iv.exp(self.log_value)


class _NoBound:
    pass


def _window_candidates(lb, c_lo, c_hi, mu_lo, mu_hi, ctx: PrecisionContext):
    """Lower-bound candidates (natural log of n) valid for every c with
    c_lo < log c < c_hi, given log b = lb.

    mu_lo, mu_hi are exact rationals (or None) used to decide the regime
    without rounding; c_lo and c_hi are the matching log c intervals.
    """
    iv = ctx.iv
    l = lambda x: iv.log(iv.mpf(x))
    out = {}
    # c > b^3
    if mu_lo is not None and mu_lo >= 3:
        cand = min((lb, l("0.125") + (c_lo - lb) / 2), key=lambda x: to_float(x))
        out["prmarg"] = cand
    # c < b^3: the rho/j analysis
    if mu_hi is not None and mu_hi <= 3:
        cases = {"rho=+1": l("0.5") + (c_lo - lb) / 2,
                 "rho=-1, j>0": l("0.5") + (l(2) + c_lo - lb) / 2}
        j0_possible = not (c_hi <= l(PR38_J0_RATIO) + 2 * lb) is True
        if j0_possible:
            fifty = 50 * l(10)
            if mu_lo >= Fraction(5, 2) and (c_lo >= fifty) is True:
                cases["rho=-1, j=0"] = 2 * c_lo / 11
            elif mu_hi <= Fraction(5, 2):
                cases["rho=-1, j=0"] = l("0.214") + (c_lo - lb) / 3
            else:
                cases["rho=-1, j=0"] = _NoBound
        if _NoBound in cases.values():
            out["pr3.8"] = None
        else:
            out["pr3.8"] = min(cases.values(), key=lambda x: to_float(x))
        out["pr3.8 cases"] = cases
        # 4b^2 < c < b^3
        if (c_lo >= l(4) + 2 * lb) is True:
            out["prmarg2"] = l("0.125") + c_lo - 2 * lb
    # c < 4b^2
    if (c_hi <= l(4) + 2 * lb) is True:
        out["pr3.1"] = l("0.707") + (c_lo - lb) / 2
    for a, bb, K, tag in PR39_CASES:
        if mu_lo is not None and a <= mu_lo and mu_hi <= bb:
            out[f"pr3.9 {tag}"] = (l(K) + 2 * lb - c_hi) / 4
    return out


def _pick(cands: dict, ctx: PrecisionContext, fallback: bool) -> LowerBound:
    iv = ctx.iv
    plain = {k: v for k, v in cands.items()
             if not k.startswith("pr3.9") and k != "pr3.8 cases" and v is not None}
    best_key, best = None, None
    for k, v in plain.items():
        if best is None or to_float(v) > to_float(best):
            best_key, best = k, v
    guard_ok = best is not None and (best >= iv.log(iv.mpf(PR39_GUARD))) is True
    used_fallback = False
    for k, v in cands.items():
        if not k.startswith("pr3.9"):
            continue
        if guard_ok or fallback:
            if best is None or to_float(v) > to_float(best):
                best_key, best = k, v
                used_fallback = not guard_ok
    if best is None:
        best_key, best = "none", iv.mpf(0)
    sub = {k: v for k, v in cands.items() if k != "pr3.8 cases"}
    sub.update({f"pr3.8 {k}": v for k, v in cands.get("pr3.8 cases", {}).items()})
    guard = PR39_GUARD if best_key.startswith("pr3.9") else None
    if used_fallback:
        guard = FALLBACK_GUARD
    return LowerBound(best, best_key, sub, guard, used_fallback)


def lower_n(b, c, ctx: PrecisionContext | None = None, fallback: bool = False) -> LowerBound:
    """Largest applicable lower bound n > exp(log_value) for the exact pair (b, c)."""
    ctx = ctx or default_context()
    if not 1 < b < c:
        raise ValueError("need 1 < b < c")
    if c == b ** 3 or c == 4 * b * b:
        raise RegimeAmbiguous(f"(b, c) = ({b}, {c}) lies on a regime boundary")
    lb, lc = _log(ctx, b), _log(ctx, c)
    mu_lo = mu_hi = None
    if c > b ** 3:
        mu_lo, mu_hi = Fraction(3), Fraction(10 ** 9)
    else:
        mu_hi = Fraction(3)
        mu_lo = Fraction(0)
        for a, bb, _, _ in PR39_CASES:
            if _c_ge_b_pow(c, b, a) and not _c_ge_b_pow(c, b, bb):
                mu_lo, mu_hi = a, bb
                break
        else:
            # locate c against b^{5/2} for the j = 0 split
            if _c_ge_b_pow(c, b, Fraction(5, 2)):
                mu_lo = Fraction(5, 2)
            else:
                mu_hi = Fraction(5, 2) if not _c_ge_b_pow(c, b, Fraction(5, 2)) else mu_hi
    return _pick(_window_candidates(lb, lc, lc, mu_lo, mu_hi, ctx), ctx, fallback)


def _c_ge_b_pow(c: int, b: int, mu: Fraction) -> bool:
    """c ≥ b^mu, exactly."""
    return c ** mu.denominator >= b ** mu.numerator


def lower_n_window(log_b, mu_lo: Fraction, mu_hi: Fraction, ctx: PrecisionContext,
                   fallback: bool = False) -> LowerBound:
    """Lower bound valid for all c with b^mu_lo < c < b^mu_hi."""
    return _pick(_window_candidates(log_b, _num(ctx, mu_lo) * log_b, _num(ctx, mu_hi) * log_b,
                                    Fraction(mu_lo), Fraction(mu_hi), ctx), ctx, fallback)


# ---------------------------------------------------------------------------
# the quadratic form of the quartic-root bounds

@dataclass(frozen=True)
class PhiCertificate:
    value: int
    X: int
    Y: int
    discriminant: int
    positive: bool


def phi_form_check(f: int, n: int, m: int, rho: int) -> PhiCertificate:
    """Φ = (e²+2e+5)X² + 2(e−1)XY + Y², e = f²−1, X = 2n²+ρn, Y = 2m²−ρf²n."""
    if n <= 0:
        raise ValueError("n must be positive")
    if rho not in (1, -1):
        raise ValueError("rho must be +1 or -1")
    e = f * f - 1
    X = 2 * n * n + rho * n
    Y = 2 * m * m - rho * f * f * n
    a, h, c = e * e + 2 * e + 5, e - 1, 1
    disc = 4 * h * h - 4 * a * c
    if h * h - a * c != -4 * f * f:
        raise AssertionError("discriminant identity fails")
    val = a * X * X + 2 * h * X * Y + c * Y * Y
    return PhiCertificate(val, X, Y, disc, val > 0)


# ---------------------------------------------------------------------------
# A = f² + b

@dataclass(frozen=True)
class ABoundCheck:
    name: str
    applicable: bool
    lower: Fraction | None
    upper: Fraction | None
    holds: bool | None


@dataclass(frozen=True)
class ABoundRecord:
    b: int
    c: int
    A: int
    regime: str
    checks: tuple[ABoundCheck, ...]

    @property
    def ok(self) -> bool:
        return all(ch.holds is not False for ch in self.checks)

    @property
    def vacuous(self) -> bool:
        return not any(ch.applicable for ch in self.checks)


def a_bounds(tp: TripleParams, b_min: Fraction = B_LOWER) -> ABoundRecord:
    """Check A against its analytic bounds; every bound needs b above ``b_min``.

    Below ``b_min`` the record lists each bound as not applicable.
    """
    b, c, A = tp.b, tp.c, tp.A
    big = b > b_min
    if c > b ** 3:
        regime = "c>b^3"
    elif c < 4 * b * b:
        regime = "c<4b^2"
    else:
        regime = "4b^2<=c<=b^3"
    out = []
    lo = Fraction(c - 5, 4 * b) + b
    hi = (Fraction(c, b) + 4 * b) / Fraction(3999, 1000)
    out.append(ABoundCheck("(c-5)/(4b)+b < A < (c/b+4b)/3.999", big, lo, hi,
                           (lo < A < hi) if big else None))
    app = big and c < b ** 3
    u = (Fraction(c, 4 * b) + b) * (1 + Fraction(1, b))
    out.append(ABoundCheck("A < (c/(4b)+b)(1+1/b)", app, None, u, (A < u) if app else None))
    app = big and c < 4 * b * b
    out.append(ABoundCheck("A < 2b", app, None, Fraction(2 * b), (A < 2 * b) if app else None))
    app = big and c > b ** 3
    u = Fraction(c) / (Fraction(39999, 10000) * b)
    out.append(ABoundCheck("A < c/(3.9999b)", app, None, u, (A < u) if app else None))
    return ABoundRecord(b, c, A, regime, tuple(out))


def congA_value(b: int, c: int, A: int, n: int, m: int, rho: int) -> int:
    """2(bn² − m²) + ρAn; a multiple of c whenever (m, n) index a common solution."""
    return 2 * (b * n * n - m * m) + rho * A * n


def pell_system_solutions(b: int, c: int, bound: int) -> list[tuple[int, int, int]]:
    """All (x, y, z) with 0 ≤ x, y, z ≤ bound solving the three Pell equations
    z² − cx² = c−1, bz² − cy² = c−b, y² − bx² = b−1, by direct search over x."""
    out = []
    for x in range(bound + 1):
        y2 = b * x * x + b - 1
        z2 = c * x * x + c - 1
        y, z = math.isqrt(y2), math.isqrt(z2)
        if y * y == y2 and z * z == z2 and y <= bound and z <= bound:
            if b * z * z - c * y * y == c - b:
                out.append((x, y, z))
    return out


# ---------------------------------------------------------------------------
# the master-equation bound on f and the log-ratio lemma

def f_upper_from_master(r: int, s: int) -> Fraction:
    """s/(2r) + r/(2s), an exact upper bound on f."""
    if not 1 <= r < s:
        raise ValueError("need s > r >= 1")
    return Fraction(s, 2 * r) + Fraction(r, 2 * s)


def log_ratio_lemma(tp: TripleParams, ctx: PrecisionContext | None = None) -> bool:
    """Certified log(s+√c)/log(r+√b) < log c/log b."""
    ctx = ctx or default_context()
    lf = LinearFormContext.from_triple(tp, ctx)
    return (lf.log_alpha * lf.log_b < lf.log_c * lf.log_beta) is True


# ---------------------------------------------------------------------------
# the sweep

@dataclass(frozen=True)
class BoundRow:
    mu_lo: Fraction
    mu_hi: Fraction
    n_upper: object
    n_lower: object
    log10_b: object
    log10_c: object
    method: str
    upper_method: str
    fallback: bool = False

    def as_csv(self) -> dict:
        return {
            "mu_lo": str(self.mu_lo),
            "mu_hi": str(self.mu_hi),
            "method": self.method,
            "upper_method": self.upper_method,
            "n_upper": f"{to_float(self.n_upper):.6e}",
            "log10_b": f"{to_float(self.log10_b):.6f}",
            "log10_c": f"{to_float(self.log10_c):.6f}",
            "fallback": self.fallback,
        }


def _excluded(log_b, mu_lo, mu_hi, upper_fn, ctx, fallback):
    """True when the lower bound certainly exceeds the upper bound at this b."""
    low = lower_n_window(log_b, mu_lo, mu_hi, ctx, fallback)
    up = upper_fn(log_b)
    return (low.log_value > ctx.iv.log(up)) is True, low, up


def _bisect_b(mu_lo, mu_hi, upper_fn, ctx, fallback, lo_log, hi_log, steps):
    iv = ctx.iv
    ok, low, up = _excluded(lo_log, mu_lo, mu_hi, upper_fn, ctx, fallback)
    if ok:
        return lo_log, low, up
    ok_hi, _, _ = _excluded(hi_log, mu_lo, mu_hi, upper_fn, ctx, fallback)
    if not ok_hi:
        raise PrecisionExhausted("upper end of the b-range is not excluded; widen the search")
    lo, hi = lo_log, hi_log
    for _ in range(steps):
        mid = iv.mpf(((lo + hi) / 2).mid)
        if _excluded(mid, mu_lo, mu_hi, upper_fn, ctx, fallback)[0]:
            hi = mid
        else:
            lo = mid
    _, low, up = _excluded(hi, mu_lo, mu_hi, upper_fn, ctx, fallback)
    return hi, low, up


def sweep_interval(mu_lo: Fraction, mu_hi: Fraction, ctx: PrecisionContext | None = None,
                   refine_passes: int = 1, fallback: bool = False,
                   log10_b_max: int = 600, steps: int = 48) -> BoundRow:
    """Largest log b not excluded on b^mu_lo < c < b^mu_hi.

    The Aleksentsev bound is applied first; each refine pass then applies
    the Matveev bound seeded with the current n-bound, keeping the smaller.
    """
    ctx = ctx or default_context(30)
    iv = ctx.iv
    mu_lo, mu_hi = Fraction(mu_lo), Fraction(mu_hi)
    ln10 = iv.log(iv.mpf(10))
    lo_log = iv.log(ctx.interval(B_LOWER))
    hi_log = log10_b_max * ln10

    def al(log_b):
        return _aleksentsev_n_log(log_b, _num(ctx, mu_hi) * log_b, ctx)

    x, low, up = _bisect_b(mu_lo, mu_hi, al, ctx, fallback, lo_log, hi_log, steps)
    method_up = "aleksentsev"
    for _ in range(refine_passes):
        seed = al(x)
        Del = max(mu_hi, Fraction(117, 100))
        del_ = min(mu_lo, Del - Fraction(1, 10 ** 6))
        del_ = max(del_, Fraction(116, 100) + Fraction(1, 10 ** 9))

        def mat(log_b, seed=seed, del_=del_, Del=Del):
            try:
                n_mat = _matveev_log(log_b, _num(ctx, Del) * log_b, del_, Del, seed, ctx).n_upper
            except SideConditionFailed:
                return al(log_b)
            n_al = al(log_b)
            return n_mat if to_float(n_mat) < to_float(n_al) else n_al

        x2, low2, up2 = _bisect_b(mu_lo, mu_hi, mat, ctx, fallback, lo_log, x, steps)
        if to_float(x2) <= to_float(x):
            x, low, up = x2, low2, up2
            method_up = "matveev"
    return BoundRow(mu_lo, mu_hi, up, low.log_value, x / ln10, _num(ctx, mu_hi) * x / ln10,
                    low.method, method_up, low.fallback)


# regime breakpoints in μ; subintervals never straddle one of these
BREAKPOINTS = (Fraction(116, 100), Fraction(122, 100), Fraction(127, 100), Fraction(132, 100),
               Fraction(140, 100), Fraction(2), Fraction(5, 2), Fraction(3))


def partition(theta_lo, theta_hi, step) -> list[tuple[Fraction, Fraction]]:
    """Cover [theta_lo, theta_hi) by pieces of the grid step·Z, cut at regime breakpoints.

    Pieces are at most ``step`` long; they are shorter only at the two ends
    and next to a breakpoint that is off the grid.
    """
    theta_lo, theta_hi, step = Fraction(theta_lo), Fraction(theta_hi), Fraction(step)
    if step <= 0:
        raise ValueError("step must be positive")
    cuts = {theta_lo, theta_hi}
    k = math.floor(theta_lo / step) + 1
    while k * step < theta_hi:
        cuts.add(k * step)
        k += 1
    cuts.update(p for p in BREAKPOINTS if theta_lo < p < theta_hi)
    pts = sorted(cuts)
    return list(zip(pts[:-1], pts[1:]))


def sweep(theta_lo, theta_hi, step, ctx: PrecisionContext | None = None,
          refine_passes: int = 1, fallback: bool = False) -> list[BoundRow]:
    theta_lo, theta_hi = Fraction(theta_lo), Fraction(theta_hi)
    if theta_lo == theta_hi:
        return []
    if not Fraction(116, 100) <= theta_lo < theta_hi <= Fraction(41, 10):
        raise ValueError("need 1.16 <= theta_lo < theta_hi <= 4.1")
    return [sweep_interval(a, b, ctx, refine_passes, fallback)
            for a, b in partition(theta_lo, theta_hi, step)]


def aggregate(rows: list[BoundRow], table=B_BOUND_ROWS) -> dict:
    """Per published row: maximal log10 b over the subintervals inside it."""
    out = {}
    for name, lo, hi, published in table:
        inside = [r for r in rows if lo <= r.mu_lo and r.mu_hi <= hi]
        if not inside:
            continue
        worst = max(inside, key=lambda r: to_float(r.log10_b))
        out[name] = {
            "mu_range": (str(lo), str(hi)),
            "log10_b": to_float(worst.log10_b),
            "log10_c": max(to_float(r.log10_c) for r in inside),
            "published_log10_b": published,
            "worst_mu": str(worst.mu_lo),
            "fallback": any(r.fallback for r in inside),
        }
    return out
