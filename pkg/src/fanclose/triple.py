"""Exact parameters of a D(−1)-triple {1, b, c} and the F/P sequences.

With b = r²+1, c = s²+1 and bc − 1 = t², put f = t − rs.  Then

    r² + s² = 2frs + f²,   A = (2b−1)c − 2rst = f² + b,
    F = s − 2rf,           sF = f² − r².

Nothing in this module touches floating point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NotATriple

FSEQ_MAX = 16


@dataclass(frozen=True)
class TripleParams:
    r: int
    s: int
    t: int
    f: int
    b: int
    c: int
    A: int
    F: int

    def __post_init__(self):
        r, s, t, f, b, c, A, F = (self.r, self.s, self.t, self.f,
                                  self.b, self.c, self.A, self.F)
        checks = {
            "b = r^2+1": b == r * r + 1,
            "c = s^2+1": c == s * s + 1,
            "1 < b < c": 1 < b < c,
            "bc-1 = t^2": b * c - 1 == t * t,
            "t = rs+f": t == r * s + f,
            "f >= 1": f >= 1,
            "master equation": r * r + s * s == 2 * f * r * s + f * f,
            "A = (2b-1)c-2rst": A == (2 * b - 1) * c - 2 * r * s * t,
            "A = f^2+b": A == f * f + b,
            "F = s-2rf": F == s - 2 * r * f,
            "sF = f^2-r^2": s * F == f * f - r * r,
        }
        bad = [k for k, ok in checks.items() if not ok]
        if bad:
            raise ValueError(f"TripleParams invariants violated: {', '.join(bad)}")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("r", "s", "t", "f", "b", "c", "A", "F")}


def build_triple(r: int, s: int) -> TripleParams:
    """TripleParams for (r, s), or NotATriple when (r²+1)(s²+1) − 1 is not a square."""
    if r < 1 or s <= r:
        raise ValueError("need 1 <= r < s")
    b, c = r * r + 1, s * s + 1
    t = math.isqrt(b * c - 1)
    if t * t != b * c - 1:
        raise NotATriple(f"(r, s) = ({r}, {s}): bc - 1 = {b * c - 1} is not a square")
    f = t - r * s
    return TripleParams(r, s, t, f, b, c, f * f + b, s - 2 * r * f)


def triple_from_master(r: int, s: int, f: int) -> TripleParams:
    """TripleParams from a solution of the master equation (no square root needed)."""
    if r * r + s * s != 2 * f * r * s + f * f:
        raise NotATriple(f"({r}, {s}, {f}) does not solve the master equation")
    b, c = r * r + 1, s * s + 1
    return TripleParams(r, s, r * s + f, f, b, c, f * f + b, s - 2 * r * f)


@dataclass(frozen=True)
class FClassification:
    """Sign of F together with every condition the sign lemma ties to it.

    ``zero``, ``positive`` and ``negative`` each list the five conditions
    (F vs 0, s vs 2rf, f vs r, s vs 2r², and the reversed s vs 2f²) that
    must agree.  ``c_lt_4b2`` is tied to f < r only when F ≠ 0: the
    triples with F = 0 have f = r and c = 4r⁴+1 < 4b².
    """

    F: int
    zero: tuple[bool, ...]
    positive: tuple[bool, ...]
    negative: tuple[bool, ...]
    c_lt_4b2: bool
    gap_ok: bool

    @property
    def sign(self) -> int:
        return (self.F > 0) - (self.F < 0)

    @property
    def consistent(self) -> bool:
        blocks_ok = all(len(set(blk)) == 1 for blk in (self.zero, self.positive, self.negative))
        c_split_ok = self.F == 0 or self.c_lt_4b2 == self.negative[2]
        return blocks_ok and c_split_ok and self.gap_ok

    def as_dict(self) -> dict:
        names = ("F", "s vs 2rf", "f vs r", "s vs 2r^2", "s vs 2f^2")
        return {
            "sign": self.sign,
            "zero": dict(zip(names, self.zero)),
            "positive": dict(zip(names, self.positive)),
            "negative": dict(zip(names, self.negative)),
            "c_lt_4b2": self.c_lt_4b2,
            "gap_ok": self.gap_ok,
            "consistent": self.consistent,
        }


def classify_F(tp: TripleParams) -> FClassification:
    r, s, f, F, b, c = tp.r, tp.s, tp.f, tp.F, tp.b, tp.c
    if f > r:
        gap_ok = f > 2 * r * F >= 2 * r
    elif f < r:
        gap_ok = 0 > F > -2 * f * r
    else:
        gap_ok = F == 0
    return FClassification(
        F=F,
        zero=(F == 0, s == 2 * r * f, f == r, s == 2 * r * r, s == 2 * f * f),
        positive=(F > 0, s > 2 * r * f, f > r, s > 2 * r * r, s < 2 * f * f),
        negative=(F < 0, s < 2 * r * f, f < r, s < 2 * r * r, s > 2 * f * f),
        c_lt_4b2=c < 4 * b * b,
        gap_ok=gap_ok)


def p_sequence(f: int, N: int) -> list[int]:
    """P_{-1}, P_0, ..., P_N with P_{-1}=0, P_0=1, P_{i+1} = 2f·P_i − P_{i-1}."""
    P = [0, 1]
    for _ in range(N):
        P.append(2 * f * P[-1] - P[-2])
    return P


@dataclass(frozen=True)
class FSequence:
    """F and P stored from index −1; use :meth:`F_at`/:meth:`P_at` to index from −1."""

    f: int
    F: tuple[int, ...]
    P: tuple[int, ...]

    def F_at(self, i: int) -> int:
        return self.F[i + 1]

    def P_at(self, i: int) -> int:
        return self.P[i + 1]

    @property
    def N(self) -> int:
        return len(self.F) - 2


def f_sequence(tp: TripleParams, N: int, max_N: int = FSEQ_MAX) -> FSequence:
    if N < 0 or N > max_N:
        raise ValueError(f"N must lie in [0, {max_N}]")
    r, s, f = tp.r, tp.s, tp.f
    F = [-s, -r]
    for _ in range(N):
        F.append(2 * f * F[-1] - F[-2])
    P = p_sequence(f, N)
    seq = FSequence(f, tuple(F), tuple(P))
    _check_fsequence(seq, r, s)
    return seq


def _check_fsequence(seq: FSequence, r: int, s: int):
    f = seq.f
    for i in range(-1, seq.N):
        a, b = seq.F_at(i), seq.F_at(i + 1)
        if a * a - 2 * f * a * b + b * b != f * f:
            raise AssertionError(f"F-identity fails at i={i}")
    for i in range(0, seq.N + 1):
        if seq.F_at(i) != seq.P_at(i - 1) * s - seq.P_at(i) * r:
            raise AssertionError(f"F = P s - P r fails at i={i}")
    for i in range(1, seq.N + 1):
        if seq.P_at(i - 1) ** 2 - seq.P_at(i - 2) * seq.P_at(i) != 1:
            raise AssertionError(f"P determinant fails at i={i}")
        if seq.F_at(i) == 0 and (r != seq.P_at(i - 1) * f or s != seq.P_at(i) * f):
            raise AssertionError(f"F_{i} = 0 but (r, s) is not (P_{i-1} f, P_{i} f)")


def le2f_holds(seq: FSequence, i: int) -> bool | None:
    """F_i² − F_{i−1}F_{i+1} = f² whenever F_{i−1}F_{i+1} > 0 (None if not applicable)."""
    a, b, c = seq.F_at(i - 1), seq.F_at(i), seq.F_at(i + 1)
    if a * c <= 0:
        return None
    return b * b - a * c == seq.f * seq.f
