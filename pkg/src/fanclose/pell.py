"""Pell units, fundamental solution classes and orbit generation.

All arithmetic is exact.  Box conditions are checked with squared integer
inequalities, never with real square roots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .errors import InvalidD
from .numerics import is_square

# default cap on the coordinate that maps to s: c < 10^99 gives s < 10^49.5
DEFAULT_C_CAP = 10 ** 99


@dataclass(frozen=True)
class PellUnit:
    D: int
    x1: int
    y1: int

    def __post_init__(self):
        if self.x1 * self.x1 - self.D * self.y1 * self.y1 != 1:
            raise ValueError(f"({self.x1}, {self.y1}) is not a unit for D={self.D}")

    def mul(self, x, y, k=1):
        """(x + y√D)·(x1 + y1√D)^k for k ≥ 0."""
        for _ in range(k):
            x, y = x * self.x1 + self.D * y * self.y1, x * self.y1 + y * self.x1
        return x, y


@dataclass(frozen=True)
class FundamentalClass:
    f: int
    f1: int
    w0: int
    u0: int
    zeta: int

    @property
    def D(self) -> int:
        return self.f * self.f - 1

    def in_box(self) -> bool:
        f, f1, w0, u0 = self.f, self.f1, self.w0, self.u0
        return (w0 * w0 - self.D * u0 * u0 == f1 * f1
                and f1 <= w0 and 2 * w0 * w0 <= f1 * f1 * (f + 1)
                and 0 <= u0 and 2 * (f + 1) * u0 * u0 <= f1 * f1)


@dataclass(frozen=True)
class PellOrbit:
    """Orbit of (x0 + zeta·y0·√D) under the unit, capped on max(x, y)."""

    D: int
    x0: int
    y0: int
    zeta: int
    unit: PellUnit
    cap: int

    @classmethod
    def from_class(cls, fc: FundamentalClass, cap: int, unit: PellUnit | None = None):
        unit = unit or PellUnit(fc.D, fc.f, 1)
        return cls(fc.D, fc.w0, fc.u0, fc.zeta, unit, cap)

    @property
    def norm(self) -> int:
        return self.x0 * self.x0 - self.D * self.y0 * self.y0


def fundamental_unit(D: int) -> PellUnit:
    """Minimal positive solution of x² − D·y² = 1 from the periodic expansion of √D."""
    if not isinstance(D, int) or D < 2:
        raise InvalidD(f"D must be an integer >= 2, got {D!r}")
    a0 = math.isqrt(D)
    if a0 * a0 == D:
        raise InvalidD(f"D={D} is a perfect square")
    m, d, a = 0, 1, a0
    p_prev, p = 1, a0
    q_prev, q = 0, 1
    while p * p - D * q * q != 1:
        m = d * a - m
        d = (D - m * m) // d
        a = (a0 + m) // d
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    return PellUnit(D, p, q)


def frattini_classes(f: int, f1: int) -> list[FundamentalClass]:
    """Classes (w0, u0, zeta) of W² − (f²−1)U² = f1² inside the box

        f1 ≤ w0 ≤ f1·√((f+1)/2),   0 ≤ u0 ≤ f1/√(2(f+1)).

    For u0 = 0 only zeta = +1 is returned.
    """
    if f < 2 or f1 < 1:
        raise ValueError("need f >= 2 and f1 >= 1")
    D = f * f - 1
    N = f1 * f1
    out = []
    u0 = 0
    while 2 * (f + 1) * u0 * u0 <= N:
        w2 = N + D * u0 * u0
        if is_square(w2):
            w0 = math.isqrt(w2)
            fc = FundamentalClass(f, f1, w0, u0, +1)
            if fc.in_box():
                out.append(fc)
                if u0:
                    out.append(FundamentalClass(f, f1, w0, u0, -1))
        u0 += 1
    return out


def orbit_points(orbit: PellOrbit) -> Iterator[tuple[int, int]]:
    """Emit (w, u) = |(x0 + zeta·y0·√D)·unit^k| for k ≥ (1 − zeta)/2.

    Coordinates are reported as absolute values; the stream stops once the
    larger coordinate exceeds the cap.
    """
    unit = orbit.unit
    x, y = orbit.x0, orbit.zeta * orbit.y0
    if orbit.zeta < 0 and orbit.y0:
        x, y = unit.mul(x, y)
    while True:
        w, u = abs(x), abs(y)
        if max(w, u) > orbit.cap:
            return
        yield w, u
        x, y = unit.mul(x, y)


def base_solutions_eqDD(F: int) -> list[tuple[int, int]]:
    """Obvious plus exceptional solutions of X² − (F²+1)Y² = F².

    The obvious solution (F²−F+1, F−1) is returned with nonnegative
    coordinates; exceptional ones are every (x0, y0) with 0 < y0 < |F|−1,
    found by an exhaustive scan.
    """
    if abs(F) < 2:
        raise ValueError("need |F| >= 2")
    D = F * F + 1
    N = F * F
    out = [(F * F - F + 1, abs(F - 1))]
    for y0 in range(1, abs(F) - 1):
        x2 = N + D * y0 * y0
        if is_square(x2):
            out.append((math.isqrt(x2), y0))
    return out


def eqDD_unit(F: int) -> PellUnit:
    """The unit (2F²+1) + 2|F|·√(F²+1)."""
    return PellUnit(F * F + 1, 2 * F * F + 1, 2 * abs(F))


def eqDD_orbit_starts(F: int) -> list[tuple[int, int, int]]:
    """Orbit starting data (x0, y0, branch) that together cover every solution.

    Besides the obvious and exceptional solutions this includes the class
    of (|F|, 0), which is self-conjugate and so needs only one branch.
    """
    starts = [(abs(F), 0, +1)]
    for x0, y0 in base_solutions_eqDD(F):
        starts.append((x0, y0, +1))
        starts.append((x0, y0, -1))
    return starts


def eqDD_points(F: int, cap: int) -> list[tuple[int, int]]:
    """Sorted distinct solutions (x, y), x, y ≥ 0, of X² − (F²+1)Y² = F² with max(x, y) ≤ cap."""
    unit = eqDD_unit(F)
    seen = set()
    for x0, y0, zeta in eqDD_orbit_starts(F):
        orb = PellOrbit(unit.D, x0, y0, zeta, unit, cap)
        for pt in orbit_points(orb):
            seen.add(pt)
    return sorted(seen, key=lambda p: (p[1], p[0]))
