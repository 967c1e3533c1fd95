"""Acceptance criteria 1-10, one test each, every one printing a PASS/FAIL line."""
import functools
import math
import time
from fractions import Fraction

import pytest

from fanclose.bounds import B_BOUND_ROWS, aggregate, phi_form_check, sweep
from fanclose.family import CASES, congruence_profile, family_points, gcd_family, recurrences
from fanclose.fexpand import estimate_F, estimate_F_exact, prsec_bound
from fanclose.numerics import PrecisionContext, contains, to_float
from fanclose.pell import PellOrbit, fundamental_unit, frattini_classes, orbit_points
from fanclose.reduction import problem_from_triple, reduce_to_fixpoint
from fanclose.sieve import EXCLUSION_THRESHOLD, ShardSpec, sieve_F
from fanclose.triple import build_triple, classify_F, f_sequence, triple_from_master
from oracles import master_solutions, norm_form_points, pell_unit, pell_unit_sympy, triples_upto


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail=""):
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'} {detail}")
    return emit


def test_criterion_1_pell_units(report):
    t0 = time.perf_counter()
    bad = []
    for D in range(2, 2001):
        if math.isqrt(D) ** 2 == D:
            continue
        ref = pell_unit(D) or pell_unit_sympy(D)
        u = fundamental_unit(D)
        if (u.x1, u.y1) != ref:
            bad.append(D)
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60
    report(1, ok, f"mismatches={bad[:5]} time={dt:.1f}s")
    assert ok


def _divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


def test_criterion_2_class_orbits_complete(report):
    t0 = time.perf_counter()
    cap = 10 ** 6
    bad = []
    for f in range(2, 201):
        D = f * f - 1
        for f1 in _divisors(f):
            got = set()
            for fc in frattini_classes(f, f1):
                got.update(orbit_points(PellOrbit.from_class(fc, cap)))
            want = norm_form_points(D, f1 * f1, cap)
            if got != want:
                bad.append((f, f1, len(got ^ want)))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 600
    report(2, ok, f"differences={bad[:5]} time={dt:.1f}s")
    assert ok


@functools.lru_cache(maxsize=None)
def _family_corpus():
    return {f: set(family_points(f, 10 ** 6)) for f in range(2, 51)}


def test_criterion_3_family_completeness(report):
    t0 = time.perf_counter()
    bad = []
    for f, pts in _family_corpus().items():
        k, gcd_pts = 1, set()
        while (p := gcd_family(f, k)).s <= 10 ** 6:
            gcd_pts.add((p.r, p.s))
            k += 1
        if gcd_pts - pts or pts != master_solutions(f, 10 ** 6):
            bad.append(f)
    dt = time.perf_counter() - t0
    ok = not bad and dt < 600
    report(3, ok, f"bad f={bad} points={sum(map(len, _family_corpus().values()))} time={dt:.1f}s")
    assert ok


def test_criterion_4_identities(report):
    failures = []
    triples = triples_upto(10 ** 4)
    for r, s, t in triples:
        tp = build_triple(r, s)     # constructor checks A, t, sF and the master equation
        f, b, c = tp.f, tp.b, tp.c
        if not ((2 * b - 1) * c - 2 * r * s * t == f * f + b == tp.A and t == r * s + f
                and s * tp.F == f * f - r * r):
            failures.append(("identities", r, s))
        seq = f_sequence(tp, 8)     # checks the P determinant on construction
        if any(seq.P_at(i - 1) ** 2 - seq.P_at(i - 2) * seq.P_at(i) != 1 for i in range(1, 9)):
            failures.append(("P determinant", r, s))
        cl = classify_F(tp)
        if not all(len(set(blk)) == 1 for blk in (cl.zero, cl.positive, cl.negative)):
            failures.append(("sign blocks", r, s))
        if tp.F != 0 and (f < r) != (c < 4 * b * b):
            failures.append(("f < r vs c < 4b^2", r, s))
    for f in range(2, 101):
        e = f * f - 1
        cert = phi_form_check(f, 1, 1, 1)
        if (e - 1) ** 2 - (e * e + 2 * e + 5) != -4 * f * f or cert.discriminant != 4 * (-4 * f * f):
            failures.append(("phi", f))
    ok = not failures and len(triples) > 0
    report(4, ok, f"triples={len(triples)} failures={failures[:5]}")
    assert ok


def test_criterion_5_congruences(report):
    t0 = time.perf_counter()
    bad, checked = [], 0
    for pid in ("pr34", "pr35", "pr37", "pr38", "pr39"):
        for k in CASES[pid].ks:
            for f in range(2, 31):
                rep = congruence_profile(f, k, pid, range(13))
                checked += rep.checked
                if not rep.ok:
                    bad.append((pid, f, k))
    rec = recurrences(gcd_family(2, 1).triple(), 1)
    v1, w1 = rec["v"].values(2)[1], rec["w"].values(2)[1]
    spot = v1 % 512 == 8 and w1 % 512 == 144
    dt = time.perf_counter() - t0
    ok = not bad and spot and dt < 300
    report(5, ok, f"checked={checked} mismatches={bad[:5]} v1={v1} w1={w1} time={dt:.1f}s")
    assert ok


def test_criterion_6_sweep_rows(report):
    t0 = time.perf_counter()
    lo = min(r[1] for r in B_BOUND_ROWS)
    hi = max(r[2] for r in B_BOUND_ROWS)
    rows = sweep(lo, hi, Fraction(1, 100), PrecisionContext(30))
    agg = aggregate(rows)
    dt = time.perf_counter() - t0
    diffs = {name: round(agg[name]["log10_b"] - agg[name]["published_log10_b"], 2) for name in agg}
    ok = (set(agg) == {r[0] for r in B_BOUND_ROWS}
          and all(abs(d) <= 3 for d in diffs.values()) and dt < 1800)
    report(6, ok, f"log10 b minus published: {diffs} time={dt:.1f}s")
    assert ok


def test_criterion_7_prsec(report):
    verdicts = {case: prsec_bound(case) for case in "abcd"}
    up_a = [b for b in verdicts["a"].branches if b.side == "upper"]
    chain_b = [b for b in verdicts["b"].branches if b.level == 2]
    ok = (all(v.holds for v in verdicts.values())
          and up_a and all(to_float(b.value) < 5 for b in up_a)
          and chain_b and all(abs(to_float(b.value)) < 3e6 for b in chain_b if b.side == "upper"))
    report(7, ok, "; ".join(f"{c}: holds={v.holds}" for c, v in verdicts.items()))
    assert ok


def test_criterion_8_containment(report):
    t0 = time.perf_counter()
    # the estimates are stated for r >= 2
    pts = [(r, s) for p in _family_corpus().values() for r, s in p if s > 31 * r and r >= 2]
    misses = []
    for r, s in pts:
        seq = f_sequence(build_triple(r, s), 4)
        for level in (1, 2, 3, 4):
            F = seq.F_at(level)
            lo, hi = estimate_F_exact(level, r, s)
            if not (lo <= F <= hi and contains(estimate_F(level, r, s), F)):
                misses.append((level, r, s))
    dt = time.perf_counter() - t0
    ok = not misses and len(pts) > 0 and dt < 300
    report(8, ok, f"points={len(pts)} misses={misses[:5]} time={dt:.1f}s")
    assert ok


SIEVE_RANGES = {1: 2000, 2: 500, 3: 500, 4: 500, 5: 500}


@pytest.fixture(scope="module")
def sieve_runs():
    t0 = time.perf_counter()
    out = {level: sieve_F(ShardSpec(level, 2, top), keep_survivors=True)
           for level, top in SIEVE_RANGES.items()}
    return out, time.perf_counter() - t0


def test_criterion_9_sieve(report, sieve_runs):
    runs, dt = sieve_runs
    unresolved = sum(s.unresolved for s in runs.values())
    worst = max((s.max_final_bound or 0) for s in runs.values())
    survivors = sum(len(s.survivors) for s in runs.values())
    ok = unresolved == 0 and worst <= EXCLUSION_THRESHOLD == 6 and dt <= 7200
    report(9, ok, f"unresolved={unresolved} max_final_bound={worst} survivors={survivors} "
                  f"time={dt:.0f}s")
    assert ok


def test_criterion_10_precision_determinism(report, sieve_runs):
    runs, _ = sieve_runs
    ctx = PrecisionContext(200)
    diffs, n = [], 0
    for level, summary in runs.items():
        for F, r, s, f, bound in summary.survivors:
            n += 1
            again = reduce_to_fixpoint(problem_from_triple(triple_from_master(r, s, f)), 1, ctx)
            if again.final_bound != bound:
                diffs.append((level, F, r, s, bound, again.final_bound))
    ok = not diffs and n > 0
    report(10, ok, f"reductions={n} differences={diffs[:5]}")
    assert ok
