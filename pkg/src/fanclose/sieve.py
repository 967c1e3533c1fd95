"""The F-sieve: enumerate X² − (F²+1)Y² = F², invert to (r, s, f), filter, reduce.

Level i treats F as the value of F_i.  With P_j the sequence of the
candidate's own f, a point (x, y) maps to

    f = x − F·y',   r = P_{i−2}·F − P_{i−1}·y',   s = P_{i−1}·F − P_i·y',

for y' = ±y (and both signs of x); at level 1 this is r = y, f = x + rF,
s = F + 2rf.  Shards are independent and resumable through a JSON-lines
checkpoint holding one line per finished F.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .errors import CheckpointCorrupt, LevelMismatch, NoConvergentWorks, PrecisionExhausted
from .numerics import REDUCTION_DIGITS, PrecisionContext
from .pell import DEFAULT_C_CAP, base_solutions_eqDD, eqDD_points
from .reduction import problem_from_triple, reduce_to_fixpoint
from .triple import p_sequence, triple_from_master

EXCLUSION_THRESHOLD = 6          # a final bound ≤ 6 excludes the candidate
R_MIN_LEVEL1 = 20 ** 5
F_MIN = 10 ** 7
CHECKPOINT_KEYS = ("F", "level", "enumerated", "filtered", "reduced", "unresolved", "hash")


@dataclass(frozen=True)
class ShardSpec:
    level: int
    F_lo: int
    F_hi: int
    checkpoint_path: str | None = None
    c_cap: int = DEFAULT_C_CAP
    digits: int = REDUCTION_DIGITS

    def __post_init__(self):
        if not 1 <= self.level <= 5:
            raise ValueError("level must be in 1..5")
        if self.F_lo < 2 or self.F_lo > self.F_hi:
            raise ValueError("need 2 <= F_lo <= F_hi (|F| in {0, 1} is excluded)")
        if self.c_cap < 2:
            raise ValueError("c_cap must exceed 1")

    def F_values(self) -> list[int]:
        out = []
        for a in range(self.F_lo, self.F_hi + 1):
            out.extend((a, -a))
        return out


@dataclass
class SieveCandidate:
    level: int
    F: int
    x: int
    y: int
    r: int
    s: int
    f: int
    filters: dict = field(default_factory=dict)
    outcome: dict | None = None
    reason: str | None = None

    def as_dict(self) -> dict:
        return {"level": self.level, "F": self.F, "x": self.x, "y": self.y,
                "r": self.r, "s": self.s, "f": self.f, "filters": self.filters,
                "outcome": self.outcome, "reason": self.reason}


def invert(level: int, F: int, x: int, y: int) -> list[tuple[int, int, int]]:
    """All (r, s, f) the point (±x, ±y) maps to at this level."""
    out = []
    for xs in {x, -x}:
        for ys in {y, -y}:
            f = xs - F * ys
            if f <= 0:
                continue
            P = p_sequence(f, max(level, 1))      # P[j+1] = P_j
            Pm2, Pm1, P0 = P[level - 1], P[level], P[level + 1]
            r = Pm2 * F - Pm1 * ys
            s = Pm1 * F - P0 * ys
            out.append((r, s, f))
    return out


def _F_at(level: int, r: int, s: int, f: int) -> int:
    a, b = -s, -r
    for _ in range(level):
        a, b = b, 2 * f * b - a
    return b


def level_filters(level: int, r: int, s: int, f: int) -> dict:
    """Named necessary conditions; a candidate survives only if all hold."""
    pos = r > 0 and s > r and f > 0
    out = {"positive": pos}
    if not pos:
        return out
    out["s^100 > r^123"] = s ** 100 > r ** 123
    if level == 1:
        out["r > 20^5"] = r > R_MIN_LEVEL1
        out["s < r^3"] = s < r ** 3
    else:
        out["s^20 < r^41"] = s ** 20 < r ** 41
    out["f > 10^7"] = f > F_MIN
    return out


def _s_cap(c_cap: int) -> int:
    return math.isqrt(c_cap - 1)


def _x_cap(F: int, level: int, s_cap: int) -> int:
    # |s| ≥ |x|/((|F|+1)(2 s_cap)^{level-1}·2) roughly; this keeps every point with s ≤ s_cap
    return (abs(F) + 1) * (2 * s_cap + 2) ** level


def process_F(F: int, level: int, c_cap: int = DEFAULT_C_CAP, digits: int = REDUCTION_DIGITS,
              keep: bool = False) -> dict:
    """Sieve one value of F at one level and return its checkpoint record."""
    s_cap = _s_cap(c_cap)
    points = eqDD_points(F, _x_cap(F, level, s_cap))
    ctx = PrecisionContext(digits)
    enumerated = filtered = reduced = unresolved = 0
    seen = set()
    results = []
    for x, y in points:
        enumerated += 1
        for r, s, f in invert(level, F, x, y):
            if (r, s, f) in seen:
                continue
            seen.add((r, s, f))
            cand = SieveCandidate(level, F, x, y, r, s, f)
            if s > s_cap or r > s_cap:
                continue
            cand.filters = level_filters(level, r, s, f)
            if not all(cand.filters.values()):
                filtered += 1
                cand.reason = "filtered: " + next(k for k, v in cand.filters.items() if not v)
                if keep:
                    results.append(cand)
                continue
            # a survivor: it must be a genuine triple with F_level = F
            try:
                tp = triple_from_master(r, s, f)
            except Exception:
                unresolved += 1
                cand.reason = "inversion left the master equation"
                results.append(cand)
                continue
            if _F_at(level, r, s, f) != F:
                unresolved += 1
                cand.reason = "F_level mismatch after inversion"
                results.append(cand)
                continue
            try:
                trace = reduce_to_fixpoint(problem_from_triple(tp), 1, ctx)
            except (NoConvergentWorks, PrecisionExhausted) as exc:
                unresolved += 1
                cand.reason = f"reduction failed: {exc}"
                results.append(cand)
                continue
            cand.outcome = trace.as_dict()
            if trace.final_bound <= EXCLUSION_THRESHOLD:
                reduced += 1
                cand.reason = f"excluded: bound {trace.final_bound}"
            else:
                unresolved += 1
                cand.reason = f"bound {trace.final_bound} > {EXCLUSION_THRESHOLD}"
            results.append(cand)
    exceptional = len(base_solutions_eqDD(F)) - 1 if abs(F) >= 2 else 0
    digest = hashlib.sha256(json.dumps(
        [[c.r, c.s, c.f, c.reason, None if c.outcome is None else c.outcome["final_bound"]]
         for c in results], sort_keys=True).encode()).hexdigest()
    bounds = [c.outcome["final_bound"] for c in results if c.outcome]
    record = {"F": F, "level": level, "enumerated": enumerated, "filtered": filtered,
              "reduced": reduced, "unresolved": unresolved, "hash": digest,
              "max_bound": max(bounds) if bounds else None, "exceptional": exceptional}
    extra = {"candidates": [c.as_dict() for c in results
                            if keep or not c.reason.startswith("filtered")]}
    return {"record": record, "extra": extra}


def read_checkpoint(path: str, level: int) -> dict[int, dict]:
    """Completed F values from a checkpoint; empty if the file is absent or empty."""
    done = {}
    if not path or not os.path.exists(path):
        return done
    with open(path) as fh:
        for no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CheckpointCorrupt(f"{path}:{no}: not JSON ({exc})") from None
            if not isinstance(rec, dict) or any(k not in rec for k in CHECKPOINT_KEYS):
                raise CheckpointCorrupt(f"{path}:{no}: missing fields")
            if not all(isinstance(rec[k], int) for k in CHECKPOINT_KEYS if k != "hash"):
                raise CheckpointCorrupt(f"{path}:{no}: non-integer counts")
            if not (isinstance(rec["hash"], str) and len(rec["hash"]) == 64):
                raise CheckpointCorrupt(f"{path}:{no}: bad hash")
            if rec["level"] != level:
                raise LevelMismatch(f"{path}: checkpoint is for level {rec['level']}, not {level}")
            done[rec["F"]] = rec
    return done


@dataclass
class SieveSummary:
    level: int
    enumerated: int = 0
    filtered: int = 0
    reduced: int = 0
    unresolved: int = 0
    F_done: int = 0
    max_final_bound: int | None = None
    multi_exceptional: list = field(default_factory=list)
    unresolved_candidates: list = field(default_factory=list)
    survivors: list | None = None     # (F, r, s, f, final_bound) when requested

    def add(self, rec: dict, extra: dict | None = None):
        for k in ("enumerated", "filtered", "reduced", "unresolved"):
            setattr(self, k, getattr(self, k) + rec[k])
        self.F_done += 1
        m = rec.get("max_bound")
        if m is not None:
            self.max_final_bound = m if self.max_final_bound is None else max(self.max_final_bound, m)
        if rec.get("exceptional", 0) > 1:
            self.multi_exceptional.append(rec["F"])
        if extra:
            self.unresolved_candidates.extend(
                c for c in extra["candidates"]
                if not c["reason"].startswith(("excluded", "filtered")))
            if self.survivors is not None:
                self.survivors.extend((c["F"], c["r"], c["s"], c["f"], c["outcome"]["final_bound"])
                                      for c in extra["candidates"] if c["outcome"])

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k != "survivors"}


def _work(args):
    F, level, c_cap, digits = args
    return process_F(F, level, c_cap, digits)


def sieve_F(shard: ShardSpec, jobs: int = 1, stop_after: int | None = None,
            keep_survivors: bool = False) -> SieveSummary:
    """Run (or resume) a shard.  ``stop_after`` limits how many new F values are
    processed, which is how an interrupted run is simulated.  Survivors of F
    values restored from the checkpoint are not re-listed."""
    done = read_checkpoint(shard.checkpoint_path, shard.level) if shard.checkpoint_path else {}
    summary = SieveSummary(shard.level, survivors=[] if keep_survivors else None)
    todo = [F for F in shard.F_values() if F not in done]
    for F in shard.F_values():
        if F in done:
            summary.add(done[F])
    if stop_after is not None:
        todo = todo[:stop_after]
    tasks = [(F, shard.level, shard.c_cap, shard.digits) for F in todo]
    fh = open(shard.checkpoint_path, "a") if shard.checkpoint_path else None
    try:
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = pool.map(_work, tasks, chunksize=max(1, len(tasks) // (4 * jobs)))
                for res in results:
                    _record(res, summary, fh)
        else:
            for t in tasks:
                _record(_work(t), summary, fh)
    finally:
        if fh:
            fh.close()
    return summary


def _record(res, summary: SieveSummary, fh):
    summary.add(res["record"], res["extra"])
    if fh:
        fh.write(json.dumps(res["record"], sort_keys=True) + "\n")
        fh.flush()
