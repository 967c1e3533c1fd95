import json

import pytest

from fanclose.errors import CheckpointCorrupt, LevelMismatch
from fanclose.family import family_points
from fanclose.pell import eqDD_points
from fanclose.sieve import (EXCLUSION_THRESHOLD, ShardSpec, _F_at, invert, level_filters, process_F,
                            read_checkpoint, sieve_F)
from fanclose.triple import f_sequence, triple_from_master
from oracles import norm_form_points


@pytest.mark.parametrize("F", list(range(2, 51, 3)) + [-2, -17, -50])
def test_orbit_completeness(F):
    cap = 10 ** 6
    w_max = (abs(F) + 1) * cap
    want = {(x, y) for x, y in norm_form_points(F * F + 1, F * F, w_max) if y <= cap}
    got = {(x, y) for x, y in eqDD_points(F, w_max) if x <= w_max and y <= cap}
    assert len(want) >= 2
    assert got == want


def test_F2_base_point_filtered():
    assert (1, 12, 5) in invert(1, 2, 3, 1)
    flt = level_filters(1, 1, 12, 5)
    assert flt["positive"] and not flt["r > 20^5"]


def test_inversion_recovers_family_triples():
    """Every triple shows up as a point of X² − (F_i²+1)Y² = F_i² at each level."""
    for f in (3, 5, 8, 13):
        for r, s in family_points(f, 10 ** 7):
            tp = triple_from_master(r, s, f)
            seq = f_sequence(tp, 5)
            for level in range(1, 6):
                F = seq.F_at(level)
                if abs(F) < 2:
                    continue
                cap = (abs(F) + 1) * (2 * s + 2) ** level
                hits = [(x, y) for x, y in eqDD_points(F, cap) if (r, s, f) in invert(level, F, x, y)]
                assert hits, (r, s, f, level, F)


def test_inversion_soundness():
    for F in (2, -3, 7):
        for level in (1, 2, 3):
            for x, y in eqDD_points(F, 10 ** 12):
                for r, s, f in invert(level, F, x, y):
                    if r > 0 and s > r and f > 0 and r * r + s * s == 2 * f * r * s + f * f:
                        assert _F_at(level, r, s, f) == F


def test_process_F2_level1():
    rec = process_F(2, 1)["record"]
    assert rec["unresolved"] == 0
    assert rec["max_bound"] is None or rec["max_bound"] <= EXCLUSION_THRESHOLD


def test_shard_spec_validation():
    with pytest.raises(ValueError):
        ShardSpec(1, 1, 1)
    with pytest.raises(ValueError):
        ShardSpec(6, 2, 3)
    with pytest.raises(ValueError):
        ShardSpec(1, 5, 4)


def test_resume_is_idempotent(tmp_path):
    cp = tmp_path / "l1.jsonl"
    full = sieve_F(ShardSpec(2, 2, 5))
    part = sieve_F(ShardSpec(2, 2, 5, str(cp)), stop_after=3)
    assert part.F_done == 3
    resumed = sieve_F(ShardSpec(2, 2, 5, str(cp)))
    for k in ("enumerated", "filtered", "reduced", "unresolved", "F_done", "max_final_bound"):
        assert getattr(resumed, k) == getattr(full, k)
    lines = cp.read_text().splitlines()
    assert len(lines) == 8 and len({json.loads(l)["F"] for l in lines}) == 8


def test_empty_checkpoint_starts_fresh(tmp_path):
    cp = tmp_path / "empty.jsonl"
    cp.write_text("")
    s = sieve_F(ShardSpec(3, 2, 2, str(cp)))
    assert s.F_done == 2 and len(cp.read_text().splitlines()) == 2


def test_level_mismatch(tmp_path):
    cp = tmp_path / "l1.jsonl"
    sieve_F(ShardSpec(1, 2, 2, str(cp)))
    with pytest.raises(LevelMismatch):
        sieve_F(ShardSpec(2, 2, 2, str(cp)))


@pytest.mark.parametrize("line", ["not json", json.dumps({"F": 2}),
                                  json.dumps({"F": 2, "level": 1, "enumerated": 1, "filtered": 0,
                                              "reduced": 0, "unresolved": 0, "hash": "short"})])
def test_corrupt_checkpoint(tmp_path, line):
    cp = tmp_path / "bad.jsonl"
    cp.write_text(line + "\n")
    with pytest.raises(CheckpointCorrupt):
        read_checkpoint(str(cp), 1)


def test_deterministic_records():
    a = process_F(-7, 2)["record"]
    b = process_F(-7, 2)["record"]
    assert a == b


def test_survivor_collection():
    s = sieve_F(ShardSpec(1, 3, 4), keep_survivors=True)
    assert s.survivors and all(b <= EXCLUSION_THRESHOLD for *_, b in s.survivors)
    assert "survivors" not in s.as_dict()
