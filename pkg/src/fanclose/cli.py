"""Command-line entry point.

Exit codes: 0 every check passed, 1 a mathematical check failed,
2 usage or configuration error, 3 precision ceiling reached.
Machine output (JSON) goes to stdout or ``--out``; diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .errors import (CapMissing, CheckpointCorrupt, DomainViolation, FancloseError, InvalidD,
                     NoConvergentWorks, NotATriple, PrecisionExhausted, SideConditionFailed)
from .numerics import BOUND_DIGITS, DIGITS_CEILING, REDUCTION_DIGITS, PrecisionContext, to_float, with_precision_retry

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3
SWEEP_DIGITS = 30


class UsageError(FancloseError):
    pass


# ---------------------------------------------------------------------------
# helpers

def _big_int(text: str) -> int:
    """Integers written plainly or as 10^k / 10**k / 1e99."""
    t = str(text).strip().replace("**", "^")
    if "^" in t:
        base, exp = t.split("^", 1)
        return int(base) ** int(exp)
    if "e" in t.lower() and t.lower().replace("e", "", 1).isdigit():
        mant, exp = t.lower().split("e")
        return int(mant) * 10 ** int(exp)
    return int(t)


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "_mpi_"):
        return to_float(x)
    if isinstance(x, int) and not isinstance(x, bool) and abs(x) > 2 ** 63:
        return str(x)   # keep huge integers exact
    return x


def _config_view(args) -> dict:
    skip = {"func", "out", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def provenance(args) -> dict:
    view = json.dumps(_jsonable(_config_view(args)), sort_keys=True)
    return {"tool": "fanclose", "version": __version__,
            "config_hash": hashlib.sha256(view.encode()).hexdigest()}


def _emit(args, payload: dict):
    doc = {"provenance": provenance(args), **_jsonable(payload)}
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if getattr(args, "out", None) and args.subcommand != "sweep":
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _digits(args, default: int) -> int:
    if args.digits is not None:
        return args.digits
    env = os.environ.get("FANCLOSE_DIGITS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"FANCLOSE_DIGITS={env!r} is not an integer") from None
    return default


def _retry(args, fn, default_digits: int):
    ctx = PrecisionContext(_digits(args, default_digits))
    return with_precision_retry(fn, ctx, max(args.digits_max, ctx.digits))


# ---------------------------------------------------------------------------
# subcommands

def cmd_verify_triple(args) -> int:
    from .bounds import a_bounds, f_upper_from_master, lower_n
    from .errors import RegimeAmbiguous
    from .triple import build_triple, classify_F, f_sequence, le2f_holds

    try:
        tp = build_triple(args.r, args.s)
    except NotATriple as exc:
        _emit(args, {"r": args.r, "s": args.s, "triple": False, "reason": str(exc)})
        return EXIT_CHECK
    cls = classify_F(tp)
    seq = f_sequence(tp, 6)
    report = {"triple": True, "params": tp.as_dict(), "classification": cls.as_dict(),
              "F_sequence": [seq.F_at(i) for i in range(-1, 7)],
              "le2f": {i: le2f_holds(seq, i) for i in range(0, 6)},
              "f_upper": f_upper_from_master(tp.r, tp.s)}
    rec = a_bounds(tp)
    report["a_bounds"] = {"vacuous": rec.vacuous, "ok": rec.ok}
    try:
        lb = _retry(args, lambda ctx: lower_n(tp.b, tp.c, ctx), BOUND_DIGITS)
        report["lower_n"] = {"method": lb.method, "log_value": lb.log_value, "guard": lb.guard}
    except (RegimeAmbiguous, ValueError) as exc:
        report["lower_n"] = {"error": str(exc)}
    _emit(args, report)
    return EXIT_OK if cls.consistent and rec.ok else EXIT_CHECK


def cmd_family(args) -> int:
    from .family import family_exclusion, family_points

    if args.s_max is not None:
        pts = family_points(args.f, args.s_max)
        _emit(args, {"f": args.f, "s_max": args.s_max, "count": len(pts), "points": pts})
        return EXIT_OK
    if args.k is None:
        raise UsageError("family needs --k (exclusion verdict) or --s-max (point list)")
    v = family_exclusion(args.f, args.k, args.check_indices)
    _emit(args, v.as_dict())
    # a verdict without contradiction is a finding, not a failed check
    ok = v.congruence is None or v.congruence.get("ok", True)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_pell(args) -> int:
    from .pell import base_solutions_eqDD, frattini_classes, fundamental_unit

    out = {}
    if args.D is not None:
        u = fundamental_unit(args.D)
        out["unit"] = {"D": u.D, "x1": u.x1, "y1": u.y1}
    if args.f is not None:
        f1 = args.f1 if args.f1 is not None else 1
        out["classes"] = [{"w0": c.w0, "u0": c.u0, "zeta": c.zeta}
                          for c in frattini_classes(args.f, f1)]
    if args.F is not None:
        out["eqDD_base"] = base_solutions_eqDD(args.F)
    if not out:
        raise UsageError("pell needs --D, --f or --F")
    _emit(args, out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .bounds import aggregate, sweep

    step = Fraction(args.step)
    if step <= 0:
        raise UsageError("--step must be positive")
    rows = _retry(args, lambda ctx: sweep(Fraction(args.theta_from), Fraction(args.theta_to), step,
                                          ctx, args.refine_passes, args.fallback_n7), SWEEP_DIGITS)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fields = list(rows[0].as_csv()) if rows else ["mu_lo", "mu_hi"]
            w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow(r.as_csv())
    agg = aggregate(rows)
    _emit(args, {"rows": len(rows), "aggregate": agg,
                 "fallback_used": any(r.fallback for r in rows)})
    return EXIT_OK


def cmd_fexpand(args) -> int:
    from .fexpand import envelopes_hold, estimate_F_exact, transcription_matches
    from .triple import build_triple, f_sequence

    tp = build_triple(args.r, args.s)
    lo, hi = estimate_F_exact(args.level, tp.r, tp.s)
    exact = f_sequence(tp, args.level).F_at(args.level)
    inside = lo <= exact <= hi
    tm, eh = transcription_matches(args.level, tp.r, tp.s), envelopes_hold(args.level, tp.r, tp.s)
    _emit(args, {"level": args.level, "r": tp.r, "s": tp.s, "f": tp.f,
                 "estimate": [lo, hi], "estimate_float": [float(lo), float(hi)],
                 "F_exact": exact, "contained": inside,
                 "transcription_matches": tm, "envelopes_hold": eh})
    return EXIT_OK if inside and tm and eh else EXIT_CHECK


def cmd_prsec(args) -> int:
    from .fexpand import large_negative_contradiction, load_caps, prsec_bound, prsec_exponent_ok

    caps = load_caps(args.caps)
    cases = "abcd" if args.case == "all" else args.case
    out, ok = {}, True
    for case in cases:
        v = _retry(args, lambda ctx, c=case: prsec_bound(c, caps, ctx), BOUND_DIGITS)
        con = large_negative_contradiction(v)
        exp_ok = prsec_exponent_ok(case)
        out[case] = {**v.as_dict(), "exponent_ok": exp_ok,
                     "contradiction": {"bound_lower": con.bound_lower,
                                       "forced_upper": con.forced_upper,
                                       "disjoint": con.disjoint}}
        ok &= v.holds and con.disjoint and exp_ok
    _emit(args, {"cases": out, "holds": ok})
    return EXIT_OK if ok else EXIT_CHECK


def _load_candidate(text: str) -> dict:
    if os.path.exists(text):
        with open(text) as fh:
            text = fh.read()
    try:
        cand = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--candidate is neither a file nor JSON: {exc}") from None
    if not isinstance(cand, dict):
        raise UsageError("--candidate must be a JSON object")
    return cand


def cmd_reduce(args) -> int:
    from .reduction import constant_problem, problem_from_triple, reduce_to_fixpoint
    from .sieve import EXCLUSION_THRESHOLD
    from .triple import build_triple, triple_from_master

    cand = _load_candidate(args.candidate)
    triple = "r" in cand and "s" in cand
    if triple:
        r, s = _big_int(cand["r"]), _big_int(cand["s"])
        tp = triple_from_master(r, s, _big_int(cand["f"])) if "f" in cand else build_triple(r, s)
        M = _big_int(cand["M"]) if "M" in cand else None
        prob = problem_from_triple(tp, M)
    else:
        missing = [k for k in ("kappa", "mu", "M", "A", "B") if k not in cand]
        if missing:
            raise UsageError(f"--candidate lacks {missing} (or give r and s)")
        prob = constant_problem(str(cand["kappa"]), str(cand["mu"]), _big_int(cand["M"]),
                                str(cand["A"]), str(cand["B"]))
    digits = _digits(args, REDUCTION_DIGITS)
    if digits < REDUCTION_DIGITS:
        raise UsageError(f"reductions need --digits >= {REDUCTION_DIGITS}")
    trace = _retry(args, lambda ctx: reduce_to_fixpoint(prob, args.floor, ctx), REDUCTION_DIGITS)
    report = {"label": prob.label, **trace.as_dict()}
    if triple:
        report["excluded"] = trace.final_bound <= EXCLUSION_THRESHOLD
    _emit(args, report)
    return EXIT_OK if report.get("excluded", True) else EXIT_CHECK


def _shard_ranges(lo: int, hi: int, n: int) -> list[tuple[int, int]]:
    n = max(1, min(n, hi - lo + 1))
    size, extra = divmod(hi - lo + 1, n)
    out, a = [], lo
    for k in range(n):
        b = a + size - 1 + (1 if k < extra else 0)
        out.append((a, b))
        a = b + 1
    return out


def cmd_sieve(args) -> int:
    from .sieve import EXCLUSION_THRESHOLD, ShardSpec, SieveSummary, sieve_F

    digits = _digits(args, REDUCTION_DIGITS)
    if digits < REDUCTION_DIGITS:
        raise UsageError(f"the sieve needs --digits >= {REDUCTION_DIGITS}")
    if args.F_from < 2 or args.F_from > args.F_to:
        raise UsageError("need 2 <= --from <= --to")
    c_cap = _big_int(args.c_cap)
    total = SieveSummary(args.level)
    shards = []
    ranges = _shard_ranges(args.F_from, args.F_to, args.shards)
    for k, (a, b) in enumerate(ranges):
        cp = args.checkpoint
        if cp and len(ranges) > 1:
            cp = f"{cp}.{k}"
        summ = sieve_F(ShardSpec(args.level, a, b, cp, c_cap, digits), jobs=args.jobs)
        shards.append({"from": a, "to": b, "checkpoint": cp, **summ.as_dict()})
        for key in ("enumerated", "filtered", "reduced", "unresolved", "F_done"):
            setattr(total, key, getattr(total, key) + getattr(summ, key))
        if summ.max_final_bound is not None:
            total.max_final_bound = max(total.max_final_bound or 0, summ.max_final_bound)
        total.multi_exceptional += summ.multi_exceptional
        total.unresolved_candidates += summ.unresolved_candidates
    ok = total.unresolved == 0 and (total.max_final_bound is None
                                    or total.max_final_bound <= EXCLUSION_THRESHOLD)
    _emit(args, {"summary": total.as_dict(), "shards": shards, "ok": ok})
    if total.multi_exceptional:
        print(f"note: more than one exceptional solution for F in {total.multi_exceptional}",
              file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK


# ---------------------------------------------------------------------------
# parser

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose values become defaults (flags win)")
    common.add_argument("--digits", type=int, help="working precision in decimal digits "
                        "(default: FANCLOSE_DIGITS, else per command)")
    common.add_argument("--digits-max", type=int, default=DIGITS_CEILING,
                        help="ceiling for automatic precision doubling")
    common.add_argument("--out", help="write the JSON report (CSV table for sweep) here")

    p = argparse.ArgumentParser(prog="fanclose", description="Certified computations on D(-1)-triples.")
    p.add_argument("--version", action="version", version=f"fanclose {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True, metavar="COMMAND")

    s = sub.add_parser("verify-triple", parents=[common], help="check all identities of (r, s)")
    s.add_argument("r", type=int)
    s.add_argument("s", type=int)
    s.set_defaults(func=cmd_verify_triple)

    s = sub.add_parser("family", parents=[common], help="family points or exclusion verdicts")
    s.add_argument("--f", type=int, required=True)
    s.add_argument("--k", type=int)
    s.add_argument("--s-max", type=int, help="list all (r, s) with s <= S_MAX instead")
    s.add_argument("--check-indices", type=int, default=12)
    s.set_defaults(func=cmd_family)

    s = sub.add_parser("pell", parents=[common], help="Pell units, class representatives, eqDD base solutions")
    s.add_argument("--D", type=int)
    s.add_argument("--f", type=int)
    s.add_argument("--f1", type=int)
    s.add_argument("--F", type=int)
    s.set_defaults(func=cmd_pell)

    s = sub.add_parser("sweep", parents=[common], help="upper/lower bound sweep over c = b^mu")
    s.add_argument("--from", dest="theta_from", default="1.16")
    s.add_argument("--to", dest="theta_to", default="4.1")
    s.add_argument("--step", default="0.01")
    s.add_argument("--fallback-n7", action="store_true",
                   help="allow the n >= 7 fallback where no bound reaches 1000")
    s.add_argument("--refine-passes", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("fexpand", parents=[common], help="certified F_level enclosure at a triple")
    s.add_argument("--level", type=int, required=True, choices=(1, 2, 3, 4))
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--s", type=int, required=True)
    s.set_defaults(func=cmd_fexpand)

    s = sub.add_parser("prsec", parents=[common], help="interval replay of the |F_i| window bounds")
    s.add_argument("--case", default="all", choices=("a", "b", "c", "d", "all"))
    s.add_argument("--caps", help="cap table JSON (default: packaged table)")
    s.set_defaults(func=cmd_prsec)

    s = sub.add_parser("reduce", parents=[common], help="Baker-Davenport reduction to a fixpoint")
    s.add_argument("--candidate", required=True,
                   help="JSON object or file: {r, s[, f, M]} or {kappa, mu, M, A, B}")
    s.add_argument("--floor", type=int, default=1)
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("sieve", parents=[common], help="F-sieve over a range of |F|")
    s.add_argument("--level", type=int, required=True, choices=(1, 2, 3, 4, 5))
    s.add_argument("--from", dest="F_from", type=int, required=True)
    s.add_argument("--to", dest="F_to", type=int, required=True)
    s.add_argument("--shards", type=int, default=1)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--checkpoint", help="JSONL checkpoint (suffixed .k per shard)")
    s.add_argument("--c-cap", default="10^99")
    s.set_defaults(func=cmd_sieve)
    return p


def _config_defaults(argv: list[str]) -> dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    try:
        with open(known.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return cfg


def _apply_config(parser: argparse.ArgumentParser, cfg: dict, command: str | None):
    """Global keys apply to every command; a key named after the command holds its own section."""
    if not cfg or command is None:
        return
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sp = sub.choices.get(command)
    if sp is None:
        return
    flat = {k: v for k, v in cfg.items() if not isinstance(v, dict)}
    flat.update(cfg.get(command, {}))
    # config keys may name either the flag ("from", "c-cap") or its destination
    names = {}
    for a in sp._actions:
        names[a.dest] = a
        for opt in a.option_strings:
            names[opt.lstrip("-").replace("-", "_")] = a
    unknown = [k for k in flat if k.replace("-", "_") not in names]
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {unknown}")
    for k, v in flat.items():
        a = names[k.replace("-", "_")]
        sp.set_defaults(**{a.dest: v})
        a.required = False


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        cfg = _config_defaults(argv)
        command = next((a for a in argv if a in _commands(parser)), None)
        _apply_config(parser, cfg, command)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"fanclose: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except PrecisionExhausted as exc:
        print(f"fanclose: precision ceiling reached: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (NotATriple, NoConvergentWorks, SideConditionFailed) as exc:
        print(f"fanclose: check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (UsageError, InvalidD, CapMissing, CheckpointCorrupt, DomainViolation,
            ValueError, OSError) as exc:
        print(f"fanclose: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _commands(parser) -> set[str]:
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    return set(sub.choices)


if __name__ == "__main__":
    sys.exit(main())
