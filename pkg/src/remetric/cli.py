"""Command line front end.

Subcommands:

* ``envelope``   build and exhaustively verify a submultiplicative envelope
* ``remetrize``  run the full pipeline on a system and report level bounds
* ``check``      named checks: ``iv`` (floor condition for a modulus
                 sequence), ``phi`` (simple-minorant construction),
                 ``tent-witness`` (endpoint inequality along dyadic pairs)
* ``demo``       end-to-end runs of the built-in systems

Exit codes: 0 all verifications pass, 2 a verification failed (witness
printed), 3 bad input, 4 resource cap (table budget or horizon).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from .errors import HorizonExhausted, TableBudgetExceeded
from .family import FunctionFamily, close_levels, word_length
from .metricspace import (FiniteMetricSpace, bound_metric, lipschitz_estimate,
                          validate_metric, write_matrix_csv)
from .moduli import (Modulus, ModulusSequence, build_simple_minorants,
                     check_liminf_floor)
from .remetrize import (build_remetrization, equivalence_probe,
                        iterate_bound_report, tent_distance_shrink_check,
                        tent_expansion_witness, verify_level_bounds)
from .sequences import GrowthSequence, build_envelope, verify_submultiplicative
from .systems import (counterexample, load_system_json, make_group_system,
                      make_rotation_system, make_tent_system, s3_preset)
from .util import fmt12

EXIT_OK = 0
EXIT_VERIFICATION = 2
EXIT_INPUT = 3
EXIT_RESOURCE = 4


class InputError(ValueError):
    pass


def parse_growth(spec: str) -> GrowthSequence:
    """Sequence grammar: log | const:<v> | linear | list:<csv path>."""
    if spec == "log":
        return GrowthSequence.log()
    if spec == "linear":
        return GrowthSequence.linear()
    if spec.startswith("const:"):
        return GrowthSequence.const(float(spec.split(":", 1)[1]))
    if spec.startswith("list:"):
        path = spec.split(":", 1)[1]
        vals = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                vals.extend(float(v) for v in row if v.strip())
        return GrowthSequence.from_list(vals)
    raise InputError(f"unknown sequence spec {spec!r}")


def parse_modulus_sequence(spec: str, horizon: int) -> ModulusSequence:
    """Modulus grammar: loglin | simple:<a>:<b> | linear:<s> | table:<csv path>."""
    if spec == "loglin":
        return ModulusSequence.loglin(horizon)
    if spec.startswith("simple:"):
        _, a, b = spec.split(":")
        cap = math.inf if b in ("inf", "") else float(b)
        return ModulusSequence.constant(Modulus.simple(float(a), cap), horizon)
    if spec.startswith("linear:"):
        return ModulusSequence.constant(Modulus.linear(float(spec.split(":", 1)[1])),
                                        horizon)
    if spec.startswith("table:"):
        path = spec.split(":", 1)[1]
        pts = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                row = [v for v in row if v.strip()]
                if row:
                    pts.append((float(row[0]), float(row[1])))
        return ModulusSequence.constant(Modulus.table(pts), horizon)
    raise InputError(f"unknown modulus spec {spec!r}")


def load_system(spec: str, c: float):
    """System grammar: tent:<L> | rotation:<q> | group:<json path> |
    counterexample:<k> | path to a system JSON document."""
    if spec.startswith("tent:"):
        space, family = make_tent_system(int(spec.split(":")[1]), c)
        return space, family, c, "tent"
    if spec.startswith("rotation:"):
        space, family = make_rotation_system(int(spec.split(":")[1]), c)
        return space, family, c, "rotation"
    if spec.startswith("group:"):
        path = spec.split(":", 1)[1]
        with open(path) as fh:
            perms = json.load(fh)
        space, family = make_group_system(perms, c)
        return space, family, c, "group"
    if spec.startswith("counterexample:"):
        raise InputError("the counterexample family is symbolic; use "
                         "`demo counterexample` instead of remetrize")
    space, family, c_doc = load_system_json(spec, default_c=c)
    return space, family, c_doc, "json"


def _ensure_out(out):
    if out:
        os.makedirs(out, exist_ok=True)
    return out


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        wr.writerows(rows)


def cmd_envelope(args) -> int:
    a = parse_growth(args.a)
    horizon = args.horizon
    if a.kind == "list" and horizon > len(a.values):
        horizon = len(a.values)
    env = build_envelope(a, horizon)
    limit = min(horizon, args.limit)
    rep = verify_submultiplicative(env, limit)
    out = _ensure_out(args.out)
    if out:
        rows = [(n, fmt12(a.value(n)), env.block_of(n), fmt12(env.value(n)))
                for n in range(1, horizon + 1)]
        _write_rows(os.path.join(out, "envelope.csv"),
                    ["n", "a_n", "nu", "b_n"], rows)
    print(f"envelope: c={fmt12(env.c)} blocks={list(env.blocks)} "
          f"saturated={env.saturated}")
    print(f"submultiplicative up to {limit}: {'pass' if rep.ok else 'FAIL'}")
    if not rep.ok:
        print(f"  violation at (n, m)={rep.violation}: {rep.detail}")
        return EXIT_VERIFICATION
    return EXIT_OK


def _pipeline(args, spec):
    space, family, c, kind = load_system(spec, args.c)
    bounded = bound_metric(space, c)
    levels = close_levels(family, args.max_n, table_budget=args.table_budget)
    a = parse_growth(args.a)
    horizon = args.horizon
    if a.kind == "list":
        horizon = min(horizon, len(a.values))
    env = build_envelope(a, horizon)
    rem = build_remetrization(bounded, levels, env, c)
    return rem, kind


def cmd_remetrize(args) -> int:
    t0 = time.perf_counter()
    rem, kind = _pipeline(args, args.system)
    moduli = parse_modulus_sequence(args.omega, args.horizon)
    single = kind == "tent" or (
        len(rem.levels.family.generators) == 1
        and not rem.levels.family.closed_under_inverse)
    if single:
        report = iterate_bound_report(rem, moduli, args.max_n, tol=args.tol)
        rows = [(r.n, fmt12(r.b), fmt12(r.a if r.a is not None else math.nan),
                 fmt12(r.worst_ratio),
                 rem.dhat.labels[r.witness_pair[0]],
                 rem.dhat.labels[r.witness_pair[1]])
                for r in report.rows]
    else:
        report = verify_level_bounds(rem, moduli, args.max_n, tol=args.tol)
        rows = [(r.level, fmt12(r.b), fmt12(r.a if r.a is not None else math.nan),
                 fmt12(r.worst_ratio) if r.worst_ratio is not None else "",
                 rem.dhat.labels[r.witness_pair[0]] if r.witness_pair else "",
                 rem.dhat.labels[r.witness_pair[1]] if r.witness_pair else "")
                for r in report.rows]
    out = _ensure_out(args.out)
    if out:
        write_matrix_csv(rem.dhat, os.path.join(out, "dhat.csv"))
        _write_rows(os.path.join(out, "lipschitz.csv"),
                    ["n", "b_n", "a_n", "worst_ratio", "witness_x", "witness_y"],
                    rows)
    cert = rem.certificate
    print(f"remetrized {args.system}: {rem.dhat.size} points, stop level "
          f"{rem.stop_level} ({cert.reason})")
    for row in rows:
        print("  n={} b_n={} a_n={} worst_ratio={} witness=({}, {})".format(*row))
    elapsed = time.perf_counter() - t0
    print(f"level bounds: {'pass' if report.ok else 'FAIL'} "
          f"[{elapsed:.2f}s]")
    return EXIT_OK if report.ok else EXIT_VERIFICATION


def cmd_check(args) -> int:
    if args.condition == "iv":
        seq = parse_modulus_sequence(args.omega, args.horizon)
        lo = args.window[0] if args.window else max(1, args.horizon // 2)
        hi = args.window[1] if args.window else args.horizon
        rep = check_liminf_floor(seq, args.c, args.t_grid, (lo, hi))
        print(f"floor check for {args.omega} at c={fmt12(args.c)}, "
              f"window [{lo}, {hi}]:")
        for r in rep.rows:
            print(f"  t={fmt12(r.t)} inf={fmt12(r.window_inf)} at n={r.argmin_n} "
                  f"{'above' if r.above_floor else 'BELOW'} the floor")
        if rep.derivative_failures:
            print(f"  derivative at zero <= 1 at n={rep.derivative_failures[:5]}")
        print(f"largest grid-certified floor: {fmt12(rep.certified_floor)}")
        print(f"verdict: {'supported' if rep.supported else 'refuted'} "
              f"({rep.note})")
        return EXIT_OK if rep.supported else EXIT_VERIFICATION

    if args.condition == "phi":
        seq = parse_modulus_sequence(args.omega, args.horizon)
        res = build_simple_minorants(seq, args.c, args.horizon)
        print(f"simple minorants below {args.omega}, floor c={fmt12(args.c)}:")
        print(f"  slope thresholds: {list(res.thresholds)}")
        print(f"  cut indices below the first threshold: {list(res.cut_indices)}")
        print(f"  guaranteed floor: {fmt12(res.guaranteed_floor)}")
        for n in (1, 2, 5, 10, 50, 100):
            if n <= res.horizon:
                p = res[n]
                print(f"  phi_{n}: slope={fmt12(p.slope)} cap={fmt12(p.cap)}")
        out = _ensure_out(args.out)
        if out:
            _write_rows(os.path.join(out, "minorants.csv"),
                        ["n", "slope", "cap"],
                        [(n, fmt12(res[n].slope), fmt12(res[n].cap))
                         for n in range(1, res.horizon + 1)])
        return EXIT_OK

    if args.condition == "tent-witness":
        if not args.system.startswith("tent:"):
            raise InputError("tent-witness needs --system tent:<L>")
        rem, _ = _pipeline(args, args.system)
        moduli = parse_modulus_sequence(args.omega, args.horizon)
        rep = tent_distance_shrink_check(rem, moduli, args.n)
        print(f"endpoint distance dhat(0, 1) = {fmt12(rep.endpoint_distance)}")
        for r in rep.rows:
            print(f"  n={r.n} t_n={fmt12(r.t_n)} w_n(t_n)={fmt12(r.bound)} "
                  f"{'ok' if r.holds else 'VIOLATED'}")
        print(f"verdict: {'pass' if rep.ok else 'FAIL'}")
        return EXIT_OK if rep.ok else EXIT_VERIFICATION

    raise InputError(f"unknown condition {args.condition!r}")


def cmd_demo(args) -> int:
    if args.name == "tent":
        args.system = f"tent:{args.L}"
        args.omega = "loglin"
        print(f"tent map on the level-{args.L} dyadic grid")
        code = cmd_remetrize(args)
        rem, _ = _pipeline(args, args.system)
        for n in (1, 2, 3):
            try:
                w = tent_expansion_witness(rem, n)
                print(f"  iterate {n}: stretch {fmt12(w.ratio)} at pair "
                      f"({rem.dhat.labels[w.pair[0]]}, {rem.dhat.labels[w.pair[1]]})")
            except ValueError as exc:
                print(f"  iterate {n}: {exc}")
        probe = equivalence_probe(rem, [0.25])
        print(f"  metric comparison at eps=0.25: cutoff level "
              f"{probe.rows[0].cutoff_level}, delta={fmt12(probe.rows[0].delta)}, "
              f"{'confirmed' if probe.ok else 'FAILED'}")
        return code

    if args.name == "rotation":
        args.system = f"rotation:{args.q}"
        args.omega = "loglin"
        print(f"rotation on {args.q} points (inverse-closed)")
        code = cmd_remetrize(args)
        rem, _ = _pipeline(args, args.system)
        shift = rem.levels.family.generators["r"]
        table = rem.levels.family.identity_table()
        for k in range(1, args.q):
            table = shift[table]
            wl = word_length(rem.levels, table)
            lip = lipschitz_estimate(rem.dhat, rem.dhat, table)
            print(f"  power {k}: word length {wl}, stretch {fmt12(lip.value)} "
                  f"<= b={fmt12(rem.envelope.value(wl))}")
        return code

    if args.name == "group":
        if args.preset == "s3":
            perms = s3_preset()
        elif args.path:
            with open(args.path) as fh:
                perms = json.load(fh)
        else:
            raise InputError("demo group needs --preset s3 or --path <json>")
        space, family = make_group_system(perms, args.c)
        bounded = bound_metric(space, args.c)
        levels = close_levels(family, args.max_n, table_budget=args.table_budget)
        env = build_envelope(parse_growth(args.a), args.horizon)
        rem = build_remetrization(bounded, levels, env, args.c)
        print(f"group on {space.size} points: {levels.distinct_count()} elements, "
              f"stabilized at level {levels.stabilized_at}")
        ok = True
        for lvl, table in levels.all_tables():
            lip = lipschitz_estimate(rem.dhat, rem.dhat, table)
            b = rem.envelope.value(lvl)
            good = lip.value <= b + args.tol
            ok = ok and good
            word = "*".join(levels.word_for(table)) or "id"
            print(f"  {word}: word length {lvl}, stretch {fmt12(lip.value)} "
                  f"<= {fmt12(b)} {'ok' if good else 'VIOLATED'}")
        return EXIT_OK if ok else EXIT_VERIFICATION

    if args.name == "counterexample":
        k = args.k
        cert = counterexample.equicontinuity_certificate(
            k, counterexample.Point(1, 0.0), args.eps,
            alphabet_bound=args.alphabet_bound)
        print(f"parameter k={k}: cutoff line N={cert.cutoff_line}, "
              f"delta={fmt12(cert.delta)}")
        c1, c2, c3 = cert.case_counts
        print(f"  {len(cert.rows)} sampled words of the k-fold family: "
              f"cases high-line/cancelled/low-index = {c1}/{c2}/{c3}")
        worst = max((r.diameter for r in cert.rows), default=0.0)
        print(f"  worst image diameter {fmt12(worst)} <= eps={fmt12(args.eps)}: "
              f"{'pass' if cert.ok else 'FAIL'}")
        if cert.note:
            print(f"  ({cert.note})")
        sched = counterexample.nonequicontinuity_schedule(k, args.eps)
        print(f"  (k+1)-fold pump schedule ({sched.note}):")
        for r in sched.rows:
            print(f"    delta={fmt12(r.delta)} -> m={r.m} stretches to "
                  f"{fmt12(r.stretched)} > eps")
        return EXIT_OK if cert.ok and sched.ok else EXIT_VERIFICATION

    raise InputError(f"unknown demo {args.name!r}")


def _window(text):
    lo, hi = text.split(":")
    return int(lo), int(hi)


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="remetric",
                                description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--tol", type=float, default=1e-9,
                   help="comparison tolerance for verifications")
    p.add_argument("--table-budget", type=int, default=1_000_000,
                   help="cap on composition tables examined")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for any subsampling (full enumeration by default)")
    p.add_argument("--out", default=None, help="directory for CSV/JSON artifacts")
    sub = p.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("envelope", help="build and verify an envelope")
    pe.add_argument("--a", default="log", help="sequence spec")
    pe.add_argument("--horizon", type=int, default=4096)
    pe.add_argument("--limit", type=int, default=1024,
                    help="exhaustive submultiplicativity limit")
    pe.set_defaults(func=cmd_envelope)

    pr = sub.add_parser("remetrize", help="run the pipeline on a system")
    pr.add_argument("--system", required=True)
    pr.add_argument("--a", default="log")
    pr.add_argument("--c", type=float, default=1.0)
    pr.add_argument("--max-n", dest="max_n", type=int, default=64)
    pr.add_argument("--horizon", type=int, default=4096)
    pr.add_argument("--omega", default="loglin")
    pr.set_defaults(func=cmd_remetrize)

    pc = sub.add_parser("check", help="named checks")
    pc.add_argument("--condition", required=True,
                    choices=["iv", "phi", "tent-witness"])
    pc.add_argument("--omega", default="loglin")
    pc.add_argument("--c", type=float, default=1.0)
    pc.add_argument("--horizon", type=int, default=256)
    pc.add_argument("--t-grid", dest="t_grid", type=_floats,
                    default=[0.1, 0.5, 1.0, 2.0])
    pc.add_argument("--window", type=_window, default=None)
    pc.add_argument("--system", default="tent:12")
    pc.add_argument("--n", type=int, default=8)
    pc.add_argument("--a", default="log")
    pc.add_argument("--max-n", dest="max_n", type=int, default=64)
    pc.set_defaults(func=cmd_check)

    pd = sub.add_parser("demo", help="end-to-end built-in systems")
    pd.add_argument("name", choices=["tent", "rotation", "group", "counterexample"])
    pd.add_argument("--L", type=int, default=10)
    pd.add_argument("--q", type=int, default=12)
    pd.add_argument("--preset", default=None)
    pd.add_argument("--path", default=None)
    pd.add_argument("--k", type=int, default=2)
    pd.add_argument("--eps", type=float, default=0.5)
    pd.add_argument("--alphabet-bound", dest="alphabet_bound", type=int, default=6)
    pd.add_argument("--a", default="log")
    pd.add_argument("--c", type=float, default=1.0)
    pd.add_argument("--max-n", dest="max_n", type=int, default=64)
    pd.add_argument("--horizon", type=int, default=4096)
    pd.add_argument("--omega", default="loglin")
    pd.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except json.JSONDecodeError as exc:
        print(f"input error: malformed JSON at line {exc.lineno}, "
              f"column {exc.colno}: {exc.msg}", file=sys.stderr)
        code = EXIT_INPUT
    except (InputError, FileNotFoundError, ValueError, IndexError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        code = EXIT_INPUT
    except (HorizonExhausted, TableBudgetExceeded) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        code = EXIT_RESOURCE
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()
