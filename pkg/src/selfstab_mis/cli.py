"""Command-line front end.

Commands: ``run`` (one experiment, per-trial CSV + aggregate JSON), ``sweep``
(a parameter grid, one aggregate row per cell), ``good`` (property verifier
report), ``switch-audit`` (switch run-length report), ``selftest``.

Exit codes are a stable contract:
  0 success, 1 property fail (with witness), 2 usage error, 3 soundness
  error, 4 capped trial under --strict, 5 output I/O error,
  6 sampled-inconclusive under --require-exact.

All emitted files are UTF-8, embed the schema version and the fully
resolved configuration, and are byte-identical across reruns of the same
configuration (wall-clock timing goes to stderr only).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import backend, coins, goodness, harness, switch
from .dynamics import ProcessKind
from .graph import descriptor_token, diameter_at_most_two, from_descriptor

SCHEMA = "selfstab-mis/v1"

EXIT_OK = 0
EXIT_PROPERTY_FAIL = 1
EXIT_USAGE = 2
EXIT_SOUNDNESS = 3
EXIT_CAPPED_STRICT = 4
EXIT_IO = 5
EXIT_INCONCLUSIVE = 6

_PROCESS_TOKENS = [k.token for k in ProcessKind]


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="selfstab-mis",
                                  description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--process", required=True, choices=_PROCESS_TOKENS)
    run.add_argument("--graph", required=True,
                     help="complete:n=..|gnp:n=..,p=..|cliques:count=..,size=..|"
                          "tree:n=..|file:PATH")
    run.add_argument("--init", default="all-white",
                     choices=["all-white", "all-black", "uniform-random",
                              "alternating", "all-gray"])
    run.add_argument("--trials", type=int, required=True)
    run.add_argument("--seed", type=int, required=True)
    run.add_argument("--max-rounds", type=int, default=10**6)
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--metrics", action="store_true",
                     help="also write per-round metrics CSV")
    run.add_argument("--record-every", type=int, default=None,
                     help="metric thinning factor (default with --metrics: "
                          "auto, bounding recorded rows per trial)")
    run.add_argument("--plot", action="store_true",
                     help="also write a gnuplot script for the trials CSV")
    run.add_argument("--strict", action="store_true",
                     help="exit 4 if any trial hits the round cap")
    run.add_argument("--threads", type=int, default=None)
    run.add_argument("--switch-a", type=float, default=switch.DEFAULT_A)
    run.add_argument("--switch-zeta", type=float, default=switch.DEFAULT_ZETA)
    run.add_argument("--switch-init", default="all-five",
                     choices=list(switch.SWITCH_INIT_POLICIES))

    sw = sub.add_parser("sweep", help="run a parameter grid")
    sw.add_argument("--family", required=True,
                    choices=["complete", "gnp", "cliques", "tree"])
    sw.add_argument("--n", default="", help="comma list of sizes")
    sw.add_argument("--p", default="", help="comma list of densities (gnp)")
    sw.add_argument("--count", default="", help="comma list (cliques)")
    sw.add_argument("--size", default="", help="comma list (cliques)")
    sw.add_argument("--process", default="two-state",
                    help="comma list of processes")
    sw.add_argument("--init", default="all-white",
                    help="comma list of init policies")
    sw.add_argument("--trials", type=int, required=True)
    sw.add_argument("--seed", type=int, required=True)
    sw.add_argument("--max-rounds", type=int, default=10**6)
    sw.add_argument("--out", required=True)
    sw.add_argument("--threads", type=int, default=None)

    good = sub.add_parser("good", help="verify the structural properties")
    good.add_argument("--graph", required=True)
    good.add_argument("--p", type=float, required=True)
    good.add_argument("--mode", default="exact", choices=["exact", "sampled"])
    good.add_argument("--samples", type=int, default=100)
    good.add_argument("--seed", type=int, default=0)
    good.add_argument("--out", required=True, help="output JSON file")
    good.add_argument("--require-exact", action="store_true",
                      help="exit 6 when the verdict relied on sampling")

    aud = sub.add_parser("switch-audit", help="audit switch run lengths")
    aud.add_argument("--graph", required=True)
    aud.add_argument("--a", type=float, default=switch.DEFAULT_A)
    aud.add_argument("--zeta", type=float, default=switch.DEFAULT_ZETA)
    aud.add_argument("--b", type=int, default=switch.DEFAULT_B)
    aud.add_argument("--rounds", type=int, default=0,
                     help="audited rounds (default: n)")
    aud.add_argument("--switch-init", default="uniform-random",
                     choices=list(switch.SWITCH_INIT_POLICIES))
    aud.add_argument("--seed", type=int, required=True)
    aud.add_argument("--out", required=True, help="output JSON file")

    sub.add_parser("selftest", help="quick internal consistency battery")
    return top


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _json_text(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _trials_csv(result: harness.ExperimentResult, process: str, graph: str,
                init: str) -> str:
    lines = ["trial,seed,process,graph,init,stab_round,capped"]
    g_token = descriptor_token(graph)
    for i in range(result.stab_rounds.size):
        sr = int(result.stab_rounds[i])
        capped = 1 if sr < 0 else 0
        lines.append(f"{i},{int(result.trial_seeds[i])},{process},{g_token},"
                     f"{init},{sr},{capped}")
    return "\n".join(lines) + "\n"


def _rounds_csv(result: harness.ExperimentResult) -> str:
    lines = ["trial,round,blacks,whites,grays,actives,stable_black,nonstable"]
    for i, tr in enumerate(result.trials):
        rec = tr.metrics
        for j in range(rec["round"].size):
            lines.append(
                f"{i},{rec['round'][j]},{rec['blacks'][j]},{rec['whites'][j]},"
                f"{rec['grays'][j]},{rec['actives'][j]},"
                f"{rec['stable_black'][j]},{rec['nonstable'][j]}")
    return "\n".join(lines) + "\n"


_PLOT_SCRIPT = """\
#!/usr/bin/env gnuplot
# Histogram of stabilization rounds from trials.csv (same directory).
set datafile separator comma
set terminal pngcairo size 900,600
set output "stabilization_hist.png"
set xlabel "stabilization round"
set ylabel "trials"
set style fill solid 0.6
binwidth = 1
bin(x, w) = w * floor(x / w)
plot "trials.csv" using (bin($6, binwidth)):(1.0) skip 1 \\
     smooth freq with boxes title "stabilization rounds"
"""


def cmd_run(args) -> int:
    if args.record_every is not None:
        record_every = args.record_every
    elif args.metrics:
        from .dynamics import _auto_record_every
        record_every = _auto_record_every(args.max_rounds)
    else:
        record_every = 0
    cfg = harness.ExperimentConfig(
        process=ProcessKind.from_token(args.process), graph=args.graph,
        init_policy=args.init, trials=args.trials, master_seed=args.seed,
        max_rounds=args.max_rounds, record_every=record_every,
        switch_a=args.switch_a, switch_zeta=args.switch_zeta,
        switch_init=args.switch_init, threads=args.threads)
    if args.process == "three-color":
        warn = switch.check_parameters(args.switch_a, args.switch_zeta)
        if warn:
            print(f"warning: {warn}", file=sys.stderr)
    try:
        cfg.validate()
        result = harness.run_experiment(cfg)
    except (ValueError, OSError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except harness.SoundnessError as exc:
        _err(f"soundness: {exc}")
        return EXIT_SOUNDNESS

    unit = math.log2(result.n) if result.n > 1 else 1.0
    tail = harness.tail_decay(result.completed, unit) if \
        result.completed.size else None
    payload = {
        "schema": SCHEMA,
        "kind": "run",
        "config": result.config,
        "results": dict(result.aggregate,
                        tail=tail.as_dict() if tail else None),
    }
    try:
        os.makedirs(args.out, exist_ok=True)
        _write_text(os.path.join(args.out, "trials.csv"),
                    _trials_csv(result, args.process, args.graph, args.init))
        _write_text(os.path.join(args.out, "aggregate.json"),
                    _json_text(payload))
        if args.metrics:
            _write_text(os.path.join(args.out, "rounds.csv"),
                        _rounds_csv(result))
        if args.plot:
            _write_text(os.path.join(args.out, "plot.gp"), _PLOT_SCRIPT)
    except OSError as exc:
        _err(f"cannot write output: {exc}")
        return EXIT_IO
    print(f"completed {result.aggregate['completed']}/{args.trials} trials "
          f"(backend {backend.BACKEND}, "
          f"{result.wall_clock_seconds:.2f}s)", file=sys.stderr)
    if args.strict and result.capped_count:
        _err(f"{result.capped_count} trial(s) hit the round cap")
        return EXIT_CAPPED_STRICT
    return EXIT_OK


def _split_list(text: str, conv):
    return [conv(x) for x in text.split(",") if x.strip()]


def cmd_sweep(args) -> int:
    try:
        processes = [ProcessKind.from_token(t)
                     for t in _split_list(args.process, str)]
        inits = _split_list(args.init, str)
        ns = _split_list(args.n, int)
        ps = _split_list(args.p, float)
        counts = _split_list(args.count, int)
        sizes = _split_list(args.size, int)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_USAGE
    descs = []
    if args.family == "complete":
        descs = [f"complete:n={n}" for n in ns]
    elif args.family == "tree":
        descs = [f"tree:n={n}" for n in ns]
    elif args.family == "gnp":
        descs = [f"gnp:n={n},p={p}" for n in ns for p in ps]
    elif args.family == "cliques":
        descs = [f"cliques:count={c},size={s}" for c in counts for s in sizes]
    if not descs or not processes or not inits:
        _err("empty sweep grid")
        return EXIT_USAGE

    rows = ["process,graph,init,n,trials,completed,capped,mean,median,p90,max"]
    cells = []
    for desc in descs:
        for proc in processes:
            for init in inits:
                cfg = harness.ExperimentConfig(
                    process=proc, graph=desc, init_policy=init,
                    trials=args.trials, master_seed=args.seed,
                    max_rounds=args.max_rounds, threads=args.threads)
                try:
                    res = harness.run_experiment(cfg)
                except ValueError as exc:
                    _err(str(exc))
                    return EXIT_USAGE
                except harness.SoundnessError as exc:
                    _err(f"soundness: {exc}")
                    return EXIT_SOUNDNESS
                agg = res.aggregate
                rows.append(
                    f"{proc.token},{descriptor_token(desc)},{init},{res.n},"
                    f"{agg['trials']},{agg['completed']},{agg['capped']},"
                    f"{agg['mean']},{agg['median']},{agg['p90']},{agg['max']}")
                cells.append({"config": res.config, "results": agg})
    try:
        os.makedirs(args.out, exist_ok=True)
        _write_text(os.path.join(args.out, "sweep.csv"),
                    "\n".join(rows) + "\n")
        _write_text(os.path.join(args.out, "sweep.json"),
                    _json_text({"schema": SCHEMA, "kind": "sweep",
                                "cells": cells}))
    except OSError as exc:
        _err(f"cannot write output: {exc}")
        return EXIT_IO
    return EXIT_OK


def cmd_good(args) -> int:
    try:
        g = from_descriptor(args.graph,
                            default_seed=coins.word(args.seed,
                                                    coins.STREAM_GRAPH, 0, 0))
        report = goodness.is_good(g, args.p, mode=args.mode,
                                  samples=args.samples, seed=args.seed)
    except (ValueError, OSError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    payload = {
        "schema": SCHEMA,
        "kind": "goodness",
        "config": {"graph": args.graph, "p": args.p, "mode": args.mode,
                   "samples": args.samples, "seed": args.seed},
        "report": report.to_json_dict(),
    }
    try:
        _write_text(args.out, _json_text(payload))
    except OSError as exc:
        _err(f"cannot write output: {exc}")
        return EXIT_IO
    if not report.passed:
        return EXIT_PROPERTY_FAIL
    if args.require_exact and not report.definitive:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_switch_audit(args) -> int:
    try:
        if not 0.0 < args.zeta < 1.0:
            raise ValueError("zeta must lie in (0, 1)")
        g = from_descriptor(args.graph,
                            default_seed=coins.word(args.seed,
                                                    coins.STREAM_GRAPH, 0, 0))
        rounds = args.rounds if args.rounds > 0 else g.n
        hist = switch.run_switch_history(g, rounds, args.seed,
                                         policy=args.switch_init,
                                         zeta=args.zeta)
        diam2, _ = diameter_at_most_two(g)
        audit = switch.run_length_audit(hist, args.a, args.b, diam2, g.n)
    except (ValueError, OSError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    warn = switch.check_parameters(args.a, args.zeta)
    if warn:
        print(f"warning: {warn}", file=sys.stderr)
    payload = {
        "schema": SCHEMA,
        "kind": "switch-audit",
        "config": {"graph": args.graph, "a": args.a, "zeta": args.zeta,
                   "b": args.b, "rounds": rounds, "seed": args.seed,
                   "switch_init": args.switch_init},
        "report": audit.to_json_dict(),
    }
    try:
        _write_text(args.out, _json_text(payload))
    except OSError as exc:
        _err(f"cannot write output: {exc}")
        return EXIT_IO
    return EXIT_OK if audit.passed else EXIT_PROPERTY_FAIL


def cmd_selftest(args) -> int:
    import numpy as _np

    from . import exact
    from .graph import Graph, gen_complete

    ok = True

    def report(name: str, passed: bool, detail: str = "") -> None:
        nonlocal ok
        ok = ok and passed
        mark = "PASS" if passed else "FAIL"
        print(f"[{mark}] {name}{(': ' + detail) if detail else ''}")

    bits = coins.fair_bits_for_units(7, coins.STREAM_PROCESS, 1,
                                     _np.arange(50000, dtype=_np.uint64))
    report("fair coins", abs(float(bits.mean()) - 0.5) < 0.01,
           f"mean {bits.mean():.4f}")

    k2 = gen_complete(2)
    exact_mean = float(exact.mean_stabilization_times(k2)[0])
    cfg = harness.ExperimentConfig(process=ProcessKind.TWO_STATE, graph=k2,
                                   init_policy="all-white", trials=5000,
                                   master_seed=11, threads=1)
    res = harness.run_experiment(cfg)
    mc = float(res.completed.mean())
    se = float(res.completed.std(ddof=1)) / math.sqrt(res.completed.size)
    report("two-vertex chain vs Monte Carlo",
           abs(mc - exact_mean) <= 4 * se,
           f"exact {exact_mean:.3f}, mc {mc:.3f}")

    res2 = harness.run_experiment(cfg)
    report("determinism", bool(_np.array_equal(res.stab_rounds,
                                               res2.stab_rounds)))

    p3 = Graph(3, [(0, 1), (1, 2)])
    good_black = _np.array([True, False, True])
    bad_black = _np.array([True, True, False])
    report("MIS oracle", harness.verify_mis(p3, good_black)
           and not harness.verify_mis(p3, bad_black))

    g32 = gen_complete(32)
    hist = switch.run_switch_history(g32, 200, 3, zeta=0.5)
    audit = switch.run_length_audit(hist, 8.0, 3, True, 32)
    report("switch on-run bound", not audit.violations["S3"],
           f"{len(audit.violations['S3'])} violations")

    chk = harness.lemma6_check(1, 2000, 5)
    report("star lower bound", chk.passed and abs(chk.exact_value - 0.25) < 1e-12,
           f"estimate {chk.estimate:.3f}, bound {chk.bound:.3f}")

    return EXIT_OK if ok else EXIT_PROPERTY_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    handlers = {
        "run": cmd_run,
        "sweep": cmd_sweep,
        "good": cmd_good,
        "switch-audit": cmd_switch_audit,
        "selftest": cmd_selftest,
    }
    return handlers[args.command](args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
