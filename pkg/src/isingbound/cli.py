"""Command-line entry point: ``isingbound COMMAND [options]``.

Results are JSON lines (stdout unless ``--output``).  Exit status: 0 success,
1 inequality violation (a reproducer is written), 2 usage or IO error,
3 capacity error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import as_extended, dump_instance, load_instance
from .errors import CapacityError, IsingError
from .report import RANDOMIZED, RunConfig, _now, default_threads, emit_plot_data, make_record, write_records
from .seeds import child_rng, fresh_seed

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3


class Violation(Exception):
    """Raised with the records to write when a check fails."""

    def __init__(self, payload, reproducer=None):
        super().__init__("inequality violation")
        self.payload = payload
        self.reproducer = reproducer


# ---------------------------------------------------------------- parsing helpers

def _vector(text):
    """JSON list or comma-separated values; entries may be +inf/-inf."""
    text = text.strip()
    items = json.loads(text) if text.startswith("[") else text.split(",")
    return [as_extended(x) for x in items]


def _site(text):
    return tuple(int(c) for c in text.split(","))


def _sites(text):
    return [_site(s) for s in text.split(";") if s.strip()]


def _reproducer_path(args, name):
    base = Path(args.reproducer_dir)
    base.mkdir(parents=True, exist_ok=True)
    return base / name


# ---------------------------------------------------------------- commands

def cmd_exact(args, cfg):
    from .exact import exact_stats

    inst = load_instance(args.instance)
    vertices = list(range(inst.n)) if args.vertices is None else [int(v) for v in args.vertices.split(",")]
    st = exact_stats(inst, vertices, cap=args.cap, threads=cfg.threads)
    return {
        "kind": "exact", "log_z": st.log_z, "vertices": vertices,
        "magnetizations": [st.magnetizations[v] for v in vertices],
    }


def _campaign(args, cfg, which, records):
    from .inequalities import fuzz_inequalities

    on_trial = None
    if args.verbose:
        on_trial = lambda r: records.append({"kind": "trial", **r.record})
    summary = fuzz_inequalities(
        cfg.seed, (args.min_n, args.max_n), args.trials, args.field_scale, cfg.tolerance,
        cfg.threads, reproducer_dir=args.reproducer_dir, zero_field=getattr(args, "zero_field", False),
        on_trial=on_trial,
    )
    payload = {"kind": "campaign", "checks": which, **summary.to_dict()}
    counts = {
        "theorem": summary.theorem_violations,
        "correlation": summary.correlation_violations,
        "both": summary.violations,
    }
    if counts[which]:
        raise Violation(payload, summary.reproducers[0] if summary.reproducers else None)
    return payload


def _single_check(args, report, query):
    payload = {"kind": "inequality", "query": query, **report.to_dict()}
    if not report.holds:
        inst = load_instance(args.instance)
        path = _reproducer_path(args, f"violation-{report.instance_digest}.json")
        dump_instance(inst, path, {"query": query, "report": report.to_dict()})
        raise Violation(payload, str(path))
    return payload


def cmd_check_theorem(args, cfg, records):
    from .inequalities import check_boundary_influence

    if args.fuzz:
        return _campaign(args, cfg, "theorem", records)
    if args.instance is None or args.h is None or args.o is None:
        raise argparse.ArgumentTypeError("check-theorem needs --fuzz or --instance with --h and --o")
    inst = load_instance(args.instance)
    h = _vector(args.h)
    rep = check_boundary_influence(inst, h, args.o, cfg.tolerance)
    return _single_check(args, rep, {"h": h, "o": args.o})


def cmd_check_correlation(args, cfg, records):
    from .inequalities import check_correlation

    if args.fuzz:
        return _campaign(args, cfg, "correlation", records)
    if args.instance is None or args.u is None or args.v is None:
        raise argparse.ArgumentTypeError("check-correlation needs --fuzz or --instance with --u and --v")
    inst = load_instance(args.instance)
    rep = check_correlation(inst, args.u, args.v, cfg.tolerance)
    return _single_check(args, rep, {"u": args.u, "v": args.v})


def cmd_fuzz(args, cfg, records):
    return _campaign(args, cfg, "both", records)


def cmd_lemma(args, cfg):
    from .inequalities import lemma_point, lemma_sweep

    if args.theta is not None:
        pt = lemma_point(args.theta, args.a, args.b, args.c)
        payload = {"kind": "lemma-point", **pt.__dict__, "feasible": pt.feasible}
        if pt.f_value > cfg.tolerance or not pt.feasible:
            raise Violation(payload)
        return payload
    sweep = lemma_sweep(cfg.seed, args.points, args.oracle_points, cfg.tolerance)
    payload = {"kind": "lemma-sweep", **sweep.to_dict()}
    if not sweep.holds:
        path = _reproducer_path(args, f"lemma-{cfg.seed}.json")
        path.write_text(json.dumps(payload, indent=1))
        raise Violation(payload, str(path))
    return payload


def cmd_counterexample(args, cfg):
    from .inequalities import counterexample_path, counterexample_tree, effective_coupling_insertion_check

    if args.which == "path":
        cert = counterexample_path(args.g2)
        d = cert.to_dict()
        payload = {"kind": "counterexample-path", "plot": "lambda-sweep", **d, "table_xy": d["table"]}
        ok = cert.certified
    elif args.which == "tree":
        cert = counterexample_tree(args.j_ua, inserted=args.inserted)
        d = cert.to_dict()
        payload = {"kind": "counterexample-tree", "plot": "lambda-sweep", **d,
                   "table_xy": [[lam, m] for lam, _, m in d["table"]]}
        ok = cert.certified
    else:
        chk = effective_coupling_insertion_check()
        payload = {
            "kind": "counterexample-insertion", "coupling": chk.coupling,
            "joint_chain": chk.joint_chain, "joint_edge": chk.joint_edge,
            "max_abs_diff": chk.max_abs_diff, "ok": chk.ok,
            "tree": chk.tree.to_dict() if chk.tree else None,
        }
        ok = chk.ok and (chk.tree is None or chk.tree.certified)
    if not ok:
        raise Violation(payload)
    return payload


def cmd_rfim(args, cfg, records):
    from .lattice import rfim_influence

    res = rfim_influence(
        args.dim, args.N, args.beta, args.field, args.sweeps, args.replicas, cfg.seed,
        cfg.threads, exact=not args.no_exact, random_scan=args.random_scan,
    )
    d = res.to_dict()
    for row in d["rows"]:
        for r, (wf, pure) in enumerate(zip(row["replicas_with_field"], row["replicas_pure"])):
            records.append({"kind": "rfim-replica", "N": row["N"], "replica": r, "with_field": wf, "pure": pure})
    return {"kind": "rfim-decay", "plot": "decay" if d["fit"] else None, **d}


def _domain(args):
    from .lattice import build_box, build_rectangle

    if args.side is not None:
        return build_rectangle(args.side, args.side)
    if args.width is not None:
        return build_rectangle(args.width, args.height or args.width)
    return build_box(args.dim, args.N)


def _ssm_setup(args, cfg):
    from .lattice import draw_field

    dom = _domain(args)
    field = draw_field(args.field, dom.n, child_rng(cfg.seed, "ssm-field"))
    if not np.all(np.isfinite(field)):
        raise argparse.ArgumentTypeError("the SSM field must be finite")
    if args.window:
        window = _sites(args.window)
    else:
        arr = np.array(dom.sites)
        window = [tuple(int(round(x)) for x in (arr.min(0) + arr.max(0)) / 2)]
    ys = [_site(args.y)] if args.y else list(dom.boundary)
    return dom, field, window, ys


def cmd_ssm(args, cfg):
    from .lattice import SSMQuery, fit_decay, ssm_estimate, tv_scan

    dom, field, window, ys = _ssm_setup(args, cfg)
    if args.method == "exact" and not args.y:
        scan = tv_scan(dom, args.beta, field, window, args.tau)
        mb = scan.max_by_distance()
        fit = None
        if len(mb) >= 2 and all(v > 0 for v in mb.values()):
            fit = fit_decay(list(mb), list(mb.values())).to_dict()
        sd = scan.to_dict()
        return {"kind": "ssm-scan", "plot": "tv-distance", "beta": args.beta, "window": window,
                "tv_rows": sd["rows"], "max_by_distance": sd["max_by_distance"],
                "monotone": sd["monotone"], "fit": fit}
    rows = []
    for y in ys:
        q = SSMQuery(dom, args.tau, y, window, tuple(field), args.beta)
        est = ssm_estimate(q, args.method, args.sweeps, args.replicas, cfg.seed, args.random_scan)
        rows.append({"y": list(y), **est.to_dict()})
    return {"kind": "ssm", "plot": "tv-distance", "beta": args.beta, "window": window, "tv_rows": rows}


def cmd_sphere(args, cfg):
    from .lattice import SSMQuery, sphere_coupling

    dom, field, window, ys = _ssm_setup(args, cfg)
    cache, rows = {}, []
    for y in ys:
        sc = sphere_coupling(SSMQuery(dom, args.tau, y, window, tuple(field), args.beta), cache)
        rows.append(sc.to_dict())
    payload = {"kind": "sphere-coupling", "beta": args.beta, "window": window, "rows": rows,
               "all_dominate": all(r["dominates"] and r["steps_ok"] for r in rows)}
    if not payload["all_dominate"]:
        path = _reproducer_path(args, f"sphere-coupling-{cfg.seed}.json")
        path.write_text(json.dumps(payload, indent=1))
        raise Violation(payload, str(path))
    return payload


# ---------------------------------------------------------------- parser

def _common(p, seed=True, tol=True):
    p.add_argument("--output", "-o", dest="output", help="append JSON-lines results here (default stdout)")
    p.add_argument("--threads", type=int, default=None, help="worker count (default from ISINGBOUND_THREADS, else 1)")
    p.add_argument("--reproducer-dir", default="reproducers", help="where violation reproducers are written")
    if seed:
        p.add_argument("--seed", type=int, default=None, help="master seed (a fresh one is drawn and recorded if absent)")
    if tol:
        p.add_argument("--tolerance", type=float, default=1e-9)


def _campaign_opts(p):
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--min-n", type=int, default=2)
    p.add_argument("--max-n", type=int, default=8)
    p.add_argument("--field-scale", type=float, default=3.0)
    p.add_argument("--verbose", action="store_true", help="also emit one record per trial")


def _lattice_opts(p):
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--N", type=int, default=2, help="box radius when no --side/--width is given")
    p.add_argument("--side", type=int, default=None, help="square side length")
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--beta", type=float, default=0.3)
    p.add_argument("--field", default="zero", help="zero | gaussian:STD | rademacher:EPS")
    p.add_argument("--tau", type=float, default=1.0, choices=[1.0, -1.0], help="boundary sign")
    p.add_argument("--y", default=None, help="flip site 'x,y' (default: every boundary site)")
    p.add_argument("--window", default=None, help="window sites 'x,y;x,y' (default: the centre)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isingbound", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="log Z and magnetizations by enumeration")
    p.add_argument("--instance", required=True)
    p.add_argument("--vertices", default=None, help="comma-separated vertex ids (default: all)")
    p.add_argument("--cap", type=int, default=26)
    _common(p, seed=False, tol=False)

    p = sub.add_parser("check-theorem", help="boundary influence under g versus zero field")
    p.add_argument("--instance")
    p.add_argument("--h", help="per-vertex h, e.g. '0,1,inf' or a JSON list")
    p.add_argument("--o", type=int)
    p.add_argument("--fuzz", action="store_true")
    _campaign_opts(p)
    _common(p)

    p = sub.add_parser("check-correlation", help="truncated correlation under g versus zero field")
    p.add_argument("--instance")
    p.add_argument("--u", type=int)
    p.add_argument("--v", type=int)
    p.add_argument("--fuzz", action="store_true")
    _campaign_opts(p)
    _common(p)

    p = sub.add_parser("fuzz", help="random campaign over both checks")
    _campaign_opts(p)
    p.add_argument("--zero-field", action="store_true")
    _common(p)

    p = sub.add_parser("lemma", help="random sweep (or one point) of the mixing inequality")
    p.add_argument("--points", type=int, default=100_000)
    p.add_argument("--oracle-points", type=int, default=None, help="points checked against the grid oracle (default: all)")
    for name in ("theta", "a", "b", "c"):
        p.add_argument(f"--{name}", type=float, default=None)
    _common(p)

    p = sub.add_parser("counterexample", help="certificates that lambda-monotonicity fails")
    p.add_argument("which", choices=["path", "tree", "insertion"])
    p.add_argument("--g2", type=float, default=3.0)
    p.add_argument("--j-ua", type=float, default=0.9)
    p.add_argument("--inserted", action="store_true")
    p.add_argument("--plot-csv", default=None, help="also write the lambda sweep as CSV")
    _common(p, seed=False, tol=False)

    p = sub.add_parser("rfim-decay", help="boundary influence on boxes, with and without a random field")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--N", type=int, nargs="+", default=[1, 2, 3, 4, 5, 6])
    p.add_argument("--beta", type=float, default=0.3)
    p.add_argument("--field", default="gaussian:1")
    p.add_argument("--sweeps", type=int, default=20_000)
    p.add_argument("--replicas", type=int, default=4)
    p.add_argument("--no-exact", action="store_true")
    p.add_argument("--random-scan", action="store_true")
    p.add_argument("--plot-csv", default=None, help="also write the decay points as CSV")
    _common(p, tol=False)

    p = sub.add_parser("ssm", help="TV on a window when one boundary spin flips")
    _lattice_opts(p)
    p.add_argument("--method", choices=["exact", "mc"], default="exact")
    p.add_argument("--sweeps", type=int, default=20_000)
    p.add_argument("--replicas", type=int, default=4)
    p.add_argument("--random-scan", action="store_true")
    p.add_argument("--plot-csv", default=None, help="also write TV against distance as CSV")
    _common(p, tol=False)

    p = sub.add_parser("sphere-coupling", help="union bound from coupling spins on an l1 sphere")
    _lattice_opts(p)
    _common(p, tol=False)
    return ap


HANDLERS_WITH_RECORDS = {
    "check-theorem": cmd_check_theorem,
    "check-correlation": cmd_check_correlation,
    "fuzz": cmd_fuzz,
    "rfim-decay": cmd_rfim,
}
HANDLERS = {
    "exact": cmd_exact,
    "lemma": cmd_lemma,
    "counterexample": cmd_counterexample,
    "ssm": cmd_ssm,
    "sphere-coupling": cmd_sphere,
}


def config_from_args(args) -> RunConfig:
    skip = {"command", "output", "threads", "seed", "tolerance", "reproducer_dir", "plot_csv", "verbose"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    seed = getattr(args, "seed", None)
    if args.command in RANDOMIZED and seed is None:
        seed = fresh_seed()
    threads = args.threads if args.threads is not None else default_threads()
    return RunConfig(args.command, params, seed, getattr(args, "tolerance", None), args.output, threads)


def run(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    # the seed is recorded before any randomness is drawn
    if cfg.seed is not None and getattr(args, "seed", None) is None:
        print(f"using fresh seed {cfg.seed}", file=sys.stderr)
    started = _now()
    extra = []
    status, reproducer = EXIT_OK, None
    try:
        if args.command in ("rfim-decay", "fuzz", "check-theorem", "check-correlation"):
            payload = HANDLERS_WITH_RECORDS[args.command](args, cfg, extra)
        else:
            payload = HANDLERS[args.command](args, cfg)
    except Violation as v:
        payload, reproducer, status = v.payload, v.reproducer, EXIT_VIOLATION
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except FileNotFoundError as exc:
        print(f"file not found: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except (IsingError, ValueError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    payload["config"] = cfg.to_dict()
    records = [make_record(cfg, p, started) for p in extra]
    main_record = make_record(cfg, payload, started, reproducer)
    records.append(main_record)
    write_records(records, cfg.output, stdout)
    if getattr(args, "plot_csv", None) and main_record.payload.get("plot"):
        emit_plot_data([main_record], main_record.payload["plot"], args.plot_csv)
    if status == EXIT_VIOLATION:
        print(f"violation found; reproducer: {reproducer}", file=sys.stderr)
    return status


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
