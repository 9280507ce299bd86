"""Command-line surface: transform, scan, regularize, increment, construct,
round, plan, and verify subcommands emitting NDJSON report streams.

All randomized commands require an explicit --seed; reports are byte-identical
for identical command, seed, and input, regardless of --threads.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import construction as cn
from .apstats import rho_all, rho_scan
from .errors import ApdiffError
from .formats import (ReportStream, read_function, read_spectrum,
                      write_function, write_set, write_spectrum)
from .fourier import GFunction, dft, idft
from .increment import plan_upper_bound, run_increment
from .regularity import weak_regular_subspace
from .space import Space


def _set_threads(requested: int | None) -> None:
    import numba
    available = numba.config.NUMBA_NUM_THREADS
    env = os.environ.get("APD_THREADS")
    t = requested if requested is not None else (
        int(env) if env else available)
    numba.set_num_threads(max(1, min(t, available)))


def _open_report(path: str | None) -> ReportStream:
    return ReportStream(open(path, "w") if path else None)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",")) if text else ()


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def _cmd_transform(args) -> int:
    rs = _open_report(args.report)
    if args.inverse:
        s = read_spectrum(args.infile)
        f = idft(s)
        write_function(args.out, f, binary=args.binary)
        rs.emit({"type": "summary", "op": "idft", "p": s.space.p,
                 "n": s.space.n, "out": args.out})
    else:
        f = read_function(args.infile)
        write_spectrum(args.out, dft(f))
        rs.emit({"type": "summary", "op": "dft", "p": f.space.p,
                 "n": f.space.n, "out": args.out})
    return 0


def _cmd_scan(args) -> int:
    f = read_function(args.infile)
    report = rho_scan(f)
    rs = _open_report(args.report)
    for d, value in enumerate(report.rho):
        rs.emit({"type": "rho", "d": d, "value": float(value)})
    d_max, r_max = report.max_nonzero
    rs.emit({"type": "summary", "alpha": report.alpha, "lambda": report.lam,
             "z": report.z, "max_nonzero_rho": float(r_max),
             "argmax_d": int(d_max),
             "margin": report.alpha**3 - float(r_max)})
    return 0


def _cmd_regularize(args) -> int:
    f = read_function(args.infile)
    cert = weak_regular_subspace(f, args.delta, pad=args.pad)
    rs = _open_report(args.report)
    rs.emit({"type": "certificate", "delta": cert.delta,
             "achieved_gap": cert.achieved_gap,
             "codim_requested": cert.codim_requested,
             "codim_actual": cert.codim_actual,
             "large_spectrum": [int(t) for t in cert.large_spectrum]})
    rs.emit({"type": "summary", "delta": cert.delta,
             "codim": cert.codim_actual,
             "achieved_gap": cert.achieved_gap})
    return 0


def _cmd_increment(args) -> int:
    f = read_function(args.infile)
    trace = run_increment(f, args.epsilon, args.eta, max_steps=args.max_steps)
    rs = _open_report(args.report)
    for st in trace.steps:
        rs.emit({"type": "trace_step", "codim": st.codim, "b": st.b,
                 "mean_lambda": st.mean_lambda, "eta": st.eta_used,
                 "codim_after": st.codim_after, "b_after": st.b_after})
    rs.emit({"type": "summary", "termination": trace.termination,
             "steps": len(trace.steps), "final_codim": trace.final_codim,
             "measured_mean_lambda": trace.measured_mean_lambda})
    return 0


def _property_records(rs, rep, level):
    for c in rep.checks:
        rs.emit({"type": "property", "id": c.prop, "pass": c.passed,
                 "measured": c.measured, "bound": c.bound, "level": level})


def _cmd_construct(args) -> int:
    params = cn.ConstructionParams(
        p=args.p, alpha=args.alpha, eta=args.eta,
        dims=_parse_ints(args.dims), mus=_parse_floats(args.mus),
        seed=args.seed, slack=args.slack)
    states = cn.build_pipeline(params)
    rs = _open_report(args.report)
    reports = [cn.verify_five_properties(s) for s in states]
    for s, rep in zip(states, reports):
        _property_records(rs, rep, s.level)
    write_function(args.out, states[-1].f, binary=args.binary)
    rs.emit({"type": "summary", "levels": len(states),
             "n": states[-1].f.space.n,
             "all_pass": all(r.all_pass for r in reports),
             "z": states[-1].z, "out": args.out})
    return 0


def _cmd_round(args) -> int:
    f = read_function(args.infile)
    result = cn.round_to_set(f, args.eps_star, args.seed,
                             retries=args.retries)
    write_set(args.out, f.space, result.members)
    rs = _open_report(args.report)
    rs.emit({"type": "summary", "accepted": result.accepted,
             "size": int(result.members.size),
             "density_deviation": result.density_deviation,
             "rho_deviation": result.rho_deviation,
             "attempts": result.attempts, "out": args.out})
    return 0


def _json_safe(record: dict) -> dict:
    return {k: (str(v) if isinstance(v, float) and not math.isfinite(v) else v)
            for k, v in record.items()}


def _cmd_plan(args) -> int:
    rs = _open_report(args.report)
    if args.mode == "upper":
        if args.alpha is None:
            raise ApdiffError("--alpha is required for --mode upper")
        plan = plan_upper_bound(args.p, args.epsilon, args.alpha)
        for chk in plan.codim_checks:
            rs.emit(_json_safe({"type": "check", **chk}))
        rs.emit({"type": "summary", "mode": "upper", "height": plan.height,
                 "tower": str(plan.tower), "max_steps": plan.max_steps,
                 "all_checks_pass": plan.all_checks_pass})
    else:
        plan = cn.plan_lower_schedule(args.p, args.epsilon)
        rs.emit({"type": "schedule", "s": plan.s, "m1": plan.m1,
                 "sigma": plan.sigma, "mus": list(plan.mus),
                 "regime_ok": plan.regime_ok,
                 "min_height": plan.min_height})
        for i, (m, n) in enumerate(zip(plan.m_towers, plan.n_towers), 1):
            rs.emit({"type": "level", "i": i, "m": str(m), "n": str(n)})
        for chk in plan.m2_chain + plan.mi_chain:
            rs.emit(_json_safe({"type": "check", **chk}))
        rs.emit({"type": "summary", "mode": "lower", "s": plan.s,
                 "m1": plan.m1, "all_checks_pass": plan.all_checks_pass})
    return 0


def _cluster_levels(values: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    levels = []
    for v in np.sort(np.unique(values)):
        if not levels or v - levels[-1] > tol:
            levels.append(float(v))
    return np.array(levels)


def _cmd_verify(args) -> int:
    """Five-property report for an arbitrary function file.

    Structural parameters the file cannot carry (alpha, the mu history) come
    from flags; defaults are the measured density and an empty history.
    """
    f = read_function(args.infile)
    eps = 3 * args.eta**2 if args.eta is not None else args.epsilon
    if eps is None:
        raise ApdiffError("provide --epsilon or --eta")
    alpha = args.alpha if args.alpha is not None else f.density
    mus = _parse_floats(args.mus) if args.mus else ()
    rs = _open_report(args.report)
    checks = []

    checks.append((1, abs(f.density - alpha) <= 1e-9, f.density, alpha))
    levels = _cluster_levels(f.values)
    checks.append((2, levels.size <= 4, float(levels.size), 4.0))
    modal = levels[np.argmax([(np.abs(f.values - lv) <= 1e-9).sum()
                              for lv in levels])]
    off = float(np.mean(np.abs(f.values - modal) > 1e-9))
    bound3 = f.space.p * math.sqrt(eps) + sum(mus)
    checks.append((3, off <= bound3 + 1e-12, off, bound3))
    report = rho_scan(f)
    d_max, r_max = report.max_nonzero
    bound4 = (1 - eps) * alpha**3
    checks.append((4, float(r_max) < bound4, float(r_max), bound4))
    mu_last = mus[-1] if mus else 90 * f.space.p * eps**0.25
    bound5 = (1 + 4 / 3 * mu_last) * alpha**3
    checks.append((5, report.z < bound5, report.z, bound5))

    for prop, ok, measured, bound in checks:
        rs.emit({"type": "property", "id": prop, "pass": bool(ok),
                 "measured": measured, "bound": bound})
    rs.emit({"type": "summary", "all_pass": all(c[1] for c in checks),
             "alpha": f.density, "margin": alpha**3 - float(r_max)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="apdiff",
        description="3-AP density toolkit over F_p^n: Fourier analysis, "
                    "regularity, density increment, and the interval-pattern "
                    "lower-bound pipeline.")
    ap.add_argument("--threads", type=int, default=None,
                    help="numba thread count (default: APD_THREADS or all cores)")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, **kw)
        sp.set_defaults(fn=fn)
        sp.add_argument("--report", default=None,
                        help="write the NDJSON report here instead of stdout")
        return sp

    sp = add("transform", _cmd_transform, help="forward or inverse transform")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--inverse", action="store_true")
    sp.add_argument("--binary", action="store_true")

    sp = add("scan", _cmd_scan, help="all per-difference 3-AP densities")
    sp.add_argument("--in", dest="infile", required=True)

    sp = add("regularize", _cmd_regularize, help="weak-regularity certificate")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--pad", action="store_true")

    sp = add("increment", _cmd_increment, help="mean-cube-density increment")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--max-steps", type=int, default=16)

    sp = add("construct", _cmd_construct, help="multi-level construction")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--dims", required=True, help="m1,m2,...")
    sp.add_argument("--mus", default="", help="mu2,mu3,...")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--slack", type=float, default=0.0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--binary", action="store_true")

    sp = add("round", _cmd_round, help="round weights to a set")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--eps-star", type=float, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--retries", type=int, default=3)
    sp.add_argument("--out", required=True)

    sp = add("plan", _cmd_plan, help="tower-scale schedule planners")
    sp.add_argument("--mode", choices=("upper", "lower"), required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--alpha", type=float, default=None)

    sp = add("verify", _cmd_verify, help="five-property report for a file")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--epsilon", type=float, default=None)
    sp.add_argument("--eta", type=float, default=None)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--mus", default="", help="mu history for the bounds")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _set_threads(args.threads)
        return args.fn(args)
    except (ApdiffError, ValueError, OSError) as exc:
        print(f"apdiff: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
