"""Command-line front end: ``phadamard {count,lattice,cumulants,verify,integrate,report}``.

Counts are written as decimal strings, reals with their shortest round-trip
representation. Stochastic commands require ``--seed`` and give byte-identical
output for any ``--jobs``.
"""

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from phadamard.caps import CapExceeded, VerificationError
from phadamard.charfn import DEFAULT_R0
from phadamard.counting import count_bruteforce, count_dp, count_meet_middle, n2_closed_form
from phadamard.cumulants import cycle_form_c4, exact_cumulants, quartic_form, sq_norm, triangle_form
from phadamard.indexing import num_edges
from phadamard.integration import (
    DecompositionBudget,
    integral_decomposed,
    integral_uniform_mc,
    ratio_experiment,
)
from phadamard.lattice import lattice_records, psi_on_lattice
from phadamard import verify

EXIT_FAIL = 1
EXIT_REFUSED = 3
REPORT_HEADER = ["n", "t", "N", "A", "ratio", "predicted_ratio", "t_times_gap"]


def _real(x):
    """JSON-safe real: non-finite values become null."""
    x = float(x)
    return x if math.isfinite(x) else None


def _csv_real(x):
    return repr(float(x))


def _emit(text, args):
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj):
    return json.dumps(obj, sort_keys=False, allow_nan=False) + "\n"


def _csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _refusal(exc):
    return {
        "error": "cap_exceeded",
        "what": exc.what,
        "value": exc.value,
        "cap": exc.cap,
        "env": exc.env,
        "message": str(exc),
    }


def _parse_range(text):
    """'3' -> [3]; '1..8' -> [1, ..., 8]; '1,2,4' -> [1, 2, 4]."""
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


def _parse_lambda(text):
    return np.array([float(v) for v in text.split(",")])


def cmd_count(args):
    n, s = args.n, args.cols
    methods = {
        "dp": count_dp,
        "brute": count_bruteforce,
        "meet": count_meet_middle,
    }
    method = args.method
    if method == "auto":
        method = "brute" if n * s <= 12 else "dp"
    start = time.perf_counter()
    count = methods[method](n, s)
    wall = (time.perf_counter() - start) * 1000.0
    record = {
        "n": n,
        "s": s,
        "method": method,
        "count_decimal": str(count),
        "log2_count": _real(math.log2(count)) if count else None,
        "wall_ms": round(wall, 3),
    }
    if args.format == "csv":
        _emit(_csv(list(record), [["" if v is None else v for v in record.values()]]), args)
    else:
        _emit(_json(record), args)
    return 0


def cmd_lattice(args):
    n = args.n
    counts = psi_on_lattice(n)
    rows = [] if args.summary else lattice_records(n)
    if args.format == "csv":
        table = [[r["lambda1_bits"], r["lambda2_bits"], _csv_real(r["psi_value"][0]),
                  _csv_real(r["psi_value"][1])] for r in rows]
        _emit(_csv(["lambda1_bits", "lambda2_bits", "psi_re", "psi_im"], table), args)
        return 0
    record = {
        "n": n,
        "d": num_edges(n),
        "size": sum(counts.values()),
        "multiplicities": {
            "1": counts[1], "i": counts[1j], "-1": counts[-1], "-i": counts[-1j],
        },
    }
    if not args.summary:
        record["points"] = rows
    _emit(_json(record), args)
    return 0


def cmd_cumulants(args):
    if args.lam is not None:
        lam = _parse_lambda(args.lam)
    else:
        if args.seed is None:
            raise ValueError("cumulants: give --lambda or --n with --seed")
        d = num_edges(args.n)
        lam = np.random.default_rng(args.seed).uniform(-math.pi / 4, math.pi / 4, size=d)
    cs = exact_cumulants(lam)
    record = {
        "lambda": [float(v) for v in lam],
        "s": float(sq_norm(lam)),
        "kappa1": float(cs.kappa1),
        "kappa2": float(cs.kappa2),
        "kappa3": float(cs.kappa3),
        "kappa4": float(cs.kappa4),
        "kappa5": float(cs.kappa5),
        "T": float(cs.T),
        "Q": float(cs.Q),
        "P": float(cs.P),
        "triangle_form": float(triangle_form(lam)),
        "c4": float(cycle_form_c4(lam)),
        "quartic_form": float(quartic_form(lam)),
    }
    if args.format == "csv":
        keys = [k for k in record if k != "lambda"]
        _emit(_csv(keys, [[_csv_real(record[k]) for k in keys]]), args)
    else:
        _emit(_json(record), args)
    return 0


def cmd_verify(args):
    ns = _parse_range(args.ns)
    results = verify.run_all(ns, args.samples, args.seed, args.jobs, r0=args.r0, r=args.r)
    if args.format == "csv":
        rows = [[c.name, str(c.passed).lower(), c.samples, _csv_real(c.worst_margin),
                 json.dumps({k: _real(v) for k, v in c.measured.items()}, sort_keys=True)]
                for c in results]
        _emit(_csv(["check", "passed", "samples", "worst_margin", "measured"], rows), args)
    else:
        out = []
        for c in results:
            rec = c.as_dict()
            rec["worst_margin"] = _real(rec["worst_margin"])
            rec["measured"] = {k: (_real(v) if not isinstance(v, str) else v)
                               for k, v in rec["measured"].items()}
            out.append(rec)
        _emit(_json({"seed": args.seed, "samples": args.samples, "ns": ns, "checks": out}), args)
    return 0 if all(c.passed for c in results) else EXIT_FAIL


def cmd_integrate(args):
    n, t = args.n, args.t
    if args.decomposed:
        budget = DecompositionBudget(args.samples, args.core_samples, args.residual_mode)
        res = integral_decomposed(n, t, budget, args.seed, delta=args.delta, r=args.r,
                                  jobs=args.jobs)
        est = res.primary
        record = {
            "method": "decomposed",
            "n": n,
            "t": t,
            "value": _real(est.value),
            "std_error": _real(est.std_error),
            "residual_bound": _real(res.residual_bound),
            "samples": est.samples,
            "seed": est.seed,
            "acceptance_rate": _real(est.acceptance_rate),
            "imag": _real(est.imag),
            "imag_std_error": _real(est.imag_std_error),
            "delta": _real(res.delta),
            "delta_clamped": res.delta_clamped,
            "r": _real(res.r),
            "residual_odd": _real(res.residual.odd),
            "residual_near_shell": _real(res.residual.near_shell),
            "residual_far_shell": _real(res.residual.far_shell),
        }
        if res.core is not None:
            record["core_value"] = _real(res.core.value)
            record["core_std_error"] = _real(res.core.std_error)
        if res.residual_estimate is not None:
            record["residual_estimate"] = _real(res.residual_estimate.value)
            record["residual_estimate_std_error"] = _real(res.residual_estimate.std_error)
    else:
        est = integral_uniform_mc(n, t, args.samples, args.seed, args.jobs)
        record = {
            "method": "uniform",
            "n": n,
            "t": t,
            "value": _real(est.value),
            "std_error": _real(est.std_error),
            "residual_bound": 0.0,
            "samples": est.samples,
            "seed": est.seed,
            "acceptance_rate": _real(est.acceptance_rate),
            "imag": _real(est.imag),
            "imag_std_error": _real(est.imag_std_error),
        }
    if args.format == "csv":
        keys = list(record)
        _emit(_csv(keys, [["" if record[k] is None else record[k] for k in keys]]), args)
    else:
        _emit(_json(record), args)
    return 0


def cmd_report(args):
    if args.mode == "mc" and args.seed is None:
        raise ValueError("report: --mode mc needs --seed")
    rows = ratio_experiment(args.n, _parse_range(args.t), args.mode, args.seed,
                            args.samples, args.jobs)
    if args.format == "json":
        out = []
        for r in rows:
            out.append({
                "n": r.n,
                "t": r.t,
                "N": None if r.N is None else (str(r.N) if isinstance(r.N, int) else _real(r.N)),
                "A": _real(r.A),
                "ratio": _real(r.ratio),
                "predicted_ratio": _real(r.predicted_ratio),
                "t_times_gap": _real(r.t_times_gap),
                "log_e_N": _real(r.log_N),
                "log_e_A": _real(r.log_A),
                "status": r.status,
            })
        _emit(_json(out), args)
        return 0
    table = []
    for r in rows:
        if r.N is None:
            n_text = "refused"
        elif isinstance(r.N, int):
            n_text = str(r.N)
        else:
            n_text = _csv_real(r.N)
        table.append([r.n, r.t, n_text, _csv_real(r.A), _csv_real(r.ratio),
                      _csv_real(r.predicted_ratio), _csv_real(r.t_times_gap)])
    _emit(_csv(REPORT_HEADER, table), args)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=1, help="worker threads (output does not depend on it)")
    common.add_argument("--output", help="write to this file instead of stdout")
    common.add_argument("--paper-defaults", action="store_true",
                        help="delta^2 = 2d/t and r = r0 = 0.25, overriding --delta/--r/--r0")

    parser = argparse.ArgumentParser(prog="phadamard", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", parents=[common], help="exact N_{n,s}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cols", "--s", dest="cols", type=int, required=True)
    p.add_argument("--method", choices=["auto", "dp", "brute", "meet"], default="dp")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("lattice", parents=[common], help="points of Lambda and psi on them")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--summary", action="store_true", help="multiplicities only")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("cumulants", parents=[common], help="cumulants and graph forms at one point")
    p.add_argument("--lambda", dest="lam", help="comma-separated edge coordinates")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_cumulants)

    p = sub.add_parser("verify", parents=[common], help="bound and identity sweeps")
    p.add_argument("--ns", default="2..6", help="row counts, e.g. 2..6 or 3,5")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--r0", type=float, default=DEFAULT_R0)
    p.add_argument("--r", type=float, default=DEFAULT_R0)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("integrate", parents=[common], help="Monte Carlo P(S_4t = 0)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--decomposed", action="store_true")
    p.add_argument("--core-samples", type=int, default=0)
    p.add_argument("--residual-mode", choices=["bound", "sampled"], default="bound")
    p.add_argument("--delta", type=float)
    p.add_argument("--r", type=float, default=DEFAULT_R0)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("report", parents=[common], help="N / A ratio table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", default="1..8", help="block counts, e.g. 1..8")
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.paper_defaults:
        for name in ("delta", "r", "r0"):
            if hasattr(args, name):
                setattr(args, name, None if name == "delta" else DEFAULT_R0)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args)
    except CapExceeded as exc:
        sys.stdout.write(_json(_refusal(exc)))
        return EXIT_REFUSED
    except VerificationError as exc:
        sys.stdout.write(_json({"error": "verification_failed", "message": str(exc)}))
        return EXIT_FAIL
    except ValueError as exc:
        parser.exit(2, f"phadamard: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
