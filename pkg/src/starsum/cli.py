"""Command-line front end: audits and checks with JSON + CSV artifacts.

Exit codes: 0 ok, 1 usage error, 2 expectation failed (--expect-monotone
met a certified violation), 3 infeasible (no bound could be computed), 4
I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from . import __version__
from .combinatorics import simplex_spider_volume, stability_constant, threshold_k
from .counterexamples import (
    conjecture2_gap,
    cube_measure_check,
    ellipse_measure_check,
)
from .grid import CELL_CAP_DEFAULT, CellCapError
from .sequence import (
    CERTIFIED_VIOLATION,
    DisconnectedBoundaryError,
    annulus_raster,
    audit_monotonicity,
    boundary_lemma_check,
    default_schedule,
    disc_raster,
    hausdorff_convergence,
    holes_audit,
    lemma2_check,
    square_raster,
)
from .specs import SpecError, parse_spec

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EXPECTATION = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the contract says 1
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("error: %s\n" % message)
        raise SystemExit(EXIT_USAGE)


def _rational(text):
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(text)


def _build_parser():
    p = _Parser(prog="starsum", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, spec=False):
        if spec:
            sp.add_argument("--set", dest="spec_path", required=True,
                            help="path to a set-spec JSON file")
        sp.add_argument("--kmax", type=int, default=5)
        sp.add_argument("--res", type=_rational, default=None,
                        help="starting grid spacing, e.g. 1/64")
        sp.add_argument("--refine", type=int, default=4,
                        help="number of spacing halvings")
        sp.add_argument("--tol", type=float, default=1e-9)
        sp.add_argument("--cap", type=int, default=CELL_CAP_DEFAULT)
        sp.add_argument("--workers", type=int, default=1,
                        help="accepted for compatibility; dispatch is serial")
        sp.add_argument("--out", default=None, help="report JSON path")
        sp.add_argument("--csv", dest="csv_path", default=None)
        sp.add_argument("--expect-monotone", action="store_true")

    common(sub.add_parser("audit", help="monotonicity audit of v(k)"), spec=True)

    sp = sub.add_parser("simplex-exact", help="exact axis-spider volumes")
    sp.add_argument("--d", type=int, default=2)
    common(sp)

    sp = sub.add_parser("lemma2", help="grid cell-mass inequality verifier")
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--k", type=int, default=4)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--fill", type=float, default=0.5)
    common(sp)

    sp = sub.add_parser("boundary", help="boundary sum identity check")
    sp.add_argument("--shape", choices=["disc", "square", "annulus"], default="disc")
    sp.add_argument("--size", type=int, default=32, help="radius/side in cells")
    sp.add_argument("--inner-size", type=int, default=12)
    common(sp)

    common(sub.add_parser("holes", help="convex-region-minus-bites audit"), spec=True)
    common(sub.add_parser("hausdorff", help="convergence to the convex hull"), spec=True)

    sp = sub.add_parser("counterexample", help="volume counterexample checks")
    csub = sp.add_subparsers(dest="which", required=True)
    g = csub.add_parser("gap")
    g.add_argument("--a", type=int, default=3)
    g.add_argument("--b", type=int, default=6)
    g.add_argument("--d1", type=int, default=4)
    g.add_argument("--d2", type=int, default=3)
    g.add_argument("--digits", type=int, default=30)
    common(g)
    mc = csub.add_parser("measure-cube")
    mc.add_argument("--d", type=int, default=2)
    mc.add_argument("--k", type=int, default=1)
    common(mc)
    me = csub.add_parser("measure-ellipse")
    me.add_argument("--k", type=int, default=2)
    me.add_argument("--resolution", type=int, default=2048)
    common(me)

    common(sub.add_parser("sweep", help="audit bounds across the spacing schedule"),
           spec=True)
    return p


def _load_spec(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise _IOFail("cannot read spec file %s: %s" % (path, e))
    except json.JSONDecodeError as e:
        raise SpecError(path, "invalid JSON: %s" % e)
    return parse_spec(doc)


class _IOFail(RuntimeError):
    pass


def _config_dict(args):
    cfg = {}
    for key in ("spec_path", "kmax", "res", "refine", "tol", "cap", "workers",
                "out", "csv_path", "expect_monotone", "d", "k", "seed", "fill",
                "shape", "size", "inner_size", "which", "a", "b", "d1", "d2",
                "digits", "resolution"):
        if hasattr(args, key):
            v = getattr(args, key)
            cfg[key] = str(v) if isinstance(v, Fraction) else v
    return cfg


def _schedule(args, dim):
    start = args.res
    return default_schedule(dim, start=start, refinements=args.refine)


def _audit_entries(report):
    return [
        {
            "k": e.k,
            "lower": str(e.lower),
            "upper": None if e.upper is None else str(e.upper),
            "verdict": e.verdict,
            "hausdorff": e.hausdorff,
            "seconds": round(e.seconds, 6),
            "method": e.method,
            "notes": list(e.notes),
        }
        for e in report.entries
    ]


def _run(args):
    command = args.command
    flags = {"expect_monotone": getattr(args, "expect_monotone", False)}
    entries = []
    extra_flags = {}

    if command in ("audit", "holes"):
        spec = _load_spec(args.spec_path)
        schedule = _schedule(args, spec.dim)
        if command == "audit":
            report = audit_monotonicity(spec, args.kmax, schedule=schedule,
                                        cell_cap=args.cap)
        else:
            report = holes_audit(spec, args.kmax, schedule=schedule,
                                 cell_cap=args.cap,
                                 resolution=args.res or Fraction(1, 256))
        entries = _audit_entries(report)
        extra_flags = report.to_dict()["flags"]
        extra_flags.update({k: v for k, v in report.extra.items()
                            if k != "bite_checks"})
        if "bite_checks" in report.extra:
            extra_flags["bite_checks"] = report.extra["bite_checks"]
        if all(e["upper"] is None for e in entries):
            raise _Infeasible("no bound could be computed at any level")
        if flags["expect_monotone"] and report.any_violation():
            return entries, extra_flags, EXIT_EXPECTATION
    elif command == "sweep":
        spec = _load_spec(args.spec_path)
        schedule = _schedule(args, spec.dim)
        for h in schedule:
            report = audit_monotonicity(spec, args.kmax, schedule=[h],
                                        cell_cap=args.cap)
            for e in _audit_entries(report):
                e["spacing"] = str(h)
                entries.append(e)
    elif command == "simplex-exact":
        d = args.d
        for k in range(1, args.kmax + 1):
            v = simplex_spider_volume(d, k)
            entries.append({"k": k, "lower": str(v), "upper": str(v),
                            "verdict": "", "hausdorff": None, "seconds": 0.0})
        for i in range(1, len(entries)):
            entries[i]["verdict"] = "certified-nondecreasing"
        extra_flags = {"threshold_k": threshold_k(d)}
        if d >= 2:
            kk = max(2, threshold_k(d))
            extra_flags["stability_constant"] = str(stability_constant(d, kk))
    elif command == "lemma2":
        import numpy as np

        rep = lemma2_check(args.d, args.k,
                           spacing=args.res or Fraction(1, 8),
                           rng=np.random.default_rng(args.seed),
                           fill=args.fill)
        ok = all([rep.per_cell_ok, rep.per_layer_ok, rep.weights_sum_ok,
                  rep.weights_dual_ok, rep.volume_inequality_ok,
                  rep.stability_ok])
        entries = [{
            "k": args.k, "lower": str(rep.vol_m), "upper": str(rep.vol_kconv),
            "verdict": "holds" if ok else "violated",
            "hausdorff": None, "seconds": 0.0,
            "delta": str(rep.delta),
        }]
        extra_flags = {"per_cell": rep.per_cell_ok, "per_layer": rep.per_layer_ok,
                       "weights": rep.weights_sum_ok and rep.weights_dual_ok,
                       "stability": rep.stability_ok}
    elif command == "boundary":
        h = args.res or Fraction(1, 128)
        if args.shape == "disc":
            g = disc_raster(args.size, h)
        elif args.shape == "square":
            g = square_raster(args.size, h)
        else:
            g = annulus_raster(args.size, args.inner_size, h)
        rep = boundary_lemma_check(g)
        entries = [{
            "k": 1, "lower": str(rep.vol_bb), "upper": str(rep.vol_aa),
            "verdict": "passed" if rep.passed else "failed",
            "hausdorff": rep.hausdorff_aa_bb, "seconds": 0.0,
        }]
        extra_flags = {"components": rep.boundary_components,
                       "used_external_boundary": rep.used_external_boundary,
                       "hausdorff_aa_ab": rep.hausdorff_aa_ab,
                       "tolerance": rep.tolerance}
    elif command == "hausdorff":
        spec = _load_spec(args.spec_path)
        ks = list(range(2, args.kmax + 1))
        hc = hausdorff_convergence(spec, ks, args.res or Fraction(1, 64),
                                   cell_cap=args.cap)
        for k, v in zip(hc.ks, hc.values):
            entries.append({"k": k, "lower": None, "upper": None,
                            "verdict": "", "hausdorff": v, "seconds": 0.0})
        extra_flags = {"slack": hc.slack, "fitted_exponent": hc.fitted_exponent}
    elif command == "counterexample":
        if args.which == "gap":
            res = conjecture2_gap(args.a, args.b, args.d1, args.d2, args.digits)
            entries = [{"k": None, "lower": str(res.interval[0]),
                        "upper": str(res.interval[1]),
                        "verdict": "negative" if res.certified_negative else "inconclusive",
                        "hausdorff": None, "seconds": 0.0,
                        "gap": res.value}]
            extra_flags = {"volumes": [str(v) for v in res.volumes],
                           "certified_negative": res.certified_negative}
        elif args.which == "measure-cube":
            rep = cube_measure_check(args.d, args.k)
            entries = [{"k": args.k,
                        "lower": str(rep.measure_next),
                        "upper": str(rep.measure_full),
                        "verdict": "strict-drop" if rep.strict_drop else "no-drop",
                        "hausdorff": None, "seconds": 0.0}]
            extra_flags = {"index_full": rep.index_full,
                           "index_next": rep.index_next,
                           "cube_volume": str(rep.cube_volume),
                           "equality_holds": rep.equality_holds}
        else:
            rep = ellipse_measure_check(args.k, resolution=args.resolution)
            entries = [{"k": args.k, "lower": None, "upper": None,
                        "verdict": "", "hausdorff": None, "seconds": 0.0,
                        "ratio_k": rep.ratio_k, "ratio_next": rep.ratio_next}]
            extra_flags = {"interior_point_inside": rep.interior_point_strictly_inside,
                           "resolution": args.resolution}
    else:  # pragma: no cover - argparse prevents this
        raise _Infeasible("unknown command %r" % command)
    return entries, extra_flags, EXIT_OK


class _Infeasible(RuntimeError):
    pass


def _write_artifacts(args, report):
    out = getattr(args, "out", None)
    if out:
        try:
            with open(out, "w") as fh:
                json.dump(report, fh, indent=2, default=str)
                fh.write("\n")
        except OSError as e:
            raise _IOFail("cannot write report %s: %s" % (out, e))
    csv_path = getattr(args, "csv_path", None)
    if csv_path is None and out:
        csv_path = out.rsplit(".", 1)[0] + ".csv"
    if csv_path:
        try:
            with open(csv_path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["k", "lower", "upper", "verdict", "hausdorff",
                            "seconds"])
                for e in report["entries"]:
                    w.writerow([
                        e.get("k", ""),
                        "" if e.get("lower") is None else float(Fraction(e["lower"])),
                        "" if e.get("upper") is None else float(Fraction(e["upper"])),
                        e.get("verdict", ""),
                        "" if e.get("hausdorff") is None else e["hausdorff"],
                        e.get("seconds", ""),
                    ])
        except OSError as e:
            raise _IOFail("cannot write CSV %s: %s" % (csv_path, e))


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if e.code is not None else EXIT_OK
    try:
        entries, extra_flags, status = _run(args)
    except SpecError as e:
        sys.stderr.write("spec error: %s\n" % e)
        return EXIT_USAGE
    except _IOFail as e:
        sys.stderr.write("%s\n" % e)
        return EXIT_IO
    except (_Infeasible, CellCapError) as e:
        sys.stderr.write("infeasible: %s\n" % e)
        return EXIT_INFEASIBLE
    except DisconnectedBoundaryError as e:
        sys.stderr.write("rejected: %s\n" % e)
        return EXIT_INFEASIBLE
    except ValueError as e:
        sys.stderr.write("error: %s\n" % e)
        return EXIT_USAGE
    flags = {"expect_monotone": getattr(args, "expect_monotone", False)}
    flags.update(extra_flags)
    report = {
        "command": args.command,
        "config": _config_dict(args),
        "entries": entries,
        "flags": flags,
        "version": __version__,
    }
    try:
        _write_artifacts(args, report)
    except _IOFail as e:
        sys.stderr.write("%s\n" % e)
        return EXIT_IO
    json.dump(report, sys.stdout, indent=2, default=str)
    sys.stdout.write("\n")
    if status == EXIT_EXPECTATION:
        sys.stderr.write("expectation failed: certified violation present\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
