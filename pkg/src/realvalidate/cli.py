"""Command-line front end.

Subcommands: find, interpolate, certify, validate, a-validate, check-cert.
Exit codes: 0 = verdict True / operation ok, 1 = verdict False / no
certificate found, 2 = usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .candidates import (PointSet, format_points, parse_points,
                         random_real_search)
from .interpolate import regularity_check, vanishing_space
from .pipeline import system_fingerprint, validate_real_set
from .poly import (ParseError, PolynomialSystem, format_poly, parse_poly,
                   parse_system)
from .soscert import (MembershipQuery, NotFound, certify, read_certificate,
                      a_radical_validate, verify_certificate,
                      write_certificate)


def _load_system(path) -> PolynomialSystem:
    return parse_system(Path(path).read_text())


def _load_points(path, nvars):
    return parse_points(Path(path).read_text(), nvars=nvars)


def _parse_box(spec, nvars):
    vals = [float(t) for t in spec.replace(",", " ").split()]
    if len(vals) == 2:
        return np.array([[vals[0], vals[1]]] * nvars)
    if len(vals) == 2 * nvars:
        return np.array(vals).reshape(nvars, 2)
    raise ValueError("box needs 'lo hi' or one lo hi pair per variable")


def _run_dir(args, system):
    if args.out:
        d = Path(args.out)
    else:
        d = Path(f"run_{system_fingerprint(system)[:12]}_s{args.seed}")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _add_common(p):
    p.add_argument("--system", required=True, help="system file")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (printed)")
    p.add_argument("--out", default=None, help="output directory")


def cmd_find(args):
    system = _load_system(args.system)
    box = _parse_box(args.box, system.nvars)
    print(f"seed: {args.seed}")
    ps = random_real_search(system, args.seeds, box, seed=args.seed)
    print(f"found {len(ps)} points "
          f"(max residual {ps.max_residual():.3e})")
    for p in ps:
        print("  " + " ".join(f"{c: .10g}" for c in p.coords))
    d = _run_dir(args, system)
    (d / "points.pts").write_text(format_points(ps))
    print(f"wrote {d / 'points.pts'}")
    return 0


def cmd_interpolate(args):
    system = _load_system(args.system)
    S = _load_points(args.points, system.nvars)
    reg = None
    if args.degree == "auto":
        reg = regularity_check(S, tol=args.tol_null)
        r, gen = reg
        degree = r if gen else r + 1
        print(f"regularity: r={r}, generated_at_r={gen}")
    else:
        degree = int(args.degree)
    vb = vanishing_space(S, degree, tol=args.tol_null)
    lines = [f"degree: {degree}", f"regularity: {reg}",
             f"hilbert: {vb.hilbert}",
             f"{len(vb.generators)} generators:"]
    lines += ["  " + format_poly(g, system.varnames) for g in vb.generators]
    report = "\n".join(lines) + "\n"
    print(report, end="")
    d = _run_dir(args, system)
    (d / "basis.txt").write_text(report)
    print(f"wrote {d / 'basis.txt'}")
    return 0


def cmd_certify(args):
    system = _load_system(args.system)
    p = parse_poly(args.poly, system.varnames)
    print(f"seed: {args.seed}")
    query = MembershipQuery(p, system, alpha_max=args.alpha_max,
                            tol_coeff=args.tol_coeff, tol_eig=args.tol_eig)
    out = certify(query)
    if isinstance(out, NotFound):
        print("no certificate found (inconclusive); trace:")
        for e in out.alpha_trace:
            print(f"  {e}")
        return 1
    print(f"certified: alpha={out.alpha} residual={out.residual_inf:.3e} "
          f"min_eig={out.min_eig:.3e}")
    d = _run_dir(args, system)
    path = d / "membership.cert"
    path.write_text(write_certificate(out, system.varnames))
    print(f"wrote {path}")
    return 0


def _validate_common(args, ineq=None):
    system = _load_system(args.system)
    points = _load_points(args.points, system.nvars) if args.points else None
    if points is not None:
        # recompute residuals for user-supplied points
        for p in points:
            p.residual = system.residual(p.coords)
    discovery = None
    if args.seeds:
        discovery = {"n_seeds": args.seeds,
                     "box": _parse_box(args.box, system.nvars)}
    components = None
    if args.components:
        from .candidates import parse_component
        text = Path(args.components).read_text()
        components = [parse_component(text)]
    alt = _load_system(args.alt_generators) if args.alt_generators else None
    return system, points, discovery, components, alt


def cmd_validate(args):
    system, points, discovery, components, alt = _validate_common(args)
    print(f"seed: {args.seed}")
    degree = None if args.degree == "auto" else int(args.degree)
    report = validate_real_set(
        system, points=points, discovery=discovery, components=components,
        alt_generators=alt, alpha_max=args.alpha_max, seed=args.seed,
        degree=degree, tol_null=args.tol_null, tol_coeff=args.tol_coeff,
        tol_eig=args.tol_eig, jobs=args.jobs)
    report.command = sys.argv[1:]
    print(report.summary())
    d = _run_dir(args, system)
    (d / "report.json").write_text(report.to_json())
    (d / "report.canonical.json").write_text(report.canonical_json())
    for i, o in enumerate(report.outcomes):
        if o.certificate is not None:
            (d / f"gen{i}.cert").write_text(
                write_certificate(o.certificate, system.varnames))
    print(f"wrote {d / 'report.json'}")
    return 0 if report.verdict else 1


def cmd_a_validate(args):
    system, points, discovery, components, alt = _validate_common(args)
    ineq = _load_system(args.ineq)
    if tuple(ineq.varnames) != tuple(system.varnames):
        raise ParseError("inequality file must declare the same variables")
    print(f"seed: {args.seed}")
    if points is None and discovery is not None:
        found = random_real_search(system, discovery["n_seeds"],
                                   discovery["box"], seed=args.seed)
        keep = [p for p in found
                if all(r.evaluate(p.coords) >= -1e-8 for r in ineq.polys)]
        points = PointSet(system.nvars)
        for p in keep:
            points.add(p)
    if points is None:
        print("error: a-validate needs --points or --seeds/--box",
              file=sys.stderr)
        return 2
    report = a_radical_validate(system, list(ineq.polys), points,
                                alpha_max=args.alpha_max,
                                null_tol=args.tol_null, jobs=args.jobs,
                                tol_coeff=args.tol_coeff,
                                tol_eig=args.tol_eig)
    print(f"verdict: {report.verdict}")
    for o in report.outcomes:
        tagline = "ok" if o.certified else "NOT FOUND"
        extra = f" alpha={o.certificate.alpha}" if o.certified else ""
        print(f"  [{tagline}]{extra} {format_poly(o.generator)}")
    return 0 if report.verdict else 1


def cmd_check_cert(args):
    system = _load_system(args.system)
    cert = read_certificate(Path(args.cert).read_text())
    ok = verify_certificate(cert, system, tol_coeff=args.tol_coeff,
                            tol_eig=args.tol_eig)
    print(f"residual: {cert.residual_inf:.3e}  min_eig: {cert.min_eig:.3e}")
    print("certificate OK" if ok else "certificate REJECTED")
    return 0 if ok else 1


def build_parser():
    ap = argparse.ArgumentParser(
        prog="realvalidate",
        description="Validate completeness of real polynomial solution sets")
    sub = ap.add_subparsers(dest="command", required=True)

    def tols(p):
        p.add_argument("--tol-null", type=float, default=1e-8)
        p.add_argument("--tol-coeff", type=float, default=1e-6)
        p.add_argument("--tol-eig", type=float, default=1e-6)

    p = sub.add_parser("find", help="Newton search from random seeds")
    _add_common(p)
    p.add_argument("--seeds", type=int, required=True)
    p.add_argument("--box", required=True,
                   help="'lo hi' (all vars) or one pair per variable")
    p.set_defaults(func=cmd_find)

    p = sub.add_parser("interpolate", help="vanishing-ideal basis of points")
    _add_common(p)
    p.add_argument("--points", required=True)
    p.add_argument("--degree", default="auto")
    tols(p)
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("certify", help="real-radical membership of one poly")
    _add_common(p)
    p.add_argument("--poly", required=True, help="polynomial text")
    p.add_argument("--alpha-max", type=int, default=3)
    tols(p)
    p.set_defaults(func=cmd_certify)

    for name, fn in (("validate", cmd_validate), ("a-validate",
                                                  cmd_a_validate)):
        p = sub.add_parser(name)
        _add_common(p)
        p.add_argument("--points", default=None)
        p.add_argument("--seeds", type=int, default=None)
        p.add_argument("--box", default=None)
        p.add_argument("--components", default=None)
        p.add_argument("--alt-generators", default=None)
        p.add_argument("--alpha-max", type=int, default=3)
        p.add_argument("--degree", default="auto")
        p.add_argument("--jobs", type=int, default=None)
        tols(p)
        if name == "a-validate":
            p.add_argument("--ineq", required=True,
                           help="inequality polynomials r_i (system grammar)")
        p.set_defaults(func=fn)

    p = sub.add_parser("check-cert", help="verify a certificate file")
    _add_common(p)
    p.add_argument("--cert", required=True)
    tols(p)
    p.set_defaults(func=cmd_check_cert)
    return ap


def run_cli(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0,) else 0
    try:
        return args.func(args)
    except (ParseError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
