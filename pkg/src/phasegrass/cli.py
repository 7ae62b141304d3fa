"""Command-line front end.

Exit codes: 0 success, 1 internal error or failed verification,
2 validation error, 3 parity violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from . import __version__, boson, fock, verify
from .fermion import (
    CorrelationQuery,
    compute_p,
    compute_phi,
    correlation_direct,
    correlation_via_p,
    correlation_via_phi,
)

EXIT_OK, EXIT_INTERNAL, EXIT_VALIDATION, EXIT_PARITY = 0, 1, 2, 3


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def _load_state(path, allow_parity_violation=False):
    spec = fock.StateSpec.load(path)
    if allow_parity_violation:
        spec.allow_parity_violation = True
    return fock.density_from_spec(spec)


def _fmt(z: complex) -> str:
    re_, im = z.real + 0.0, z.imag + 0.0
    if abs(re_) < 5e-13:
        re_ = 0.0
    if abs(im) < 5e-13:
        return f"{re_:.12g}"
    return f"{re_:.12g}{im:+.12g}j"


def cmd_compute(args) -> int:
    rho = _load_state(args.state, args.allow_parity_violation)
    rep = compute_p(rho) if args.flavor == "p" else compute_phi(rho)
    _write_json(args.out, rep.to_dict())
    print(rep)
    return EXIT_OK


def cmd_moments(args) -> int:
    rho = _load_state(args.state, args.allow_parity_violation)
    q = CorrelationQuery.parse(args.query)
    q.check(fock.modes_of(rho))
    vp = correlation_via_p(compute_p(rho), q)
    vphi = correlation_via_phi(compute_phi(rho), q)
    vd = correlation_direct(rho, q)
    disc = max(abs(vp - vd), abs(vphi - vd), abs(vp - vphi))
    rows = [("query", "via-P", "via-phi", "direct-trace", "max-discrepancy"),
            (str(q), _fmt(vp), _fmt(vphi), _fmt(vd), f"{disc:.3e}")]
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify.run_suite(args.scope, args.seed, (args.dim, args.grid_halfwidth, args.grid_points))
    for c in report.checks:
        print(c.line())
    s = report.summary
    print(f"{s['passed']}/{s['total']} checks passed (scope={args.scope}, seed={args.seed})")
    if args.out:
        _write_json(args.out, report.to_dict(timings=not args.no_timings))
    return EXIT_OK if report.passed else EXIT_INTERNAL


def cmd_boson_p(args) -> int:
    grid = boson.ComplexGrid(args.grid_halfwidth, args.grid_points)
    rho = boson.thermal_state(args.nbar, args.dim)
    field = boson.p_function_grid(rho, grid, force=args.force)
    _write_json(args.out, field.to_dict())
    print(f"integral={_fmt(field.integral())} rim_max={field.rim_max:.3e} forced={field.forced}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phasegrass", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="compute P or phi for a state file")
    p.add_argument("--state", required=True)
    p.add_argument("--flavor", choices=("p", "phi"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--allow-parity-violation", action="store_true")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("moments", help="normally ordered correlation via P, phi and trace")
    p.add_argument("--state", required=True)
    p.add_argument("--query", required=True, help='e.g. "c1+ c2+ c2 c1"')
    p.add_argument("--allow-parity-violation", action="store_true")
    p.set_defaults(func=cmd_moments)

    def grid_flags(p, dim=boson.DEFAULT_DIM, x=boson.DEFAULT_HALFWIDTH, m=boson.DEFAULT_POINTS):
        p.add_argument("--dim", type=int, default=dim)
        p.add_argument("--grid-halfwidth", type=float, default=x)
        p.add_argument("--grid-points", type=int, default=m)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--scope", choices=("fermion", "boson", "all"), default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--no-timings", action="store_true", help="omit elapsed times from the JSON report")
    grid_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("boson-p", help="thermal-state P on a grid, written as grid JSON")
    p.add_argument("--nbar", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true", help="evaluate even if chi does not decay on the rim")
    grid_flags(p, *verify.P_GRID)
    p.set_defaults(func=cmd_boson_p)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except fock.ParityViolationError as exc:
        print(f"parity violation: {exc}", file=sys.stderr)
        return EXIT_PARITY
    except (fock.ValidationError, boson.PNotRepresentableError, ValueError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
