"""``calibra`` command line front end.

Exit status: 0 on success, 1 on a domain error (the error class name is
printed), 2 on usage errors. Output is deterministic for identical argv
and seed; ``CALIBRA_SEED`` sets the default seed (0 otherwise).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import io
from .calibrate import angle_theorem, comass
from .errors import CalibraError
from .forms import OrientedPlane
from .graphpde import boundary_preset, solve_newton, solve_picard
from .holonomy import (
    g2_phi,
    g2_star_phi,
    holomorphic_volume,
    kahler_power,
    lambda27_eigenvalue,
    lambda27_projector,
    spin7_phi,
    structure_identities,
)
from .lawlor import lawlor_asymptotic, lawlor_sample, lawlor_solve, ode_residual, slag_defect
from .octonion import fourfold_convention
from .planes import classify, slag_plane
from .varmin import area, first_fundamental_form, mean_curvature, preset

IDENTITY_TOL = 1e-14


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str, degrees: bool = False) -> np.ndarray:
    try:
        vals = np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    return np.deg2rad(vals) if degrees else vals


def _default_seed() -> int:
    env = os.environ.get("CALIBRA_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"CALIBRA_SEED must be an integer, got {env!r}") from None


NAMED_FORMS = {
    "g2_phi": g2_phi,
    "g2_star_phi": g2_star_phi,
    "spin7_phi": spin7_phi,
}


def _named_form(name: str):
    """``g2_phi``, ``kahler:n:k`` (omega^k/k! on C^n), ``re_upsilon:n``,
    ``im_upsilon:n``, or a path to a JSON form record."""
    if name in NAMED_FORMS:
        return NAMED_FORMS[name]()
    parts = name.split(":")
    try:
        if parts[0] == "kahler" and len(parts) == 3:
            return kahler_power(int(parts[1]), int(parts[2]))
        if parts[0] in ("re_upsilon", "im_upsilon") and len(parts) == 2:
            return holomorphic_volume(int(parts[1]))[parts[0] == "im_upsilon"]
    except ValueError:
        raise UsageError(f"bad form name {name!r}") from None
    return io.form_from_dict(io.load_json(name))


def _plane(path: str) -> OrientedPlane:
    return io.plane_from_dict(io.load_json(path))


# subcommands ----------------------------------------------------------------

def cmd_identities(args):
    rows = [(name, dev, dev <= IDENTITY_TOL) for name, dev in structure_identities()]
    search = fourfold_convention()
    rows.append(("fourfold product convention resolved",
                 0.0 if search.chosen is not None else 1.0, search.chosen is not None))
    mu = lambda27_eigenvalue()
    rank = int(round(np.trace(lambda27_projector())))
    rows.append(("Lambda^2_7 eigenvalue = 3", abs(mu - 3.0), abs(mu - 3.0) < 1e-12))
    rows.append(("Lambda^2_7 dimension = 7", float(abs(rank - 7)), rank == 7))
    ok = all(r[2] for r in rows)
    if args.format == "csv":
        text = io.csv_dumps(["identity", "deviation", "pass"], rows)
    elif args.format == "json":
        text = io.dumps([{"identity": n, "deviation": d, "pass": p} for n, d, p in rows])
    else:
        text = "".join(f"{'PASS' if p else 'FAIL'}  {name}  (deviation {dev:.3g})\n"
                       for name, dev, p in rows)
    return text, 0 if ok else 1


def cmd_classify(args):
    if args.theta is not None:
        P = slag_plane(_floats(args.theta, args.degrees))
    elif args.plane:
        P = _plane(args.plane)
    else:
        raise UsageError("classify needs --plane or --theta")
    c = classify(P)
    rec = {"label": c.label, "phase": c.phase, "defects": c.defects, "values": c.values}
    return _emit(args, rec), 0


def cmd_comass(args):
    form = _named_form(args.form)
    seed = args.seed if args.seed is not None else _default_seed()
    r = comass(form, args.starts, seed)
    rec = {"value": r.value, "starts": r.starts, "converged_fraction": r.converged_fraction,
           "seed": seed, "argmax": r.argmax}
    return _emit(args, rec), 0


def cmd_angle(args):
    if args.theta is not None:
        th = _floats(args.theta, args.degrees)
        n = th.size
        P = OrientedPlane(np.eye(2 * n)[0::2])
        Q = slag_plane(th)
    else:
        if not (args.p and args.q):
            raise UsageError("angle-theorem needs --p and --q, or --theta")
        P, Q = _plane(args.p), _plane(args.q)
    r = angle_theorem(P, Q, args.witness)
    rec = {"minimizing": r.minimizing, "boundary": r.boundary, "psi_sum": r.psi_sum,
           "theta": list(r.theta), "psi": list(r.psi)}
    if args.witness:
        rec["witness"] = None if r.witness is None else {
            "polygon": r.witness.polygon, "u": r.witness.u, "eta": r.eta,
            "eta_canonical": r.witness.eta}
        if r.witness_error:
            rec["witness_error"] = r.witness_error
    return _emit(args, rec), 0


def cmd_lawlor(args):
    psi = _floats(args.psi, args.degrees)
    sol = lawlor_solve(psi)
    p = sol.params
    seed = args.seed if args.seed is not None else _default_seed()
    n_t = max(1, int(round(np.sqrt(args.samples))))
    n_dir = max(1, args.samples // n_t)
    ts = np.linspace(-args.t_max, args.t_max, n_t)
    samples = lawlor_sample(p, ts, n_dir, seed)
    rows = []
    for s in samples:
        rows.append([s.t, *s.dir, *s.point, *slag_defect(s)])
    if args.format == "csv":
        n = p.n
        header = (["t"] + [f"dir{j + 1}" for j in range(n)]
                  + [f"{c}{j + 1}" for j in range(n) for c in ("x", "y")]
                  + ["omega_defect", "re_upsilon_defect", "im_upsilon_defect"])
        return io.csv_dumps(header, rows), 0
    D = np.array([r[-3:] for r in rows])
    rec = {"a": list(p.a), "c": p.c, "solve_residual": sol.residual,
           "iterations": sol.iterations, "asymptotic_angles": lawlor_asymptotic(p),
           "samples": len(samples), "max_defects": D.max(axis=0),
           "max_ode_residual": max(ode_residual(p, t) for t in ts)}
    return io.dumps(rec), 0


def cmd_surface(args):
    patch = preset(args.preset)
    if args.op == "area":
        rec = {"preset": args.preset, "area": area(patch, args.grid), "grid": args.grid}
    else:
        if args.at is None:
            raise UsageError(f"--op {args.op} needs --at u,v")
        uv = _floats(args.at)
        if uv.size != 2:
            raise UsageError("--at takes two numbers")
        if args.op == "mean-curvature":
            H = mean_curvature(patch, uv[0], uv[1])
            rec = {"preset": args.preset, "at": uv, "H": H, "norm": float(np.linalg.norm(H))}
        else:
            rec = {"preset": args.preset, "at": uv, "g": first_fundamental_form(patch, uv[0], uv[1])}
    return _emit(args, rec), 0


def cmd_pde(args):
    dim = 3 if args.eq == "slag3" else args.dim
    b = boundary_preset(args.boundary, args.grid, dim, args.amplitude)
    solver = solve_newton if args.method == "newton" else solve_picard
    r = solver(args.eq, b)
    rec = {"equation": args.eq, "method": r.method, "grid": args.grid, "h": b.h,
           "iterations": r.iterations, "residual_norm": r.residual_norm}
    if args.out and args.out.endswith(".grid"):
        io.write_grid(args.out, r.solution)
        args.out = None
        return io.dumps(rec), 0
    if args.format == "csv":
        X = r.solution.coords()
        header = [f"x{i + 1}" for i in range(dim)] + ["value"]
        cols = [x.ravel() for x in X] + [r.solution.values.ravel()]
        return io.csv_dumps(header, zip(*cols)), 0
    return io.dumps(rec), 0


def _emit(args, rec) -> str:
    if args.format == "csv":
        return io.csv_dumps(["key", "value"], io.flatten(rec))
    return io.dumps(rec)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"),
                        help="json (default; identities prints pass/fail lines) or csv")
    common.add_argument("--threads", type=int, default=1,
                        help="accepted for compatibility; output does not depend on it")
    common.add_argument("--degrees", action="store_true", help="angles given in degrees")

    p = _Parser(prog="calibra", description="Calibrated geometry in flat space.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("identities", parents=[common], help="check the structure identities")
    s.set_defaults(func=cmd_identities)

    s = sub.add_parser("classify", parents=[common], help="classify an oriented plane")
    s.add_argument("--plane", help="JSON plane record")
    s.add_argument("--theta", help="classify P(theta) instead (comma separated)")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("comass", parents=[common], help="estimate the comass of a form")
    s.add_argument("--form", required=True,
                   help="g2_phi, g2_star_phi, spin7_phi, kahler:n:k, re_upsilon:n, "
                        "im_upsilon:n or a JSON form record")
    s.add_argument("--starts", type=int, default=100)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_comass)

    s = sub.add_parser("angle-theorem", parents=[common], help="angle criterion for two planes")
    s.add_argument("--p")
    s.add_argument("--q")
    s.add_argument("--theta", help="use P = R^n and Q = P(theta)")
    s.add_argument("--witness", action="store_true")
    s.set_defaults(func=cmd_angle)

    s = sub.add_parser("lawlor", parents=[common], help="solve for and sample a Lawlor neck")
    s.add_argument("--psi", required=True, help="comma separated angles summing to pi")
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--t-max", type=float, default=3.0)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_lawlor)

    s = sub.add_parser("surface", parents=[common], help="surface patch geometry")
    s.add_argument("--preset", required=True, help="helicoid, catenoid, sphere or graph:<expr>")
    s.add_argument("--op", choices=("mean-curvature", "area", "metric"), default="mean-curvature")
    s.add_argument("--at", help="u,v")
    s.add_argument("--grid", type=int, default=64)
    s.set_defaults(func=cmd_surface)

    s = sub.add_parser("pde", parents=[common], help="solve a graph equation")
    s.add_argument("--eq", choices=("minimal", "slag2", "slag3"), required=True)
    s.add_argument("--grid", type=int, default=33, help="points per axis")
    s.add_argument("--dim", type=int, choices=(2, 3), default=2, help="grid dimension for minimal")
    s.add_argument("--boundary", default="harmonic-cubic")
    s.add_argument("--amplitude", type=float, default=1.0)
    s.add_argument("--method", choices=("newton", "picard"), default="newton")
    s.set_defaults(func=cmd_pde)
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text, code = args.func(args)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return code
    except UsageError as exc:
        stderr.write(parser.format_usage())
        stderr.write(f"{exc}\n")
        return 2
    except SystemExit as exc:          # --help
        return int(exc.code or 0)
    except CalibraError as exc:
        stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 1
    except (OSError, ValueError, KeyError, TypeError) as exc:
        stderr.write(f"calibra: error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())
