"""Command-line front end.

Subcommands: ``simulate``, ``equilibrium``, ``spectrum``, ``qroots``,
``hopf``, ``table1``.  JSON for structured results, CSV for tables and time
series; all floats at 17 significant digits so outputs round-trip losslessly.
Exit codes: 0 success, 1 numeric failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import charfn, equilibria, hopf, roots, sim
from .model import ModelParams, StateVector

__all__ = ["main"]


def _fmt(x: float) -> float:
    # json emits shortest-repr floats, which round-trip; keep as float
    return float(x)


def _add_MK(sp, require_M: bool = True):
    sp.add_argument("--M", type=int, required=require_M, help="largest cluster size")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--K", type=float, help="atomization rate")
    g.add_argument("--kappa", type=float, help="scaled rate K*sqrt(M)")


def _params(args) -> ModelParams:
    if args.kappa is not None:
        K = args.kappa / math.sqrt(args.M)
        print(f"kappa={args.kappa:.17g} converted to K={K:.17g} at M={args.M}",
              file=sys.stderr)
        return ModelParams(args.M, K)
    return ModelParams(args.M, args.K)


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bubbelator",
                                 description="finite cluster model with atomization")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="integrate the nonlinear system")
    _add_MK(sp)
    sp.add_argument("--n1", type=float, required=True, help="initial monomer density")
    sp.add_argument("--fill", type=float, required=True, help="initial density of sizes 2..M")
    sp.add_argument("--t-end", type=float, required=True)
    sp.add_argument("--atol", type=float, default=1e-10)
    sp.add_argument("--rtol", type=float, default=1e-8)
    sp.add_argument("--out", default=None, help="CSV output path (default stdout)")
    sp.add_argument("--verify", action="store_true")

    sp = sub.add_parser("equilibrium", help="equilibrium profile at given z or mass")
    _add_MK(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--z", type=float, help="monomer density of the equilibrium")
    g.add_argument("--mass", type=float, help="target total mass (z solved for)")
    sp.add_argument("--out", default=None)
    sp.add_argument("--verify", action="store_true")

    sp = sub.add_parser("spectrum", help="all eigenvalues of the linearization")
    _add_MK(sp)
    sp.add_argument("--out", default=None)
    sp.add_argument("--verify", action="store_true")

    sp = sub.add_parser("qroots", help="limit-function roots and their curves")
    sp.add_argument("--j-max", type=int, default=3)
    sp.add_argument("--kappa-grid", default=None,
                    help="comma-separated kappa values for curve continuation")
    sp.add_argument("--out", default=None)
    sp.add_argument("--verify", action="store_true")

    sp = sub.add_parser("hopf", help="critical crossing point kappa_j(M)")
    sp.add_argument("--M", type=int, required=True)
    sp.add_argument("--j", type=int, default=1)
    sp.add_argument("--out", default=None)
    sp.add_argument("--verify", action="store_true")

    sp = sub.add_parser("table1", help="first-crossing table over system sizes")
    sp.add_argument("--M", default="100,1000,10000",
                    help="comma-separated system sizes")
    sp.add_argument("--out", default=None, help="CSV output path (text table to stderr)")
    sp.add_argument("--verify", action="store_true")
    return ap


def _cmd_simulate(args) -> int:
    p = _params(args)
    n0 = np.full(p.M, args.fill)
    n0[0] = args.n1
    traj = sim.integrate(p, StateVector(n0), args.t_end,
                         atol=args.atol, rtol=args.rtol)
    if args.verify:
        drift = float(np.max(np.abs(traj.mass_drift)))
        if drift > 1e-8:
            print(f"verify failed: relative mass drift {drift:.3g} > 1e-8", file=sys.stderr)
            return 1
        print(f"verify: mass drift {drift:.3g}, "
              f"{traj.step_stats['accepted']} accepted / {traj.step_stats['rejected']} rejected steps",
              file=sys.stderr)
    _emit(sim.trajectory_csv(traj), args.out)
    return 0


def _cmd_equilibrium(args) -> int:
    p = _params(args)
    z = args.z if args.z is not None else equilibria.find_z_for_mass(p, args.mass)
    eq = equilibria.general_equilibrium(p, z)
    if args.verify:
        from .model import rhs
        resid = float(np.max(np.abs(rhs(p, StateVector(eq.densities)))))
        if resid > 1e-8 * (1.0 + eq.mass):
            print(f"verify failed: equilibrium residual {resid:.3g}", file=sys.stderr)
            return 1
        print(f"verify: rhs residual at equilibrium {resid:.3g}", file=sys.stderr)
    doc = {
        "M": p.M, "K": _fmt(p.K), "z": _fmt(eq.z),
        "alpha": None if math.isnan(eq.alpha) else _fmt(eq.alpha),
        "mass": _fmt(eq.mass), "J": _fmt(eq.J),
        "densities": [_fmt(x) for x in eq.densities],
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def _cmd_spectrum(args) -> int:
    p = _params(args)
    spec = roots.spectrum_via_F(p)
    if len(spec.eigenvalues) != p.M:
        print(f"numeric failure: recovered {len(spec.eigenvalues)} of {p.M} eigenvalues",
              file=sys.stderr)
        return 1
    recs = sorted(spec.records, key=lambda r: (r[0].real, r[0].imag))
    if args.verify:
        worst = 0.0
        for lam, phi, _ in recs:
            if lam == 0:
                continue
            v = charfn.F_of_phi(p, phi)
            worst = max(worst, abs(v.value) / roots._F_scale(p, phi))
        if worst > 1e-9:
            print(f"verify failed: worst relative |F| residual {worst:.3g}", file=sys.stderr)
            return 1
        print(f"verify: worst relative |F| residual {worst:.3g}", file=sys.stderr)
    doc = {
        "M": p.M, "K": _fmt(p.K),
        "n_unstable_pairs": spec.n_unstable_pairs,
        "eigenvalues": [
            {"re": _fmt(lam.real), "im": _fmt(lam.imag),
             "phi_re": _fmt(complex(phi).real), "phi_im": _fmt(complex(phi).imag),
             "simple": bool(simple)}
            for lam, phi, simple in recs
        ],
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def _cmd_qroots(args) -> int:
    ts = roots.tan_eq_t_roots(args.j_max)
    lines = ["j,t_j,kappa_j0,kappa,z_re,z_im"]
    for j, t in enumerate(ts, start=1):
        k0 = roots.kappa_j0(j)
        lines.append(f"{j},{t:.17g},{k0:.17g},{k0:.17g},0,{t:.17g}")
        if args.kappa_grid:
            grid = [float(s) for s in args.kappa_grid.split(",")]
            curve = roots.q_root_curve(j, grid)
            for kappa, z in curve.samples:
                lines.append(f"{j},{t:.17g},{k0:.17g},{kappa:.17g},{z.real:.17g},{z.imag:.17g}")
    if args.verify:
        worst = max(abs(math.tan(t) - t) for t in ts)
        if worst > 1e-9:
            print(f"verify failed: worst tan(t)-t residual {worst:.3g}", file=sys.stderr)
            return 1
        print(f"verify: worst tan(t)-t residual {worst:.3g}", file=sys.stderr)
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_hopf(args) -> int:
    hp = hopf.find_hopf(args.M, args.j)
    if args.verify:
        if hp.residual_F > 1e-10 or hp.residual_ReLambda > 1e-12:
            print(f"verify failed: residuals |F|={hp.residual_F:.3g}, "
                  f"|Re lam|/|lam|={hp.residual_ReLambda:.3g}", file=sys.stderr)
            return 1
        print(f"verify: |F| residual {hp.residual_F:.3g}, "
              f"|Re lam|/|lam| {hp.residual_ReLambda:.3g}", file=sys.stderr)
    doc = {
        "M": hp.M, "j": hp.j, "K": _fmt(hp.K), "kappa": _fmt(hp.kappa),
        "omega": _fmt(hp.omega),
        "lambda": {"re": _fmt(hp.lam.real), "im": _fmt(hp.lam.imag)},
        "residual_F": _fmt(hp.residual_F),
        "residual_ReLambda": _fmt(hp.residual_ReLambda),
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def _cmd_table1(args) -> int:
    Ms = [int(s) for s in args.M.split(",")]
    rows = hopf.table1(Ms)
    sys.stderr.write(hopf.format_table1_text(rows))
    _emit(hopf.format_table1_csv(rows), args.out)
    if args.verify or any(hp is None for _, hp, _ in rows):
        bad = [(M, err) for M, hp, err in rows if hp is None]
        if bad:
            print(f"numeric failure in rows: {bad}", file=sys.stderr)
            return 1
        print("verify: all rows converged", file=sys.stderr)
    return 0


_DISPATCH = {
    "simulate": _cmd_simulate,
    "equilibrium": _cmd_equilibrium,
    "spectrum": _cmd_spectrum,
    "qroots": _cmd_qroots,
    "hopf": _cmd_hopf,
    "table1": _cmd_table1,
}


def main(argv=None) -> int:
    threads = os.environ.get("BUBBELATOR_THREADS")
    if threads is not None:
        # cap BLAS-level parallelism for deterministic, bounded resource use
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return _DISPATCH[args.command](args)
    except (ValueError, RuntimeError, sim.StiffnessError, sim.BlowUpError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
