"""Command line entry points.

    ncbal run <config>            run a simulation from a config file
    ncbal check-flux ...          certify a numerical flux against its contracts
    ncbal mesh-info <src>         print mesh statistics (file or builder spec)
    ncbal verify <suite>          run acceptance scenarios

Exit codes: 0 success, 1 configuration or usage error, 2 numerical abort,
3 failed contract or criterion.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import ConfigError, build_run, load_config
from .fluxes import CONTRACT_NAMES, SampleSpec, certify_contracts, make_flux
from .mesh import MeshParseError, MeshValidationError, build_structured_2d, build_uniform_1d, load_mesh
from .models import AdmissibilityError, LagrangianGas, PorousEuler, ShallowWater, StateBox
from .solver import ConfigurationError, SolverAbort, run

__all__ = ["main", "console_main"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="ncbal", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="run a simulation from a config file")
    run_p.add_argument("config", help="path to the run configuration")

    chk = sub.add_parser("check-flux", help="certify a numerical flux")
    chk.add_argument("--flux", required=True, choices=["rusanov", "hydrostatic", "acoustic"])
    chk.add_argument("--model", required=True, choices=["sw1d", "sw2d", "porous_euler", "lagrangian"])
    chk.add_argument("--box", required=True, help="state box, e.g. '0.5:2,-1:1'")
    chk.add_argument("--alpha", default="0:0", help="alpha interval, e.g. '0:0.4'")
    chk.add_argument("--samples", type=int, default=10000)
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--contracts", default=None, help="comma list; defaults to all applicable")
    chk.add_argument("--g", type=float, default=9.81)
    chk.add_argument("--gamma", type=float, default=1.4)
    chk.add_argument("--c-v", dest="c_v", type=float, default=1.0)
    chk.add_argument("--z0", type=float, default=None, help="lake level for well-balancing pairs")
    chk.add_argument("--t0", type=float, default=None)
    chk.add_argument("--p0", type=float, default=None)
    chk.add_argument("--u0", type=float, default=0.0)
    chk.add_argument("--p-minus-alpha", dest="p_minus_alpha", type=float, default=None)
    chk.add_argument("--report", default=None, help="write a report file here")

    mi = sub.add_parser("mesh-info", help="print mesh statistics")
    mi.add_argument("source", help="mesh file path or builder spec like 'uniform_1d:cells=8'")

    ver = sub.add_parser("verify", help="run acceptance scenarios")
    ver.add_argument("suite", help="wellbalance | lyapunov | entropy | conservation | cone | all")
    return p


def _cmd_run(args) -> int:
    if not os.path.exists(args.config):
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return 1
    try:
        config = load_config(args.config)
        plan = build_run(config, base_dir=os.path.dirname(os.path.abspath(args.config)))
    except (ConfigError, ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        result = run(plan.setup)
    except (ConfigurationError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SolverAbort, AdmissibilityError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 2
    V = result.lyapunov_series
    v_final = V[-1] if len(V) and not np.isnan(V[-1]) else None
    msg = f"finished: status={result.status} steps={result.final.step} time={result.final.time:.6g}"
    if v_final is not None:
        msg += f" lyapunov={v_final:.6e}"
    print(msg)
    if plan.diagnostics_path:
        print(f"diagnostics: {plan.diagnostics_path}")
    for p in result.snapshots_written:
        print(f"snapshot: {p}")
    return 0


def _parse_box(box_spec: str, alpha_spec: str, n_comp: int) -> StateBox:
    try:
        parts = [tuple(float(v) for v in part.split(":")) for part in box_spec.split(",")]
        a_lo, a_hi = (float(v) for v in alpha_spec.split(":"))
    except ValueError:
        raise UsageError(f"bad box spec {box_spec!r} / alpha spec {alpha_spec!r}") from None
    if any(len(p) != 2 for p in parts):
        raise UsageError(f"bad box spec {box_spec!r}: each component needs 'lo:hi'")
    if len(parts) != n_comp:
        raise UsageError(f"box has {len(parts)} components, the model needs {n_comp}")
    return StateBox(tuple(p[0] for p in parts), tuple(p[1] for p in parts), a_lo, a_hi)


def _cmd_check_flux(args) -> int:
    if args.samples < 1:
        print("error: --samples must be positive", file=sys.stderr)
        return 1
    if args.model == "sw1d":
        model = ShallowWater(g=args.g, dim=1)
    elif args.model == "sw2d":
        model = ShallowWater(g=args.g, dim=2)
    elif args.model == "porous_euler":
        model = PorousEuler(gamma=args.gamma, c_v=args.c_v)
    else:
        model = LagrangianGas(gamma=args.gamma, c_v=args.c_v)
    box = _parse_box(args.box, args.alpha, model.n_comp)

    stationary = {}
    if args.z0 is not None:
        stationary = {"kind": "lake_at_rest", "z0": args.z0}
    elif args.p_minus_alpha is not None:
        stationary = {
            "kind": "hydrostatic_column",
            "U0": args.u0,
            "P0": args.p_minus_alpha,
            "T0": args.t0 if args.t0 is not None else 1.0,
        }
    elif args.t0 is not None and args.p0 is not None:
        stationary = {"kind": "constant_Tp", "T0": args.t0, "p0": args.p0}

    if args.contracts is None:
        contracts = ["consistency", "conservation", "admissibility", "entropy_stability", "dissipation_gap"]
        if stationary:
            contracts.append("well_balancing")
    else:
        contracts = [c.strip() for c in args.contracts.split(",") if c.strip()]
        for c in contracts:
            if c not in CONTRACT_NAMES:
                print(f"error: unknown contract {c!r}", file=sys.stderr)
                return 1
    if "well_balancing" in contracts and not stationary:
        print("error: well_balancing needs a stationary family (--z0 / --t0 --p0 / --p-minus-alpha)", file=sys.stderr)
        return 1

    try:
        flux = make_flux(args.flux)
        spec = SampleSpec(
            box=box,
            n_samples=args.samples,
            seed=args.seed,
            contracts=tuple(contracts),
            stationary=stationary,
        )
        report = certify_contracts(flux, model, spec)
    except (ValueError, TypeError, AdmissibilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = report.to_text()
    print(text, end="")
    if args.report:
        out = args.report
        base = os.environ.get("NCBAL_OUTPUT_DIR")
        if base and not os.path.isabs(out):
            out = os.path.join(base, out)
        os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
        print(f"report: {out}")
    return 0 if report.all_passed else 3


def _mesh_from_spec(source: str):
    if os.path.exists(source):
        return load_mesh(source)
    if ":" in source:
        kind, _, rest = source.partition(":")
        opts = {}
        for item in rest.split(","):
            if not item:
                continue
            if "=" not in item:
                raise UsageError(f"bad builder option {item!r}")
            k, v = item.split("=", 1)
            opts[k.strip()] = v.strip()
        try:
            if kind == "uniform_1d":
                return build_uniform_1d(
                    float(opts.get("x_min", 0.0)),
                    float(opts.get("x_max", 1.0)),
                    int(opts.get("cells", 8)),
                    boundary=opts.get("boundary", "wall"),
                )
            if kind == "structured_2d":
                return build_structured_2d(
                    int(opts.get("nx", 4)),
                    int(opts.get("ny", 4)),
                    float(opts.get("x_min", 0.0)),
                    float(opts.get("x_max", 1.0)),
                    float(opts.get("y_min", 0.0)),
                    float(opts.get("y_max", 1.0)),
                    element=opts.get("element", "quad"),
                )
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        raise UsageError(f"unknown mesh builder {kind!r}")
    raise UsageError(f"mesh source not found: {source}")


def _cmd_mesh_info(args) -> int:
    try:
        mesh = _mesh_from_spec(args.source)
    except (MeshParseError, MeshValidationError, UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    vol_q = mesh.areas / mesh.h_mesh**mesh.dim
    per_q = mesh.h_mesh ** (mesh.dim - 1) / mesh.perimeters
    print(f"dimension:        {mesh.dim}")
    print(f"cells:            {mesh.n_cells}")
    print(f"interfaces:       {mesh.n_faces}")
    print(f"boundary faces:   {mesh.n_boundary_faces}")
    print(f"h_mesh:           {mesh.h_mesh:.12g}")
    print(f"a_mesh:           {mesh.a_mesh:.12g}")
    print(f"worst |K|/h^d:    {vol_q.min():.12g} (cell {int(np.argmin(vol_q))})")
    print(f"worst h^(d-1)/|dK|: {per_q.min():.12g} (cell {int(np.argmin(per_q))})")
    return 0


def _cmd_verify(args) -> int:
    from .acceptance import SUITES, run_suite, summary_line

    if args.suite not in SUITES:
        print(
            f"error: unknown suite {args.suite!r} (choose from {', '.join(SUITES)})",
            file=sys.stderr,
        )
        return 1
    results = run_suite(args.suite)
    for r in results:
        print(summary_line(r))
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"FAILED {len(failed)}/{len(results)} criteria: " + ", ".join(r.name for r in failed))
        return 3
    print(f"OK {len(results)}/{len(results)} criteria passed")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return 1
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "check-flux":
            return _cmd_check_flux(args)
        if args.command == "mesh-info":
            return _cmd_mesh_info(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return 1
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
