"""Command-line entry point: ``greedypursuit {solve, geometry, experiment, verify}``.

Exit codes: 0 success, 1 solver error or failed verdict, 2 bad input
(schema problems, missing files, unknown names, unsupported requests).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import atoms as atoms_mod
from . import geometry, harness, objectives
from .errors import DomainError, GreedyError, SchemaError, UnsupportedError
from .solvers import SolverSpec, Trace, run


class InputError(Exception):
    """Bad command-line input; maps to exit code 2."""


def _load_json(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"file not found: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}: invalid JSON ({exc})") from None


def _resolve(ref, base: Path):
    """A config entry is either an inline document or a path to one."""
    if isinstance(ref, str):
        return _load_json(base / ref)
    if ref is None:
        raise InputError("missing document")
    return ref


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    p = Path(out)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _pairs(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip().replace("-", "_")] = _parse_value(v)
    return out


def problem_snapshot(atoms_doc: dict, obj_doc: dict) -> dict:
    return {"atoms": atoms_doc, "objective": obj_doc}


# ------------------------------------------------------------------ commands


def cmd_solve(args) -> int:
    cfg_path = Path(args.config)
    cfg = _load_json(cfg_path)
    base = cfg_path.parent
    atoms_doc = _resolve(cfg.get("atoms"), base)
    obj_doc = _resolve(cfg.get("objective"), base)
    solver_doc = _resolve(cfg.get("solver"), base)
    atom_set = atoms_mod.from_dict(atoms_doc)
    obj = objectives.from_dict(obj_doc)
    spec = SolverSpec.from_dict(solver_doc)
    seed = args.seed if args.seed is not None else cfg.get("seed")
    x0 = cfg.get("x0")
    x_star = cfg.get("x_star")
    trace = run(spec, obj, atom_set, x0=x0, seed=seed, x_star=x_star)
    trace.config["problem"] = problem_snapshot(atoms_doc, obj_doc)
    out = args.out or cfg.get("out")
    if out is None:
        _write(trace.to_json(), None)
        return 0
    p = Path(out)
    if p.suffix != ".json":
        p = p.with_suffix(".json")
    _write(trace.to_json(), p)
    _write(trace.to_csv(), p.with_suffix(".csv"))
    return 0


def cmd_geometry(args) -> int:
    atom_set = atoms_mod.from_dict(_load_json(args.atoms))
    obj = objectives.from_dict(_load_json(args.objective)) if args.objective else None
    rep = geometry.analyze(
        atom_set,
        obj,
        rho=args.rho,
        mdw_restarts=args.mdw_restarts,
        seed=args.seed or 0,
        coherence_m=args.coherence_m,
        inradius=True if args.inradius else None,
    )
    _write(json.dumps(harness._plain(rep.to_dict()), indent=1, sort_keys=True), args.out)
    return 0


def cmd_experiment(args) -> int:
    params = _pairs(args.set)
    if args.d is not None:
        params["d"] = args.d
    if args.T is not None:
        params["T"] = args.T
    try:
        rep = harness.run_experiment(args.name, params, seed=args.seed or 0, jobs=args.jobs)
    except TypeError as exc:
        raise InputError(f"bad parameter for {args.name}: {exc}") from None
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write(rep.to_json(), out / "report.json")
        for name, tr in rep.traces.items():
            _write(tr.to_csv(), out / f"{name}.csv")
    else:
        _write(rep.to_json(), None)
    status = "PASS" if rep.passed else "FAIL"
    print(f"{args.name}: {status} {json.dumps(harness._plain(rep.verdicts), sort_keys=True)}", file=sys.stderr)
    return 0 if rep.passed else 1


def bound_for_trace(trace: Trace, kind: str, delta: float, extra: dict) -> geometry.RateBound:
    """Fill in the envelope parameters a trace can supply on its own."""
    params = {"delta": delta, "eps0": float(trace.subopt[0])}
    if trace.rho_posthoc is not None:
        params["rho"] = trace.rho if trace.rho is not None else trace.rho_posthoc
    consts = trace.config.get("constants") or {}
    for key in ("Cf", "CfMP"):
        if consts.get(key) is not None:
            params[key] = consts[key]
    prob = trace.config.get("problem")
    if prob:
        S = atoms_mod.from_dict(prob["atoms"])
        obj = objectives.from_dict(prob["objective"])
        params.update(L=obj.L, diam=S.diameter, radius=S.radius)
        if obj.mu is not None:
            params["mu"] = obj.mu
        needs_mdw = kind in ("thm3", "linear_mp", "thm8", "linear_affine") and "mdw" not in extra
        if needs_mdw:
            params["mdw"] = geometry.mdw(S).value
        if kind in ("thm7", "sublinear_mp", "thm8", "linear_affine") and "CfMP" not in params and "CfMP" not in extra:
            est = geometry.curvature_CfMP(obj, S, params.get("rho", 1.0))
            params["CfMP"] = est.value if est.exact else est.ceiling
        if kind in ("thm6",) and "Cf" not in params and "Cf" not in extra:
            est = geometry.curvature_Cf(obj, S)
            params["Cf"] = est.value if est.exact else est.ceiling
    params.update(extra)
    if kind in ("thm8", "linear_affine") and "muFMP" not in params and {"mu", "mdw"} <= params.keys():
        params["muFMP"] = params["mu"] * params.get("rho", 1.0) ** 2 * params["mdw"] ** 2
    return geometry.rate_bound(kind, **params)


def cmd_verify(args) -> int:
    trace = Trace.from_dict(_load_json(args.trace))
    bound = bound_for_trace(trace, args.kind, args.delta, _pairs(args.param))
    rep = harness.check_envelope(trace, bound, args.eps_floor)
    _write(rep.to_json(), args.out)
    status = "PASS" if rep.passed else "FAIL"
    print(f"verify {bound.kind}: {status} ({rep.aggregates['violations']} violations)", file=sys.stderr)
    return 0 if rep.passed else 1


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file (or directory for experiments)")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="concurrent runs for experiments")

    p = argparse.ArgumentParser(prog="greedypursuit", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="run a solver from a JSON config")
    s.add_argument("config")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("geometry", parents=[common], help="report geometric constants of an atom set")
    g.add_argument("atoms")
    g.add_argument("--objective", help="objective document for the curvature constants")
    g.add_argument("--rho", type=float, default=1.0)
    g.add_argument("--mdw-restarts", type=int, default=200)
    g.add_argument("--coherence-m", type=int, nargs="+")
    g.add_argument("--inradius", action="store_true", help="require the effective inradius")
    g.set_defaults(func=cmd_geometry)

    e = sub.add_parser("experiment", parents=[common], help="run a rate-checking experiment")
    e.add_argument("name", choices=harness.EXPERIMENTS)
    e.add_argument("--d", type=int)
    e.add_argument("--T", type=int)
    e.add_argument("--set", action="append", metavar="KEY=VALUE", help="extra experiment parameter (JSON value)")
    e.set_defaults(func=cmd_experiment)

    v = sub.add_parser("verify", parents=[common], help="check a saved trace against a rate bound")
    v.add_argument("trace")
    v.add_argument("--kind", required=True)
    v.add_argument("--delta", type=float, default=1.0)
    v.add_argument("--param", action="append", metavar="KEY=VALUE")
    v.add_argument("--eps-floor", type=float, default=0.0)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("seed", None), ("out", None), ("jobs", 1)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return args.func(args)
    except (InputError, SchemaError, UnsupportedError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GreedyError, np.linalg.LinAlgError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
