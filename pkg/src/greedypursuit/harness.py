"""Experiments that check the convergence guarantees numerically and grade the outcome."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import atoms as atoms_mod
from . import geometry
from .atoms import AtomSet, HalfDictionary
from .errors import DomainError
from .lmo import LmoConfig
from .objectives import LeastSquares, QuadraticObjective
from .solvers import ActiveSet, SolverSpec, Trace, fw_step, gmp_step, run

REL_SLACK = 1e-9
EXPERIMENTS = ("appendix-a", "corollary2", "fw-to-mp", "envelope", "linear-rate", "coherence-mdw")


@dataclass
class ExperimentReport:
    """Per-run summaries, aggregates and named pass/fail verdicts.

    ``traces`` holds raw traces for CSV export; it is not part of the JSON.
    """

    name: str
    params: dict
    runs: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "runs": self.runs,
            "aggregates": self.aggregates,
            "verdicts": self.verdicts,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), indent=1, sort_keys=True)


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def _map(fn, items, jobs: int = 1):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ------------------------------------------------------------------ envelopes


def check_envelope(trace: Trace, bound: geometry.RateBound, eps_floor: float = 0.0) -> ExperimentReport:
    """Grade a trace against an envelope without modifying it.

    Sublinear kinds need ``ε_t ≤ bound(t)·(1+1e-9)`` for every ``t``.  Linear
    kinds need ``ε_{t+1} ≤ factor·ε_t·(1+1e-9)``; lower-bound kinds need
    ``ε_{t+1} ≥ floor_t·ε_t·(1−1e-9)`` with ``floor_t`` rebuilt from the
    recorded width and atom norm.  Per-step checks skip steps whose ``ε_t``
    is at or below ``eps_floor``, where rounding dominates.
    """
    eps = trace.subopt
    if eps.size == 0 or np.any(np.isnan(eps)):
        raise DomainError("trace carries no suboptimality values")
    violations = []
    if not (bound.is_linear or bound.is_lower):
        for t, e in enumerate(eps):
            b = bound.value(t)
            if e > b * (1 + REL_SLACK):
                violations.append({"t": t, "eps": e, "bound": b})
        checked = eps.size
    else:
        checked = 0
        for t in range(eps.size - 1):
            e0, e1 = eps[t], eps[t + 1]
            if e0 <= eps_floor:
                continue
            rec = trace.records[t]
            if bound.is_linear:
                fac = bound.factor()
                ok = e1 <= fac * e0 * (1 + REL_SLACK)
            elif bound.kind == "cor2":
                fac = bound.factor(t=t)
                ok = e1 >= fac * e0 * (1 - REL_SLACK)
            else:
                fac = bound.factor(width=rec.width, atom_norm=rec.atom_norm)
                ok = e1 >= fac * e0 * (1 - REL_SLACK)
            checked += 1
            if not ok:
                violations.append({"t": t, "eps": e0, "eps_next": e1, "factor": fac})
    rep = ExperimentReport("envelope-check", {"bound": bound.to_dict(), "eps_floor": eps_floor})
    rep.aggregates = {"checked": checked, "violations": len(violations), "first_violations": violations[:5]}
    rep.verdicts = {"no_violations": not violations}
    return rep


# ------------------------------------------------------------------ tightness on two-direction sets


def _appendix_a_theta(args):
    theta, n_inits, seed_seq, T, tiny = args
    S = atoms_mod.theta_pair(theta)
    V = S.vectors
    L = mu = 2.0
    x_star = np.array([-1.0, 1.0])
    w = geometry.mdw(S).value
    bound = geometry.rate_bound("thm3", L=L, mu=mu, mdw=w, radius=S.radius, delta=1.0)
    fac = bound.factor()
    rng = np.random.default_rng(seed_seq)
    X = rng.dirichlet(np.ones(V.shape[0]), size=n_inits) @ V
    nz = np.sum(V * V, axis=1)

    eps = np.sum((X - x_star) ** 2, axis=1)
    eps0 = eps.copy()
    alive = eps >= tiny
    sums = np.zeros(n_inits)
    mins = np.full(n_inits, np.inf)
    steps = np.zeros(n_inits, dtype=int)
    for _ in range(T):
        if not alive.any():
            break
        G = 2.0 * (X - x_star)
        scores = G @ V.T
        idx = np.argmin(scores, axis=1)
        Z = V[idx]
        gamma = -scores[np.arange(n_inits), idx] / (L * nz[idx])
        X_new = X + gamma[:, None] * Z
        eps_new = np.sum((X_new - x_star) ** 2, axis=1)
        r = (eps - eps_new) / (eps * (1.0 - fac))
        sums[alive] += r[alive]
        mins[alive] = np.minimum(mins[alive], r[alive])
        steps[alive] += 1
        X = np.where(alive[:, None], X_new, X)
        eps = np.where(alive, eps_new, eps)
        alive &= eps >= tiny
    per_step_mean = sums / np.maximum(steps, 1)
    emp = np.where(eps > 0, (eps / eps0) ** (1.0 / np.maximum(steps, 1)), 0.0)
    geo = (1.0 - emp) / (1.0 - fac)
    return {
        "theta": float(theta),
        "mdw": w,
        "factor": fac,
        "steps": steps.tolist(),
        "min_ratio": mins.tolist(),
        "mean_ratio": per_step_mean.tolist(),
        "geometric_ratio": geo.tolist(),
        "converged": int(np.sum(~alive)),
    }


def appendix_a_grid() -> np.ndarray:
    return np.linspace(0.1, np.pi / 2, 16)


def run_appendix_a(theta_grid=None, n_inits: int = 20, seed: int = 0, T: int = 10_000, jobs: int = 1) -> ExperimentReport:
    """Tightness of the linear rate on the two-direction sets ``A_θ ∪ −A_θ``.

    Runs norm-corrective MP (variant 0, exact oracle) on ``f(x) = ‖x* − x‖²``
    with ``x* = (−1, 1)`` from Dirichlet-weighted random starts in
    ``conv(A)``.  For each step the ratio ``(ε_t − ε_{t+1}) / (ε_t·(1 − q))``
    compares the observed decrease with the one guaranteed by the per-step
    factor ``q``; values at least 1 mean the guarantee holds.  Runs stop once
    ``ε_t < 1e-14``.  Both the mean per-step ratio and the whole-run
    geometric ratio are reported; the verdict uses the per-step mean.
    """
    grid = appendix_a_grid() if theta_grid is None else np.asarray(theta_grid, dtype=float)
    if grid.size == 0:
        raise DomainError("theta grid is empty")
    if np.any(grid <= 0) or np.any(grid > np.pi / 2 + 1e-12):
        raise DomainError("theta values must lie in (0, pi/2]")
    seqs = np.random.SeedSequence(seed).spawn(grid.size)
    rows = _map(_appendix_a_theta, [(th, n_inits, s, T, 1e-14) for th, s in zip(grid, seqs)], jobs)
    theta_means = [float(np.mean(r["mean_ratio"])) for r in rows]
    theta_geo = [float(np.mean(r["geometric_ratio"])) for r in rows]
    overall_min = float(min(min(r["min_ratio"]) for r in rows))
    rep = ExperimentReport(
        "appendix-a", {"theta_grid": grid.tolist(), "n_inits": n_inits, "seed": seed, "T": T, "truncate_below": 1e-14}
    )
    rep.runs = rows
    rep.aggregates = {
        "min_ratio": overall_min,
        "mean_ratio": float(np.mean(theta_means)),
        "max_ratio": float(max(max(r["mean_ratio"]) for r in rows)),
        "mean_ratio_per_theta": theta_means,
        "geometric_mean_ratio": float(np.mean(theta_geo)),
        "geometric_ratio_per_theta": theta_geo,
    }
    rep.verdicts = {
        "ratios_at_least_one": overall_min >= 1 - REL_SLACK,
        "mean_ratio_at_most_3": rep.aggregates["mean_ratio"] <= 3.0,
    }
    return rep


# ------------------------------------------------------------------ exact decay on the l1 vertices


def run_corollary2(d: int = 10, seed: int = 0) -> ExperimentReport:
    """Matching pursuit on ``{±e_i}`` toward the all-ones target from the origin.

    The error shrinks by exactly ``1 − 1/(d−t)`` per step and hits zero after
    ``d`` steps; the per-step lower bound coincides with the observed factor.
    """
    if d < 2:
        raise DomainError("d must be at least 2")
    S = atoms_mod.l1_vertices(d)
    obj = LeastSquares(np.ones(d))
    tr = run(SolverSpec("mp", T=d, seed=seed), obj, S, np.zeros(d), x_star=np.ones(d))
    eps = tr.subopt
    lower = geometry.rate_bound("thm4", L=obj.L, mu=obj.mu)
    steps = []
    max_err = max_floor_err = 0.0
    for t in range(d - 1):
        obs = eps[t + 1] / eps[t]
        want = 1 - 1 / (d - t)
        rec = tr.records[t]
        floor = lower.factor(width=rec.width, atom_norm=rec.atom_norm)
        max_err = max(max_err, abs(obs - want))
        max_floor_err = max(max_floor_err, abs(floor - obs))
        steps.append({"t": t, "eps": eps[t], "observed": obs, "expected": want, "floor": floor})
    rep = ExperimentReport("corollary2", {"d": d, "seed": seed})
    rep.runs = steps
    rep.aggregates = {
        "eps": eps.tolist(),
        "max_factor_error": max_err,
        "max_floor_error": max_floor_err,
        "final_eps": float(eps[d]),
    }
    rep.verdicts = {
        "factor_exact": max_err <= 1e-12,
        "terminates": eps[d] <= 1e-12,
        "floor_tight": max_floor_err <= 1e-10,
    }
    rep.traces["mp"] = tr
    return rep


# ------------------------------------------------------------------ FW -> MP


def fw_to_mp_instance(d: int = 256, c: float = 8.0):
    """Least squares over ``{±e_i}`` with a fixed iterate whose best atom is ``e_1``.

    The residual is ``c`` in every coordinate (slightly more in the first), and
    ``x_t`` sits at ``−r/2`` away from the first coordinate, so small blow-up
    factors put the FW step in its clipped regime.
    """
    r = np.full(d, c)
    r[0] = c * 1.0001
    x = np.zeros(d)
    x[1:] = -0.5 * r[1:]
    return LeastSquares(x + r), atoms_mod.l1_vertices(d), x


def run_fw_to_mp(alpha_grid=None, instance: dict | None = None, seed: int = 0) -> ExperimentReport:
    """Distance between one FW step on ``αA`` and one MP step on ``A`` as ``α`` grows.

    The FW step is variant 3 (short step with clipping).  ``α`` is admissible
    when ``−⟨∇f, αz−x⟩/(L‖αz−x‖²) ≤ 1``, i.e. the step is not clipped; on
    those ``α`` the log-log slope of the distance should be about −1.
    """
    alphas = 2.0 ** np.arange(4, 15) if alpha_grid is None else np.asarray(alpha_grid, dtype=float)
    if alphas.size == 0 or np.any(alphas < 16):
        raise DomainError("alpha grid must be nonempty with every alpha >= 16")
    inst = instance or {}
    obj, S, x = fw_to_mp_instance(int(inst.get("d", 256)), float(inst.get("c", 8.0)))
    x_mp, _, _ = gmp_step(obj, x, ActiveSet.start(x), S, 0)
    g = obj.grad(x)
    rows = []
    for a in alphas:
        Sa = atoms_mod.scale(S, a)
        x_fw, rec = fw_step(obj, x, Sa, 3)
        z = Sa.vectors[rec.atom_index]
        adm = float(-g @ (z - x) / (obj.L * (z - x) @ (z - x)))
        rows.append(
            {"alpha": float(a), "difference": float(np.linalg.norm(x_fw - x_mp)), "admissibility": adm, "admissible": adm <= 1.0}
        )
    ok = [r for r in rows if r["admissible"]]
    bad = [r for r in rows if not r["admissible"]]
    if not ok:
        raise DomainError("no admissible alpha in the grid")
    rep = ExperimentReport("fw-to-mp", {"alphas": alphas.tolist(), "instance": inst, "seed": seed})
    rep.runs = rows
    slope = None
    if len(ok) >= 2:
        slope = float(np.polyfit(np.log([r["alpha"] for r in ok]), np.log([r["difference"] for r in ok]), 1)[0])
    dec = all(b["difference"] < a["difference"] for a, b in zip(ok, ok[1:]))
    grow = all(b["difference"] > a["difference"] for a, b in zip(bad, bad[1:]))
    rep.aggregates = {"slope": slope, "admissible": len(ok), "inadmissible": len(bad)}
    rep.verdicts = {
        "slope_in_range": slope is not None and -1.2 <= slope <= -0.8,
        "admissible_decreasing": dec,
        "inadmissible_growing": grow,
    }
    return rep


# ------------------------------------------------------------------ envelope and linear-rate studies


def random_quadratic(d: int, seed: int, cond: float = 10.0) -> QuadraticObjective:
    """Strongly convex quadratic with eigenvalues spread over ``[1, cond]`` and a random linear term."""
    rng = np.random.default_rng(seed)
    Qo, _ = np.linalg.qr(rng.standard_normal((d, d)))
    eig = np.linspace(1.0, cond, d)
    return QuadraticObjective((Qo * eig) @ Qo.T, rng.standard_normal(d))


def mp_instances(d: int = 20, n: int = 40, seed: int = 0):
    """The two strongly convex test problems over one symmetric set of ``n`` unit atoms in ``R^d``."""
    if n % 2:
        raise DomainError("n must be even for a symmetric set")
    S = atoms_mod.random_unit_sphere(n // 2, d, seed)
    y = np.random.default_rng(seed + 1).standard_normal(d)
    return S, {"least-squares": LeastSquares(y), "quadratic": random_quadratic(d, seed + 2)}


def _lmo(delta: float, family: str) -> LmoConfig:
    if delta == 1.0:
        return LmoConfig()
    return LmoConfig(mode="approx_fw" if family == "fw" else "approx_mp", delta=delta, impl="adversarial")


def _min_certified(tr: Trace) -> float | None:
    vals = [r.certified_delta for r in tr.records[:-1] if r.certified_delta is not None]
    return min(vals) if vals else None


def _grade(name, tr, bound, rows, rep, eps_floor=0.0):
    chk = check_envelope(tr, bound, eps_floor)
    rows.append(
        {
            "run": name,
            "bound": bound.kind,
            "violations": chk.aggregates["violations"],
            "checked": chk.aggregates["checked"],
            "final_eps": float(tr.subopt[-1]),
            "rho_posthoc": tr.rho_posthoc,
            "min_certified_delta": _min_certified(tr),
        }
    )
    rep.traces[name] = tr


def run_envelope(
    d_fw: int = 50, T_fw: int = 200, d: int = 20, n: int = 40, T_mp: int = 300, deltas=(1.0, 0.5), seed: int = 0
) -> ExperimentReport:
    """Sublinear envelopes for FW (every variant, ℓ1 ball) and norm-corrective MP (both variants).

    The MP bound uses the measured ``ρ``: the largest atomic norm over the
    optimum and all iterates.  Affine-invariant FW with the exact curvature
    constant is graded against its own envelope as well.
    """
    rep = ExperimentReport(
        "envelope", {"d_fw": d_fw, "T_fw": T_fw, "d": d, "n": n, "T_mp": T_mp, "deltas": list(deltas), "seed": seed}
    )
    rows = []
    S1 = atoms_mod.l1_vertices(d_fw)
    ls = LeastSquares(np.random.default_rng(seed).standard_normal(d_fw) * 2.0)
    for delta in deltas:
        variants = (0, 1, 2, 3) if delta == 1.0 else (0, 2, 3)
        for v in variants:
            tr = run(SolverSpec("fw", v, _lmo(delta, "fw"), T_fw, seed), ls, S1)
            b = geometry.rate_bound("thm1", L=ls.L, diam=S1.diameter, eps0=tr.subopt[0], delta=delta)
            _grade(f"fw-v{v}-delta{delta:g}", tr, b, rows, rep)
        cf = geometry.curvature_Cf(ls, S1).value
        tr = run(SolverSpec("affine-fw", 0, _lmo(delta, "fw"), T_fw, seed, Cf=cf), ls, S1)
        b = geometry.rate_bound("thm6", Cf=cf, eps0=tr.subopt[0], delta=delta)
        _grade(f"affine-fw-delta{delta:g}", tr, b, rows, rep)

    S, objs = mp_instances(d, n, seed)
    for oname, obj in objs.items():
        for delta in deltas:
            for v in (0, 1):
                tr = run(SolverSpec("gmp", v, _lmo(delta, "mp"), T_mp, seed), obj, S)
                b = geometry.rate_bound(
                    "thm2", L=obj.L, rho=tr.rho_posthoc, radius=S.radius, eps0=tr.subopt[0], delta=delta
                )
                _grade(f"gmp-v{v}-{oname}-delta{delta:g}", tr, b, rows, rep)
    rep.runs = rows
    total = sum(r["violations"] for r in rows)
    rep.aggregates = {"runs": len(rows), "violations": total}
    rep.verdicts = {"no_violations": total == 0}
    return rep


def run_linear_rate(
    d: int = 20, n: int = 40, T: int = 300, deltas=(1.0, 0.5), seed: int = 0, mdw_restarts: int = 200
) -> ExperimentReport:
    """Per-step linear rate of norm-corrective MP on strongly convex problems.

    The factor uses the multi-start mDW estimate, an upper bound on the true
    width, which makes the check stricter than the guarantee itself.  Per-step
    checks stop once ``ε_t`` drops under ``1e-13·max(1, ε_0)``.
    """
    S, objs = mp_instances(d, n, seed)
    est = geometry.mdw(S, mdw_restarts, seed)
    rep = ExperimentReport("linear-rate", {"d": d, "n": n, "T": T, "deltas": list(deltas), "seed": seed})
    rows = []
    for oname, obj in objs.items():
        for delta in deltas:
            b = geometry.rate_bound("thm3", L=obj.L, mu=obj.mu, mdw=est.value, radius=S.radius, delta=delta)
            for v in (0, 1):
                tr = run(SolverSpec("gmp", v, _lmo(delta, "mp"), T, seed), obj, S)
                _grade(f"gmp-v{v}-{oname}-delta{delta:g}", tr, b, rows, rep, 1e-13 * max(1.0, tr.subopt[0]))
                rows[-1]["factor"] = b.factor()
    rep.runs = rows
    total = sum(r["violations"] for r in rows)
    rep.aggregates = {"runs": len(rows), "violations": total, "mdw": est.to_dict()}
    rep.verdicts = {"no_violations": total == 0}
    return rep


# ------------------------------------------------------------------ coherence vs mDW


def _coherence_case(args):
    i, seed_seq, restarts = args
    rng = np.random.default_rng(seed_seq)
    d = int(rng.integers(2, 9))
    nh = int(rng.integers(2, 13))
    B = rng.standard_normal((nh, d))
    B /= np.linalg.norm(B, axis=1, keepdims=True)
    half = HalfDictionary(B)
    S = half.to_atom_set()
    est = geometry.mdw(S, restarts, int(rng.integers(0, 2**31)))
    mu = geometry.cumulative_coherence(half, nh - 1)
    rhs = 1 - nh * est.value**2
    return {
        "case": i,
        "d": d,
        "n": nh,
        "mdw": est.value,
        "mdw_method": est.method,
        "coherence": mu,
        "rhs": rhs,
        "holds": bool(mu >= rhs - 1e-12),
    }


def run_coherence_mdw(n_dicts: int = 50, seed: int = 0, restarts: int = 200, jobs: int = 1) -> ExperimentReport:
    """Check ``μ(B, n−1) ≥ 1 − n·mdw²`` on random symmetric unit-norm dictionaries (``n ≤ 12``, ``d ≤ 8``)."""
    seqs = np.random.SeedSequence(seed).spawn(n_dicts)
    rows = _map(_coherence_case, [(i, s, restarts) for i, s in enumerate(seqs)], jobs)
    rep = ExperimentReport("coherence-mdw", {"n_dicts": n_dicts, "seed": seed, "restarts": restarts})
    rep.runs = rows
    bad = sum(not r["holds"] for r in rows)
    rep.aggregates = {"violations": bad, "min_slack": float(min(r["coherence"] - r["rhs"] for r in rows))}
    rep.verdicts = {"no_violations": bad == 0}
    return rep


def run_experiment(name: str, params: dict | None = None, seed: int = 0, jobs: int = 1) -> ExperimentReport:
    """Dispatch by experiment name with keyword parameters."""
    p = dict(params or {})
    if name == "appendix-a":
        return run_appendix_a(p.pop("theta_grid", None), seed=seed, jobs=jobs, **p)
    if name == "corollary2":
        return run_corollary2(seed=seed, **p)
    if name == "fw-to-mp":
        return run_fw_to_mp(p.pop("alpha_grid", None), p.pop("instance", None), seed=seed)
    if name == "envelope":
        return run_envelope(seed=seed, **p)
    if name == "linear-rate":
        return run_linear_rate(seed=seed, **p)
    if name == "coherence-mdw":
        return run_coherence_mdw(seed=seed, jobs=jobs, **p)
    raise DomainError(f"unknown experiment {name!r}; known: {', '.join(EXPERIMENTS)}")
