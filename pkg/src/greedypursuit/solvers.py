"""Greedy solvers over atom sets: matching pursuit, Frank-Wolfe and their corrective variants.

Every ``*_step`` function is pure: it takes the current iterate (and active
set where the algorithm keeps one) and returns the next one together with a
:class:`StepRecord` describing the step that left ``x_t``.  :func:`run` strings
steps together into a :class:`Trace`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from . import geometry
from .atoms import AtomSet
from .errors import ConvergenceError, DegenerateAtomError, DomainError, SchemaError
from .lmo import EXACT, LmoConfig, lmo_approx_fw, lmo_approx_mp, lmo_exact
from .objectives import LeastSquares, QuadraticObjective, SmoothObjective
from .subproblems import (
    golden_section,
    least_squares_over_span,
    project_onto_convex_hull,
    project_simplex,
    simplex_qp,
    span_basis,
)

FW_FAMILY = ("fw", "ncfw", "affine-fw")
MP_FAMILY = ("mp", "omp", "gmp", "affine-gmp")
VARIANTS = {
    "mp": (0,),
    "omp": (0,),
    "fw": (0, 1, 2, 3),
    "ncfw": (0, 1),
    "gmp": (0, 1),
    "affine-fw": (0,),
    "affine-gmp": (1, 2),
}
MEMBERSHIP_TOL = 1e-8


# ------------------------------------------------------------------ state


@dataclass(frozen=True)
class ActiveSet:
    """Atoms picked so far, with the starting point as member 0 (index ``-1``).

    ``weights`` is kept by the Frank-Wolfe family: the iterate equals
    ``weights @ points`` with the weights on the simplex.
    """

    indices: tuple
    points: np.ndarray = field(repr=False)
    weights: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def start(cls, x0, weighted: bool = False) -> "ActiveSet":
        x0 = np.asarray(x0, dtype=float)
        return cls((-1,), x0[None, :].copy(), np.ones(1) if weighted else None)

    def __len__(self):
        return len(self.indices)

    def add(self, index: int, atom) -> "ActiveSet":
        pts = np.vstack([self.points, np.asarray(atom, dtype=float)[None, :]])
        w = None if self.weights is None else np.append(self.weights, 0.0)
        return ActiveSet(self.indices + (int(index),), pts, w)

    def with_weights(self, w) -> "ActiveSet":
        return ActiveSet(self.indices, self.points, np.asarray(w, dtype=float))

    def full_weights(self, n: int) -> np.ndarray:
        """Weights over ``[x0, atom_0, ..., atom_{n-1}]`` (slot 0 is the start)."""
        out = np.zeros(n + 1)
        if self.weights is None:
            raise DomainError("this active set carries no weights")
        np.add.at(out, np.asarray(self.indices) + 1, self.weights)
        return out


@dataclass
class StepRecord:
    """What happened at iteration ``t``: ``f_value`` etc. describe ``x_t``; the rest is the step out of it.

    ``width`` is ``W_A(−∇f(x_t))`` over the oracle's set and ``atom_norm`` is
    ``‖z_t‖``; both feed the per-step lower bound.  ``gamma`` is ``None`` for
    steps that solve a subproblem instead of taking a line step.
    """

    t: int
    f_value: float
    grad_norm: float
    gamma: float | None = None
    atom_index: int | None = None
    inner: float | None = None
    dual_gap: float | None = None
    subopt: float | None = None
    atomic_norm_bound: float | None = None
    width: float | None = None
    atom_norm: float | None = None
    certified_delta: float | None = None
    substituted: bool = False
    stationary: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _record(obj, x, g, t, res=None, oracle_set=None, **kw) -> StepRecord:
    gn = float(np.linalg.norm(g))
    rec = StepRecord(t=t, f_value=obj.value(x), grad_norm=gn, **kw)
    if res is not None:
        rec.atom_index = res.index
        rec.inner = res.inner
        rec.certified_delta = res.certified_delta
        rec.substituted = res.substituted
        rec.atom_norm = float(np.linalg.norm(res.atom))
    if oracle_set is not None and gn > 0:
        rec.width = float(np.max(oracle_set.vectors @ (-g / gn)))
    return rec


def _clip01(v: float) -> float:
    return min(1.0, max(0.0, v))


def _require_ls(obj) -> LeastSquares:
    if not isinstance(obj, LeastSquares):
        raise DomainError("matching pursuit needs a least-squares objective")
    return obj


# ------------------------------------------------------------------ MP family


def mp_step(obj: LeastSquares, x, atom_set: AtomSet, t: int = 0):
    """Matching pursuit: exact oracle over ``A ∪ −A``, exact line step along the atom."""
    obj = _require_ls(obj)
    x = np.asarray(x, dtype=float)
    sym = atom_set.symmetrized
    g = obj.grad(x)
    res = lmo_exact(sym, x - obj.target)
    nz = float(res.atom @ res.atom)
    if nz == 0:
        raise DegenerateAtomError(f"atom {res.index} has zero norm")
    gamma = float((obj.target - x) @ res.atom) / nz
    rec = _record(obj, x, g, t, res, sym, gamma=gamma, stationary=gamma == 0.0)
    return x + gamma * res.atom, rec


def omp_step(obj: LeastSquares, x, active: ActiveSet, atom_set: AtomSet, t: int = 0):
    """Orthogonal matching pursuit: re-fit ``y`` over the span of every atom picked so far."""
    obj = _require_ls(obj)
    x = np.asarray(x, dtype=float)
    sym = atom_set.symmetrized
    g = obj.grad(x)
    res = lmo_exact(sym, x - obj.target)
    if not np.any(res.atom):
        raise DegenerateAtomError(f"atom {res.index} has zero norm")
    active = active.add(res.index, res.atom)
    x_new = least_squares_over_span(active.points, obj.target)
    return x_new, active, _record(obj, x, g, t, res, sym)


def gmp_step(obj: SmoothObjective, x, active: ActiveSet, atom_set: AtomSet, variant: int = 0, cfg: LmoConfig = EXACT, t: int = 0):
    """Norm-corrective generalized matching pursuit.

    Both variants minimize the quadratic upper model around ``x_t``, i.e. fit
    ``b = x_t − ∇f(x_t)/L``: variant 0 along the new atom only, variant 1
    over the span of the whole active set.
    """
    if variant not in (0, 1):
        raise DomainError(f"gmp has variants 0 and 1, got {variant}")
    x = np.asarray(x, dtype=float)
    g = obj.grad(x)
    res = lmo_approx_mp(atom_set, g, cfg, t)
    nz = float(res.atom @ res.atom)
    if nz == 0:
        raise DegenerateAtomError(f"atom {res.index} has zero norm")
    b = x - g / obj.L
    active = active.add(res.index, res.atom)
    if variant == 0:
        gamma = -float((x - b) @ res.atom) / nz
        rec = _record(obj, x, g, t, res, atom_set, gamma=gamma, stationary=gamma == 0.0)
        return x + gamma * res.atom, active, rec
    x_new = least_squares_over_span(active.points, b)
    return x_new, active, _record(obj, x, g, t, res, atom_set)


def minimize_over_span(obj: SmoothObjective, members, x_start=None, tol: float = 1e-10, max_iter: int = 100_000):
    """``argmin f`` over ``lin(members)``.

    Quadratics are solved through the normal equations in an orthonormal
    basis of the span.  Other objectives use accelerated gradient descent in
    basis coordinates with step ``1/L`` until the projected gradient norm is
    at most ``tol``.
    """
    U = span_basis(members)
    if U.shape[1] == 0:
        return np.zeros(np.asarray(members).shape[1])
    if isinstance(obj, QuadraticObjective):
        H = U.T @ obj.Q @ U
        c = np.linalg.lstsq(H, U.T @ obj.b, rcond=1e-12)[0]
        return U @ c
    c = np.zeros(U.shape[1]) if x_start is None else U.T @ np.asarray(x_start, dtype=float)
    y, theta = c.copy(), 1.0
    for _ in range(max_iter):
        gc = U.T @ obj.grad(U @ c)
        if np.linalg.norm(gc) <= tol:
            return U @ c
        c_next = y - (U.T @ obj.grad(U @ y)) / obj.L
        if obj.value(U @ c_next) > obj.value(U @ c):
            theta, c_next = 1.0, c - gc / obj.L
        theta_next = 0.5 * (1 + math.sqrt(1 + 4 * theta * theta))
        y = c_next + (theta - 1) / theta_next * (c_next - c)
        c, theta = c_next, theta_next
    raise ConvergenceError("span minimization hit its iteration cap", residual=float(np.linalg.norm(gc)))


def affine_gmp_step(
    obj: SmoothObjective,
    x,
    active: ActiveSet,
    atom_set: AtomSet,
    rho: float,
    CfMP: float,
    variant: int = 1,
    cfg: LmoConfig = EXACT,
    t: int = 0,
):
    """Affine-invariant matching pursuit.

    Variant 1 steps ``x_t + (ρ²⟨−∇f, z_t⟩ / C^MP)·z_t``; variant 2 minimizes
    ``f`` itself over the span of the active set.
    """
    if not CfMP > 0:
        raise DomainError("the MP curvature bound must be positive")
    if not rho > 0:
        raise DomainError("rho must be positive")
    if variant not in (1, 2):
        raise DomainError(f"affine gmp has variants 1 and 2, got {variant}")
    x = np.asarray(x, dtype=float)
    g = obj.grad(x)
    res = lmo_approx_mp(atom_set, g, cfg, t)
    active = active.add(res.index, res.atom)
    if variant == 1:
        gamma = rho**2 * float(-g @ res.atom) / CfMP
        rec = _record(obj, x, g, t, res, atom_set, gamma=gamma, stationary=gamma == 0.0)
        return x + gamma * res.atom, active, rec
    x_new = minimize_over_span(obj, active.points, x)
    return x_new, active, _record(obj, x, g, t, res, atom_set)


# ------------------------------------------------------------------ FW family


def fw_step(obj: SmoothObjective, x, atom_set: AtomSet, variant: int = 0, t: int = 0, cfg: LmoConfig = EXACT):
    """Frank-Wolfe step toward the oracle atom.

    Step sizes: v0 ``2/(t+2)``; v1 golden-section line search on ``[0, 1]``;
    v2 ``gap/(L·diam²)``; v3 ``gap/(L‖z−x‖²)``; v2 and v3 clipped to ``[0, 1]``.
    """
    if variant not in (0, 1, 2, 3):
        raise DomainError(f"fw has variants 0..3, got {variant}")
    x = np.asarray(x, dtype=float)
    g = obj.grad(x)
    res = lmo_approx_fw(atom_set, g, x, cfg, t)
    dirn = res.atom - x
    gap = float(-g @ dirn)
    stationary = False
    if variant == 0:
        gamma = 2.0 / (t + 2)
    elif variant == 1:
        gamma = golden_section(lambda s: obj.value(x + s * dirn), 0.0, 1.0, 1e-12)
    elif variant == 2:
        gamma = _clip01(gap / (obj.L * atom_set.diameter**2))
    else:
        den = obj.L * float(dirn @ dirn)
        if den == 0:
            gamma, stationary = 0.0, True
        else:
            gamma = _clip01(gap / den)
    rec = _record(obj, x, g, t, res, atom_set, gamma=gamma, dual_gap=gap, stationary=stationary or gamma == 0.0)
    return x + gamma * dirn, rec


def affine_fw_step(obj: SmoothObjective, x, atom_set: AtomSet, Cf: float, cfg: LmoConfig = EXACT, t: int = 0):
    """Affine-invariant Frank-Wolfe: ``γ = clip(gap / C_f)``."""
    if not Cf > 0:
        raise DomainError("the curvature bound Cf must be positive")
    x = np.asarray(x, dtype=float)
    g = obj.grad(x)
    res = lmo_approx_fw(atom_set, g, x, cfg, t)
    dirn = res.atom - x
    gap = float(-g @ dirn)
    gamma = _clip01(gap / Cf)
    rec = _record(obj, x, g, t, res, atom_set, gamma=gamma, dual_gap=gap, stationary=gamma == 0.0)
    return x + gamma * dirn, rec


def ncfw_step(obj: SmoothObjective, x, active: ActiveSet, atom_set: AtomSet, variant: int = 0, cfg: LmoConfig = EXACT, t: int = 0):
    """Norm-corrective Frank-Wolfe: move toward ``b = x_t − ∇f(x_t)/L``.

    Variant 0 takes the closest point to ``b`` on the segment ``[x_t, z_t]``;
    variant 1 projects ``b`` onto the hull of the whole active set.
    """
    if variant not in (0, 1):
        raise DomainError(f"ncfw has variants 0 and 1, got {variant}")
    x = np.asarray(x, dtype=float)
    if active.weights is None:
        raise DomainError("norm-corrective FW needs a weighted active set")
    g = obj.grad(x)
    res = lmo_approx_fw(atom_set, g, x, cfg, t)
    dirn = res.atom - x
    gap = float(-g @ dirn)
    b = x - g / obj.L
    active = active.add(res.index, res.atom)
    if variant == 0:
        den = float(dirn @ dirn)
        gamma = 0.0 if den == 0 else _clip01(float((b - x) @ dirn) / den)
        w = (1.0 - gamma) * active.weights
        w[-1] += gamma
        rec = _record(obj, x, g, t, res, atom_set, gamma=gamma, dual_gap=gap, stationary=gamma == 0.0)
        return x + gamma * dirn, active.with_weights(w), rec
    point, w = project_onto_convex_hull(active.points, b, active.weights)
    rec = _record(obj, x, g, t, res, atom_set, dual_gap=gap)
    return point, active.with_weights(w), rec


def atom_correction(obj: SmoothObjective, x, active: ActiveSet, atom_set: AtomSet | None = None, flavor: str = "fw"):
    """Re-solve the corrective subproblem over the current active set without adding atoms.

    ``fw`` projects ``b = x − ∇f(x)/L`` onto ``conv(S)``; ``mp`` projects it
    onto ``lin(S)``.  The corrected point is kept only if ``f`` does not go up.
    """
    if len(active) == 0:
        raise DomainError("active set is empty")
    x = np.asarray(x, dtype=float)
    b = x - obj.grad(x) / obj.L
    if flavor == "fw":
        point, w = project_onto_convex_hull(active.points, b, active.weights)
        new_active = active.with_weights(w)
    elif flavor == "mp":
        point, new_active = least_squares_over_span(active.points, b), active
    else:
        raise DomainError(f"unknown correction flavor {flavor!r}")
    if obj.value(point) <= obj.value(x):
        return point, new_active
    return x, active


# ------------------------------------------------------------------ reference optimum


def reference_minimizer(obj: SmoothObjective, atom_set: AtomSet, family: str):
    """Minimizer over ``lin(A)`` (MP family) or ``conv(A)`` (FW family).

    Returns ``(x_star, exact)``.  Quadratics are solved to machine precision
    (normal equations, or a simplex QP polished on its support); other
    objectives go through an iterative solver and are flagged inexact.
    """
    V = atom_set.vectors
    if family == "mp":
        U = span_basis(V)
        if isinstance(obj, QuadraticObjective):
            return minimize_over_span(obj, V), True
        res = minimize(
            lambda c: obj.value(U @ c),
            np.zeros(U.shape[1]),
            jac=lambda c: U.T @ obj.grad(U @ c),
            method="BFGS",
            options={"gtol": 1e-12, "maxiter": 10_000},
        )
        return U @ res.x, False
    if isinstance(obj, QuadraticObjective):
        w = simplex_qp(V @ obj.Q @ V.T, V @ obj.b, tol=1e-12, max_iter=200_000)
        return w @ V, True
    lam = float(np.linalg.eigvalsh(V @ V.T)[-1])
    step = 1.0 / (obj.L * lam)
    w = np.full(V.shape[0], 1.0 / V.shape[0])
    y, theta = w.copy(), 1.0
    for _ in range(200_000):
        gw = V @ obj.grad(w @ V)
        gm = np.linalg.norm(w - project_simplex(w - step * gw)) / step
        if gm <= 1e-12:
            break
        w_next = project_simplex(y - step * (V @ obj.grad(y @ V)))
        if obj.value(w_next @ V) > obj.value(w @ V):
            theta, w_next = 1.0, project_simplex(w - step * gw)
        theta_next = 0.5 * (1 + math.sqrt(1 + 4 * theta * theta))
        y = w_next + (theta - 1) / theta_next * (w_next - w)
        w, theta = w_next, theta_next
    return w @ V, False


def suboptimality(obj: SmoothObjective, x, x_star, f_star: float) -> float:
    """``f(x) − f*``; for quadratics evaluated around ``x*`` to avoid cancellation."""
    x = np.asarray(x, dtype=float)
    if isinstance(obj, QuadraticObjective) and x_star is not None:
        dx = x - x_star
        return float(obj.grad(x_star) @ dx + 0.5 * dx @ obj.Q @ dx)
    return obj.value(x) - f_star


# ------------------------------------------------------------------ specs and traces


@dataclass(frozen=True)
class SolverSpec:
    algorithm: str
    variant: int = 0
    lmo: LmoConfig = EXACT
    T: int = 100
    seed: int = 0
    rho: float | None = None
    Cf: float | None = None
    CfMP: float | None = None
    correction: bool = False

    def __post_init__(self):
        if self.algorithm not in VARIANTS:
            raise DomainError(f"unknown algorithm {self.algorithm!r}; known: {sorted(VARIANTS)}")
        if self.variant not in VARIANTS[self.algorithm]:
            raise DomainError(f"{self.algorithm} has variants {VARIANTS[self.algorithm]}, got {self.variant}")
        if self.T < 0:
            raise DomainError("T must be nonnegative")
        if self.algorithm in ("mp", "omp") and self.lmo.mode != "exact":
            raise DomainError("mp and omp use the exact oracle")
        if self.algorithm in FW_FAMILY and self.lmo.mode == "approx_mp":
            raise DomainError("Frank-Wolfe methods take an approx_fw oracle")
        if self.algorithm in ("gmp", "affine-gmp") and self.lmo.mode == "approx_fw":
            raise DomainError("matching-pursuit methods take an approx_mp oracle")
        if self.algorithm == "affine-gmp" and self.rho is None:
            raise DomainError("affine-gmp needs an a-priori rho")

    @property
    def family(self) -> str:
        return "fw" if self.algorithm in FW_FAMILY else "mp"

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "variant": self.variant,
            "lmo": self.lmo.to_dict(),
            "T": self.T,
            "seed": self.seed,
            "rho": self.rho,
            "constants": {"Cf": self.Cf, "CfMP": self.CfMP},
            "correction": self.correction,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SolverSpec":
        if not isinstance(doc, dict) or "algorithm" not in doc:
            raise SchemaError("solver spec needs an 'algorithm' field")
        consts = doc.get("constants") or {}
        try:
            return cls(
                algorithm=doc["algorithm"],
                variant=int(doc.get("variant", VARIANTS.get(doc["algorithm"], (0,))[0])),
                lmo=LmoConfig.from_dict(doc.get("lmo")),
                T=int(doc.get("T", 100)),
                seed=int(doc.get("seed", 0)),
                rho=None if doc.get("rho") is None else float(doc["rho"]),
                Cf=None if consts.get("Cf") is None else float(consts["Cf"]),
                CfMP=None if consts.get("CfMP") is None else float(consts["CfMP"]),
                correction=bool(doc.get("correction", False)),
            )
        except DomainError as exc:
            raise SchemaError(str(exc)) from None


@dataclass
class Trace:
    config: dict
    x0: np.ndarray
    records: list
    iterates: np.ndarray
    weights: np.ndarray | None = None
    x_star: np.ndarray | None = None
    f_star: float | None = None
    subopt_exact: bool = False
    rho: float | None = None
    rho_posthoc: float | None = None
    rho_violation: bool = False

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def T(self) -> int:
        return len(self.records) - 1

    def column(self, name: str) -> np.ndarray:
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name) for r in self.records], dtype=float)

    @property
    def subopt(self) -> np.ndarray:
        return self.column("subopt")

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else np.asarray(a).tolist()

        return {
            "config": self.config,
            "x0": arr(self.x0),
            "records": [r.to_dict() for r in self.records],
            "iterates": arr(self.iterates),
            "weights": arr(self.weights),
            "final": arr(self.final),
            "x_star": arr(self.x_star),
            "f_star": self.f_star,
            "subopt_exact": self.subopt_exact,
            "rho": self.rho,
            "rho_posthoc": self.rho_posthoc,
            "rho_violation": self.rho_violation,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, allow_nan=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "f", "subopt", "gamma", "atom", "dual_gap"])
        for r in self.records:
            w.writerow([r.t, repr(r.f_value), _cell(r.subopt), _cell(r.gamma), _cell(r.atom_index), _cell(r.dual_gap)])
        return buf.getvalue()

    @classmethod
    def from_dict(cls, doc: dict) -> "Trace":
        try:
            recs = [StepRecord(**r) for r in doc["records"]]
            w = doc.get("weights")
            xs = doc.get("x_star")
            return cls(
                config=doc.get("config", {}),
                x0=np.asarray(doc["x0"], dtype=float),
                records=recs,
                iterates=np.asarray(doc["iterates"], dtype=float),
                weights=None if w is None else np.asarray(w, dtype=float),
                x_star=None if xs is None else np.asarray(xs, dtype=float),
                f_star=doc.get("f_star"),
                subopt_exact=bool(doc.get("subopt_exact", False)),
                rho=doc.get("rho"),
                rho_posthoc=doc.get("rho_posthoc"),
                rho_violation=bool(doc.get("rho_violation", False)),
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"not a trace document: {exc}") from None


def _cell(v):
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def _in_hull(V, x) -> bool:
    p, _ = project_onto_convex_hull(V, x)
    return float(np.linalg.norm(p - x)) <= MEMBERSHIP_TOL


def _in_span(V, x) -> bool:
    return float(np.linalg.norm(least_squares_over_span(V, x) - x)) <= MEMBERSHIP_TOL


def run(
    spec,
    obj: SmoothObjective,
    atom_set: AtomSet,
    x0=None,
    T: int | None = None,
    seed: int | None = None,
    x_star=None,
    f_star: float | None = None,
    posthoc: bool = True,
) -> Trace:
    """Run ``T`` steps of the algorithm named in ``spec`` and record everything.

    ``x0`` defaults to the origin (or the first atom if the origin is not in
    the hull, for the FW family).  The reference optimum comes from ``x_star``
    if given, else from :func:`reference_minimizer`.  With ``posthoc`` on, the
    atomic norms of ``x*`` and every iterate are computed and their running
    maximum stored as ``atomic_norm_bound``; their overall maximum is
    ``rho_posthoc``.
    """
    if isinstance(spec, dict):
        spec = SolverSpec.from_dict(spec)
    if T is not None or seed is not None:
        spec = replace(spec, T=spec.T if T is None else int(T), seed=spec.seed if seed is None else int(seed))
    if spec.lmo.impl == "subsample" and seed is not None:
        spec = replace(spec, lmo=replace(spec.lmo, seed=int(seed)))
    V = atom_set.vectors
    fam = spec.family

    if x0 is None:
        x0 = np.zeros(atom_set.dim)
        if fam == "fw" and not _in_hull(V, x0):
            x0 = V[0].copy()
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (atom_set.dim,):
        raise DomainError(f"x0 has shape {x0.shape}, expected ({atom_set.dim},)")
    if fam == "fw" and not _in_hull(V, x0):
        raise DomainError("x0 is not in the convex hull of the atoms")
    if fam == "mp" and not _in_span(V, x0):
        raise DomainError("x0 is not in the span of the atoms")

    if x_star is None:
        x_star, exact = reference_minimizer(obj, atom_set, fam)
    else:
        x_star, exact = np.asarray(x_star, dtype=float), True
    if f_star is None:
        f_star = obj.value(x_star)

    Cf, CfMP = spec.Cf, spec.CfMP
    if spec.algorithm == "affine-fw" and Cf is None:
        est = geometry.curvature_Cf(obj, atom_set)
        Cf = est.value if est.exact else est.ceiling
    if spec.algorithm == "affine-gmp" and CfMP is None:
        est = geometry.curvature_CfMP(obj, atom_set, spec.rho)
        CfMP = est.value if est.exact else est.ceiling

    active = ActiveSet.start(x0, weighted=fam == "fw")
    x = x0.copy()
    xs = [x.copy()]
    ws = [active.full_weights(atom_set.n)] if fam == "fw" else None
    recs = []
    cfg = spec.lmo
    for t in range(spec.T):
        a, v = spec.algorithm, spec.variant
        if a == "mp":
            x_new, rec = mp_step(obj, x, atom_set, t)
            active = active.add(rec.atom_index, atom_set.symmetrized.vectors[rec.atom_index])
        elif a == "omp":
            x_new, active, rec = omp_step(obj, x, active, atom_set, t)
        elif a == "gmp":
            x_new, active, rec = gmp_step(obj, x, active, atom_set, v, cfg, t)
        elif a == "affine-gmp":
            x_new, active, rec = affine_gmp_step(obj, x, active, atom_set, spec.rho, CfMP, v, cfg, t)
        elif a == "ncfw":
            x_new, active, rec = ncfw_step(obj, x, active, atom_set, v, cfg, t)
        else:
            if a == "fw":
                x_new, rec = fw_step(obj, x, atom_set, v, t, cfg)
            else:
                x_new, rec = affine_fw_step(obj, x, atom_set, Cf, cfg, t)
            active = active.add(rec.atom_index, V[rec.atom_index])
            w = (1.0 - rec.gamma) * active.weights
            w[-1] += rec.gamma
            active = active.with_weights(w)
        if spec.correction and a in ("ncfw", "gmp"):
            x_new, active = atom_correction(obj, x_new, active, atom_set, "fw" if fam == "fw" else "mp")
        if not np.all(np.isfinite(x_new)):
            raise ConvergenceError(f"non-finite iterate at step {t}")
        rec.subopt = suboptimality(obj, x, x_star, f_star)
        recs.append(rec)
        x = x_new
        xs.append(x.copy())
        if ws is not None:
            ws.append(active.full_weights(atom_set.n))

    g = obj.grad(x)
    last = _record(obj, x, g, spec.T, None, atom_set.symmetrized if spec.algorithm in ("mp", "omp") else atom_set)
    last.subopt = suboptimality(obj, x, x_star, f_star)
    if fam == "fw":
        res = lmo_exact(atom_set, g)
        last.dual_gap = float(-g @ (res.atom - x))
    recs.append(last)

    trace = Trace(
        config=spec.to_dict(),
        x0=x0,
        records=recs,
        iterates=np.array(xs),
        weights=None if ws is None else np.array(ws),
        x_star=x_star,
        f_star=float(f_star),
        subopt_exact=exact,
        rho=spec.rho,
    )
    if posthoc:
        attach_atomic_norms(trace, atom_set)
    return trace


def attach_atomic_norms(trace: Trace, atom_set: AtomSet) -> Trace:
    """Fill ``atomic_norm_bound`` (running max) and ``rho_posthoc`` on ``trace``."""
    pts = np.vstack([trace.x_star[None, :], trace.iterates]) if trace.x_star is not None else trace.iterates
    norms = geometry.atomic_norms(atom_set, pts)
    star = norms[0] if trace.x_star is not None else 0.0
    running = np.maximum.accumulate(norms[1:] if trace.x_star is not None else norms)
    for r, v in zip(trace.records, running):
        r.atomic_norm_bound = float(max(v, star))
    trace.rho_posthoc = float(np.max(norms))
    if trace.rho is not None:
        trace.rho_violation = bool(trace.rho_posthoc > trace.rho * (1 + 1e-9))
    return trace
