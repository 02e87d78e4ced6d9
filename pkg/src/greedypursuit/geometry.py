"""Geometric complexity constants of atom sets and the convergence envelopes built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .atoms import AtomSet, HalfDictionary
from .errors import ConvergenceError, DomainError, UnsupportedError
from .objectives import QuadraticObjective, SmoothObjective, linearization_gap
from .subproblems import GOLDEN, least_squares_over_span, project_onto_convex_hull, span_basis


def directional_width(atom_set: AtomSet, d) -> float:
    """``max_z ⟨d/‖d‖, z⟩``; negative values are possible for non-symmetric sets."""
    d = np.asarray(d, dtype=float)
    nd = float(np.linalg.norm(d))
    if nd == 0:
        raise DomainError("direction must be nonzero")
    return float(np.max(atom_set.vectors @ (d / nd)))


# ------------------------------------------------------------------ mDW


@dataclass
class MdwEstimate:
    """Minimal directional width with the metadata of how it was obtained.

    ``value`` is exact for ``method`` ``exact-1d`` / ``exact-2d`` and an upper
    bound otherwise.  ``bracket`` is ``(lower, upper)``; the lower end is the
    certified ``σ_min/√n`` bound for symmetric sets and ``None`` otherwise.
    """

    value: float
    method: str
    direction: np.ndarray = field(repr=False)
    span_dim: int = 0
    restarts: int = 0
    bracket: tuple = (None, None)
    dispersion: dict = field(default_factory=dict)

    def __float__(self):
        return self.value

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "span_dim": self.span_dim,
            "restarts": self.restarts,
            "bracket": list(self.bracket),
            "dispersion": self.dispersion,
            "direction": self.direction.tolist(),
        }


def _widths(C: np.ndarray, D: np.ndarray) -> np.ndarray:
    return np.max(D @ C.T, axis=-1)


def _polish(C: np.ndarray, d: np.ndarray):
    """Try polar-vertex directions built from the atoms that are nearly active at ``d``.

    Every proposal is scored by its true width, so the result can only
    improve on ``d``.
    """
    best_w, best_d = float(np.max(C @ d)), d
    s = C @ d
    scale = abs(best_w) + 1e-300
    for rel in (1e-1, 3e-2, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10):
        act = s >= best_w - rel * scale
        v = np.linalg.lstsq(C[act], np.ones(int(act.sum())), rcond=None)[0]
        nv = np.linalg.norm(v)
        if nv == 0 or not np.isfinite(nv):
            continue
        u = v / nv
        w = float(np.max(C @ u))
        if w < best_w:
            best_w, best_d = w, u
    return best_w, best_d


def _vertex_ascent(C: np.ndarray, d: np.ndarray, max_rounds: int = 20):
    """Climb polar vertices: maximize ``⟨v, w⟩`` over ``{w: Cw ≤ 1}`` repeatedly.

    A larger ``‖w‖`` at a polar vertex is a smaller width at ``w/‖w‖``.
    Only meaningful when the width at ``d`` is positive.
    """
    w0 = float(np.max(C @ d))
    if w0 <= 0:
        return w0, d
    v = d / w0
    best_w, best_d = w0, d
    k = C.shape[1]
    for _ in range(max_rounds):
        res = linprog(-v, A_ub=C, b_ub=np.ones(C.shape[0]), bounds=[(None, None)] * k, method="highs")
        if res.status != 0:
            break
        nw = np.linalg.norm(res.x)
        if nw <= np.linalg.norm(v) * (1 + 1e-13):
            break
        v = res.x
        u = v / nw
        width = float(np.max(C @ u))
        if width < best_w:
            best_w, best_d = width, u
    return best_w, best_d


def _sphere_descent(C: np.ndarray, D: np.ndarray, iters: int = 400) -> np.ndarray:
    """Smoothed max minimization on the unit sphere, all starts at once."""
    for it in range(iters):
        beta = 4.0 * 1.03**it
        S = D @ C.T
        S = S - S.max(axis=1, keepdims=True)
        P = np.exp(beta * S)
        P /= P.sum(axis=1, keepdims=True)
        G = P @ C
        G -= np.sum(G * D, axis=1, keepdims=True) * D
        eta = 0.3 / (1.0 + 0.02 * it)
        D = D - eta * G
        D /= np.linalg.norm(D, axis=1, keepdims=True)
    return D


def mdw(atom_set: AtomSet, restarts: int = 200, seed: int = 0) -> MdwEstimate:
    """Minimal intrinsic directional width ``min_{d ∈ lin(A), ‖d‖=1} W_A(d)``.

    Span dimension 1 and 2 are solved exactly (2D: 10⁴-point angular sweep
    refined by golden section).  Higher dimensions use smoothed projected
    descent on the sphere from ``restarts`` seeded random starts plus every
    atom direction, followed by polar-vertex polishing; the answer is then an
    upper bound on the true minimum.
    """
    V = atom_set.vectors
    if not np.any(V):
        raise DomainError("all atoms are zero; the width is undefined")
    U = span_basis(V)
    k = U.shape[1]
    C = V @ U

    lower = None
    if atom_set.symmetric:
        sig = np.linalg.svd(C, compute_uv=False)
        lower = float(sig[-1] / math.sqrt(C.shape[0])) if sig.size >= k else 0.0

    if k == 1:
        cand = np.array([[1.0], [-1.0]])
        w = _widths(C, cand)
        i = int(np.argmin(w))
        return MdwEstimate(float(w[i]), "exact-1d", U @ cand[i], 1, 0, (lower, float(w[i])))

    if k == 2:
        grid = np.linspace(0.0, 2 * np.pi, 10_000, endpoint=False)
        D = np.column_stack([np.cos(grid), np.sin(grid)])
        w = _widths(C, D)
        i = int(np.argmin(w))
        h = 2 * np.pi / 10_000

        def width_at(phi):
            return float(np.max(C @ np.array([math.cos(phi), math.sin(phi)])))

        a, b = grid[i] - h, grid[i] + h
        c, e = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
        fc, fe = width_at(c), width_at(e)
        while b - a > 1e-13:
            if fc <= fe:
                b, e, fe = e, c, fc
                c = b - GOLDEN * (b - a)
                fc = width_at(c)
            else:
                a, c, fc = c, e, fe
                e = a + GOLDEN * (b - a)
                fe = width_at(e)
        phi = 0.5 * (a + b)
        best_d = np.array([math.cos(phi), math.sin(phi)])
        best_w = width_at(phi)
        pw, pd = _polish(C, best_d)
        if pw < best_w:
            best_w, best_d = pw, pd
        return MdwEstimate(best_w, "exact-2d", U @ best_d, 2, 0, (lower, best_w))

    rng = np.random.default_rng(seed)
    starts = rng.standard_normal((restarts, k))
    atom_dirs = C[np.linalg.norm(C, axis=1) > 0]
    starts = np.vstack([starts, atom_dirs])
    starts /= np.linalg.norm(starts, axis=1, keepdims=True)
    D = _sphere_descent(C, starts)

    finals = np.empty(D.shape[0])
    dirs = np.empty_like(D)
    for j, d in enumerate(D):
        finals[j], dirs[j] = _polish(C, d)
    order = np.argsort(finals)
    best_w, best_d = float(finals[order[0]]), dirs[order[0]]
    for j in order[:3]:
        aw, ad = _vertex_ascent(C, dirs[j])
        aw, ad = _polish(C, ad)
        if aw < best_w:
            best_w, best_d = aw, ad
    disp = {
        "best": best_w,
        "median": float(np.median(finals)),
        "worst": float(np.max(finals)),
        "hits": int(np.sum(finals <= best_w + 1e-9)),
        "starts": int(D.shape[0]),
    }
    return MdwEstimate(best_w, "multistart", U @ best_d, k, restarts, (lower, best_w), disp)


def effective_inradius(atom_set: AtomSet, restarts: int = 200, seed: int = 0) -> float:
    """Radius of the largest origin-centered ball inside ``conv(A)`` within ``lin(A)``.

    Only symmetric sets are supported, where the answer is the mDW.
    """
    if not atom_set.symmetric:
        raise UnsupportedError("unsupported: non-symmetric inradius")
    return mdw(atom_set, restarts, seed).value


# ------------------------------------------------------------------ coherence


def cumulative_coherence(half, m: int) -> float:
    """``μ(B, m)``: the largest total ``|⟨s_i, s_j⟩|`` between one atom and ``m`` others.

    For a fixed ``s_i`` the worst index set is simply its ``m`` largest
    off-diagonal Gram entries, so the maximum is found without enumeration.
    """
    B = half.atoms if isinstance(half, HalfDictionary) else np.atleast_2d(np.asarray(half, dtype=float))
    n = B.shape[0]
    if np.any(np.abs(np.linalg.norm(B, axis=1) - 1.0) > 1e-10):
        raise DomainError("cumulative coherence needs unit-norm atoms")
    if not 1 <= m < n:
        raise DomainError(f"m must satisfy 1 <= m < n = {n}, got {m}")
    G = np.abs(B @ B.T)
    np.fill_diagonal(G, -np.inf)
    top = -np.sort(-G, axis=1)[:, :m]
    return float(np.max(np.sum(top, axis=1)))


# ------------------------------------------------------------------ curvature


@dataclass
class Estimate:
    """A constant together with how trustworthy it is."""

    value: float
    exact: bool
    samples: int = 0
    ceiling: float | None = None
    floor: float | None = None
    extra: dict = field(default_factory=dict)

    def __float__(self):
        return self.value

    def to_dict(self) -> dict:
        out = {"value": self.value, "exact": self.exact, "samples": self.samples}
        if self.ceiling is not None:
            out["ceiling"] = self.ceiling
        if self.floor is not None:
            out["floor"] = self.floor
        out.update(self.extra)
        return out


def _dirichlet_points(V: np.ndarray, count: int, rng) -> np.ndarray:
    return rng.dirichlet(np.ones(V.shape[0]), size=count) @ V


GAMMA_GRID = 2.0 ** -np.arange(0, 11)


def curvature_Cf(obj: SmoothObjective, atom_set: AtomSet, samples: int = 2000, seed: int = 0) -> Estimate:
    """Frank-Wolfe curvature constant over ``conv(A)``.

    Exact for quadratics (the largest ``(s−v)ᵀQ(s−v)`` over atom pairs);
    otherwise the largest sampled value of ``(2/γ²)·D(x+γ(s−x), x)``.
    The ceiling ``L·diam²`` is always attached.
    """
    V = atom_set.vectors
    ceiling = obj.L * atom_set.diameter**2
    if isinstance(obj, QuadraticObjective):
        P = V @ obj.Q @ V.T
        q = np.diag(P)
        return Estimate(float(max(np.max(q[:, None] + q[None, :] - 2 * P), 0.0)), True, 0, ceiling)
    rng = np.random.default_rng(seed)
    X = _dirichlet_points(V, samples, rng)
    S = V[rng.integers(0, V.shape[0], size=samples)]
    best = 0.0
    for x, s in zip(X, S):
        for g in GAMMA_GRID:
            best = max(best, 2.0 / g**2 * linearization_gap(obj, x, x + g * (s - x)))
    return Estimate(best, False, samples * GAMMA_GRID.size, ceiling)


def curvature_CfMP(obj: SmoothObjective, atom_set: AtomSet, rho: float = 1.0, samples: int = 2000, seed: int = 0) -> Estimate:
    """Matching-pursuit curvature constant over ``ρ·conv(A)`` (rays ``x + γs``, ``s ∈ ρA``).

    Exact for quadratics as ``ρ²·max_s sᵀQs``; sampled otherwise.  The ceiling
    is ``L·ρ²·radius²``.
    """
    if not rho > 0:
        raise DomainError("rho must be positive")
    V = atom_set.vectors
    ceiling = obj.L * rho**2 * atom_set.radius**2
    if isinstance(obj, QuadraticObjective):
        q = np.einsum("ij,jk,ik->i", V, obj.Q, V)
        return Estimate(float(rho**2 * max(np.max(q), 0.0)), True, 0, ceiling)
    rng = np.random.default_rng(seed)
    X = rho * _dirichlet_points(V, samples, rng)
    S = rho * V[rng.integers(0, V.shape[0], size=samples)]
    best = 0.0
    for x, s in zip(X, S):
        for g in GAMMA_GRID:
            best = max(best, 2.0 / g**2 * linearization_gap(obj, x, x + g * s))
    return Estimate(best, False, samples * GAMMA_GRID.size, ceiling)


def strong_convexity_muFMP(
    obj: SmoothObjective,
    atom_set: AtomSet,
    rho: float = 1.0,
    samples: int = 10_000,
    seed: int = 0,
    mdw_value: float | None = None,
) -> Estimate:
    """Sampled affine-invariant strong convexity over ``ρ·conv(A)``.

    The sample minimum over pairs ``(x, x*)`` with ``⟨∇f(x), x*−x⟩ < 0`` is an
    upper estimate of the infimum.  Two guaranteed lower bounds ride along:
    ``floor`` = ``μ·ρ²·mdw²`` (the bound for the scaled set) and
    ``extra["floor_unscaled"]`` = ``μ·mdw²``.
    """
    if obj.mu is None or obj.mu <= 0:
        raise DomainError("the objective must declare mu > 0")
    if not rho > 0:
        raise DomainError("rho must be positive")
    V = rho * atom_set.vectors
    rng = np.random.default_rng(seed)
    X = _dirichlet_points(V, samples, rng)
    Xs = _dirichlet_points(V, samples, rng)
    best, used = np.inf, 0
    for x, xs in zip(X, Xs):
        g = obj.grad(x)
        num = float(-g @ (xs - x))
        if num <= 0:
            continue
        den = float(-np.min(V @ g))
        if den <= 0:
            continue
        gam = num / den
        best = min(best, 2.0 / gam**2 * linearization_gap(obj, x, xs))
        used += 1
    if used == 0:
        raise DomainError("no admissible sample pairs")
    w = mdw_value if mdw_value is not None else mdw(atom_set, seed=seed).value
    return Estimate(
        float(best), False, used, None, obj.mu * rho**2 * w**2, {"floor_unscaled": obj.mu * w**2}
    )


# ------------------------------------------------------------------ atomic norm


def _span_ok(V: np.ndarray, x: np.ndarray, tol: float = 1e-8, basis=None) -> bool:
    p = least_squares_over_span(V, x) if basis is None else basis @ (basis.T @ x)
    return float(np.linalg.norm(p - x)) <= tol * max(1.0, float(np.linalg.norm(x)))


def atomic_norm(atom_set: AtomSet, x) -> float:
    """Gauge of ``conv(A)``: the least ``c ≥ 0`` with ``x ∈ c·conv(A)``.

    Solved as the linear program ``min Σw`` subject to ``Σ w_i a_i = x``,
    ``w ≥ 0``.  Points that no nonnegative combination reaches (outside
    ``lin(A)`` in particular) return ``inf``.
    """
    return float(atomic_norms(atom_set, np.atleast_2d(np.asarray(x, dtype=float)))[0])


def atomic_norms(atom_set: AtomSet, X, chunk: int = 128) -> np.ndarray:
    """:func:`atomic_norm` for every row of ``X``, batched into block-diagonal LPs."""
    V = atom_set.vectors
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.full(X.shape[0], np.inf)
    U = span_basis(V)
    todo = []
    for i, x in enumerate(X):
        if not np.any(x):
            out[i] = 0.0
        elif _span_ok(V, x, basis=U):
            todo.append(i)
    for start in range(0, len(todo), chunk):
        idx = todo[start : start + chunk]
        vals = _gauge_block(V, X[idx])
        if vals is None:
            vals = [_gauge_single(V, X[i]) for i in idx]
        out[idx] = vals
    return out


def _gauge_single(V, x) -> float:
    res = linprog(np.ones(V.shape[0]), A_eq=V.T, b_eq=x, bounds=(0, None), method="highs")
    return float(res.fun) if res.status == 0 else np.inf


def _gauge_block(V, X):
    k = X.shape[0]
    n = V.shape[0]
    A = sparse.block_diag([sparse.csr_matrix(V.T)] * k, format="csr")
    res = linprog(np.ones(n * k), A_eq=A, b_eq=X.ravel(), bounds=(0, None), method="highs")
    if res.status != 0:
        return None
    return res.x.reshape(k, n).sum(axis=1)


def atomic_norm_bisection(atom_set: AtomSet, x, tol: float = 1e-9, mdw_value: float | None = None) -> float:
    """Gauge by bisection on ``c`` with a convex-hull membership test.

    Needs ``mdw > 0``; the starting bracket is ``[0, d·‖x‖/mdw]``.
    """
    V = atom_set.vectors
    x = np.asarray(x, dtype=float)
    nx = float(np.linalg.norm(x))
    if nx == 0:
        return 0.0
    if not _span_ok(V, x):
        return np.inf
    w = mdw_value if mdw_value is not None else mdw(atom_set).value
    if w <= 0:
        raise DomainError("bisection needs a positive minimal width")
    lo, hi = 0.0, atom_set.dim * nx / w

    def inside(c):
        # near the boundary the projection can stall; its residual still decides membership
        try:
            p, _ = project_onto_convex_hull(c * V, x, max_iter=5000)
        except ConvergenceError as exc:
            return exc.residual <= 1e-9
        return float(np.linalg.norm(p - x)) <= 1e-9

    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ------------------------------------------------------------------ rate bounds

_KIND_PARAMS = {
    "thm1": ("L", "diam", "eps0"),
    "thm2": ("L", "rho", "radius", "eps0"),
    "thm3": ("L", "mu", "mdw", "radius"),
    "thm4": ("L", "mu"),
    "thm6": ("Cf", "eps0"),
    "thm7": ("CfMP", "eps0"),
    "thm8": ("muFMP", "CfMP"),
    "cor2": ("d",),
}
_CATEGORY = {
    "thm1": "sublinear_fw",
    "thm2": "sublinear_mp",
    "thm3": "linear_mp",
    "thm4": "lower_bound",
    "thm6": "sublinear_fw",
    "thm7": "sublinear_mp",
    "thm8": "linear_affine",
    "cor2": "lower_bound",
}


def _resolve_kind(kind: str, params: dict) -> str:
    if kind in _KIND_PARAMS:
        return kind
    if kind == "sublinear_fw":
        return "thm6" if "Cf" in params else "thm1"
    if kind == "sublinear_mp":
        return "thm7" if "CfMP" in params else "thm2"
    if kind == "linear_mp":
        return "thm3"
    if kind == "linear_affine":
        return "thm8"
    if kind == "lower_bound":
        return "thm4"
    raise DomainError(f"unknown bound kind {kind!r}")


@dataclass(frozen=True)
class RateBound:
    """A convergence envelope.

    Sublinear kinds give ``value(t)``, an upper bound on ``ε_t``.  Linear kinds
    give a constant per-step ``factor()`` with ``ε_{t+1} ≤ factor·ε_t``.  The
    lower-bound kinds give ``factor(...)`` with ``ε_{t+1} ≥ factor·ε_t``, fed
    with the width ``W_A(−∇f(x_t))`` and ``‖z_t‖`` of the step (or ``t`` for
    the ℓ1-vertex closed form).
    """

    kind: str
    params: dict

    @property
    def category(self) -> str:
        return _CATEGORY[self.kind]

    @property
    def is_linear(self) -> bool:
        return self.category in ("linear_mp", "linear_affine")

    @property
    def is_lower(self) -> bool:
        return self.category == "lower_bound"

    def value(self, t) -> float:
        p = self.params
        dl = p["delta"]
        if self.kind == "thm1":
            return 2 * (p["L"] * p["diam"] ** 2 / dl + p["eps0"]) / (dl * t + 2)
        if self.kind == "thm2":
            return 2 * (2 / dl * p["L"] * p["rho"] ** 2 * p["radius"] ** 2 + p["eps0"]) / (dl / 2 * t + 2)
        if self.kind == "thm6":
            return 2 * (p["Cf"] / dl + p["eps0"]) / (dl * t + 2)
        if self.kind == "thm7":
            return 2 * (2 / dl * p["CfMP"] + p["eps0"]) / (dl / 2 * t + 2)
        raise DomainError(f"{self.kind} is a per-step factor, not a sublinear envelope")

    def factor(self, t=None, width=None, atom_norm=None) -> float:
        p = self.params
        if self.kind == "thm3":
            return 1 - p["delta"] ** 2 * p["mu"] * p["mdw"] ** 2 / (p["L"] * p["radius"] ** 2)
        if self.kind == "thm8":
            return 1 - p["delta"] ** 2 * p["muFMP"] / p["CfMP"]
        if self.kind == "thm4":
            if width is None or atom_norm is None:
                raise DomainError("the lower bound needs the step's width and atom norm")
            return 1 - (width**2 / atom_norm**2) * (2 * p["L"] - p["mu"]) / p["mu"]
        if self.kind == "cor2":
            if t is None:
                raise DomainError("missing parameter 't'")
            return 1 - 1 / (p["d"] - t)
        raise DomainError(f"{self.kind} is a sublinear envelope, not a per-step factor")

    def __call__(self, t=None, **step):
        if self.is_linear or self.is_lower:
            return self.factor(t, **step)
        return self.value(t)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "category": self.category, "params": dict(self.params)}


def rate_bound(kind: str, **params) -> RateBound:
    """Build the envelope for ``kind`` (``thm1``..``thm8``, ``cor2``, or a category name).

    ``delta`` defaults to 1; every other parameter is required.

    Raises:
        DomainError: naming the first missing parameter.
    """
    k = _resolve_kind(kind, params)
    for name in _KIND_PARAMS[k]:
        if params.get(name) is None:
            raise DomainError(f"missing parameter {name!r} for bound {k}")
    clean = {key: float(v) for key, v in params.items() if v is not None}
    clean.setdefault("delta", 1.0)
    if not 0 < clean["delta"] <= 1:
        raise DomainError("delta must lie in (0, 1]")
    return RateBound(k, clean)


# ------------------------------------------------------------------ report


@dataclass
class GeometryReport:
    radius: float
    diameter: float
    mdw: MdwEstimate | None
    effective_inradius: float | None = None
    coherence_profile: dict = field(default_factory=dict)
    Cf: Estimate | None = None
    CfMP: Estimate | None = None
    muFMP: Estimate | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def opt(e):
            return None if e is None else e.to_dict()

        return {
            "radius": self.radius,
            "diameter": self.diameter,
            "mdw": opt(self.mdw),
            "effective_inradius": self.effective_inradius,
            "coherence_profile": {str(k): v for k, v in self.coherence_profile.items()},
            "Cf": opt(self.Cf),
            "CfMP": opt(self.CfMP),
            "muFMP": opt(self.muFMP),
            "notes": list(self.notes),
        }


def analyze(
    atom_set: AtomSet,
    obj: SmoothObjective | None = None,
    rho: float = 1.0,
    mdw_restarts: int = 200,
    seed: int = 0,
    coherence_m=None,
    inradius: bool | None = None,
    samples: int = 2000,
) -> GeometryReport:
    """Collect every constant that applies to ``atom_set`` (and ``obj`` if given).

    ``inradius=True`` demands the effective inradius and raises
    :class:`UnsupportedError` for non-symmetric sets; ``None`` computes it
    only when it is defined.
    """
    est = mdw(atom_set, mdw_restarts, seed)
    rep = GeometryReport(atom_set.radius, atom_set.diameter, est)
    if inradius or (inradius is None and atom_set.symmetric):
        if not atom_set.symmetric:
            raise UnsupportedError("unsupported: non-symmetric inradius")
        rep.effective_inradius = est.value
    if coherence_m is not None or atom_set.symmetric:
        try:
            half = HalfDictionary.from_symmetric(atom_set) if atom_set.symmetric else HalfDictionary(atom_set.vectors)
            ms = range(1, half.n) if coherence_m is None else coherence_m
            for m in ms:
                rep.coherence_profile[int(m)] = cumulative_coherence(half, int(m))
        except DomainError as exc:
            rep.notes.append(f"coherence skipped: {exc}")
    if obj is not None:
        rep.Cf = curvature_Cf(obj, atom_set, samples, seed)
        rep.CfMP = curvature_CfMP(obj, atom_set, rho, samples, seed)
        if obj.mu:
            rep.muFMP = strong_convexity_muFMP(obj, atom_set, rho, samples, seed, est.value)
    if est.method == "multistart":
        rep.notes.append("mdw is an upper bound from multi-start descent")
    return rep
