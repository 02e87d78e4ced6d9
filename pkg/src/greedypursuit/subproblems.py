"""Inner problems shared by the corrective solvers."""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError, DomainError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based, exact)."""
    v = np.asarray(v, dtype=float)
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, n + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def _dedupe(M: np.ndarray, tol: float = 1e-12):
    """Unique rows of ``M`` and, for every original row, the unique row it maps to."""
    uniq, owner = [], np.empty(M.shape[0], dtype=int)
    for i, row in enumerate(M):
        for j, u in enumerate(uniq):
            if np.max(np.abs(u - row)) <= tol:
                owner[i] = j
                break
        else:
            owner[i] = len(uniq)
            uniq.append(row)
    return np.array(uniq), owner


def _polish_hull(G, h, w):
    """Solve the KKT system on the support of ``w``; None if the result is infeasible."""
    supp = np.flatnonzero(w > 1e-13)
    k = supp.size
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = G[np.ix_(supp, supp)]
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.concatenate([h[supp], [1.0]])
    sol = np.linalg.lstsq(K, rhs, rcond=1e-13)[0]
    ws = sol[:k]
    if np.any(ws < 0):
        return None
    out = np.zeros_like(w)
    out[supp] = ws
    return out / out.sum()


def simplex_qp(G, h, w0=None, tol: float = 1e-10, max_iter: int = 100_000):
    """Minimize ``½ wᵀGw − hᵀw`` over the probability simplex.

    Accelerated projected gradient with step ``1/λmax(G)`` and function-value
    restart, stopped when the gradient-mapping norm is at most ``tol``.  A KKT
    solve on the final support is kept when it is feasible and no worse.

    Raises:
        ConvergenceError: after ``max_iter`` iterations; ``residual`` holds the
            smallest gradient-mapping norm reached.
    """
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    k = h.size
    lam = float(np.linalg.eigvalsh(G)[-1]) if k else 0.0
    step = 1.0 / lam if lam > 0 else 1.0
    w = project_simplex(w0) if w0 is not None else np.full(k, 1.0 / k)

    def objective(v):
        return 0.5 * v @ G @ v - h @ v

    def grad_map(v):
        return float(np.linalg.norm(v - project_simplex(v - step * (G @ v - h))) / step)

    y, theta = w.copy(), 1.0
    best_map = np.inf
    for _ in range(max_iter):
        gw = G @ w - h
        gmap = float(np.linalg.norm(w - project_simplex(w - step * gw)) / step)
        best_map = min(best_map, gmap)
        if gmap <= tol:
            break
        w_next = project_simplex(y - step * (G @ y - h))
        if objective(w_next) > objective(w):
            theta = 1.0
            w_next = project_simplex(w - step * gw)
        theta_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
        y = w_next + ((theta - 1.0) / theta_next) * (w_next - w)
        w, theta = w_next, theta_next
    else:
        exc = ConvergenceError(
            f"simplex QP did not reach gradient-mapping norm {tol:g} in {max_iter} iterations",
            residual=best_map,
        )
        exc.weights = w
        raise exc
    polished = _polish_hull(G, h, w)
    if polished is not None and grad_map(polished) <= tol and objective(polished) <= objective(w) + 1e-15:
        w = polished
    return w


def project_onto_convex_hull(members, b, w0=None, tol: float = 1e-10, max_iter: int = 100_000):
    """Nearest point to ``b`` in ``conv(members)``.

    Works on the simplex weights of the deduplicated members with Gram matrix
    ``G`` (see :func:`simplex_qp`).

    Returns:
        ``(point, weights)`` with ``weights`` on the simplex, one entry per
        input member (duplicates carry their weight on the first copy).

    Raises:
        ConvergenceError: after ``max_iter`` iterations, carrying the residual
            norm ``‖point − b‖`` of the last iterate.
    """
    M = np.atleast_2d(np.asarray(members, dtype=float))
    b = np.asarray(b, dtype=float)
    if M.shape[0] == 0:
        raise DomainError("need at least one member")
    U, owner = _dedupe(M)
    first = np.full(U.shape[0], -1)
    for i, j in enumerate(owner):
        if first[j] < 0:
            first[j] = i
    if U.shape[0] == 1:
        w = np.zeros(M.shape[0])
        w[0] = 1.0
        return M[0].copy(), w

    start = None
    if w0 is not None:
        w0 = np.asarray(w0, dtype=float)
        start = np.zeros(U.shape[0])
        np.add.at(start, owner[: w0.size], w0[: owner.size])
    try:
        w = simplex_qp(U @ U.T, U @ b, start, tol, max_iter)
    except ConvergenceError as exc:
        raise ConvergenceError(
            f"convex-hull projection stalled: {exc}", residual=float(np.linalg.norm(exc.weights @ U - b))
        ) from None
    full = np.zeros(M.shape[0])
    full[first] = w
    return w @ U, full


def span_basis(members, rank_tol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis (columns) of the span of ``members`` via SVD."""
    M = np.atleast_2d(np.asarray(members, dtype=float))
    _, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((M.shape[1], 0))
    r = int(np.sum(s > rank_tol * s[0]))
    return Vt[:r].T


def least_squares_over_span(members, b, rank_tol: float = 1e-12) -> np.ndarray:
    """Orthogonal projection of ``b`` onto ``lin(members)``.

    Rank-deficient member lists (duplicates, dependent atoms) are handled by
    truncating singular values below ``rank_tol`` relative to the largest.
    """
    b = np.asarray(b, dtype=float)
    U = span_basis(members, rank_tol)
    return U @ (U.T @ b)


def span_coefficients(members, b, rank_tol: float = 1e-12) -> np.ndarray:
    """Minimum-norm coefficients ``c`` with ``cᵀ members`` the projection of ``b``."""
    M = np.atleast_2d(np.asarray(members, dtype=float))
    return np.linalg.lstsq(M.T, np.asarray(b, dtype=float), rcond=rank_tol)[0]


def golden_section(phi, lo: float = 0.0, hi: float = 1.0, tol: float = 1e-12, max_iter: int = 200):
    """Minimize a unimodal ``phi`` on ``[lo, hi]``; endpoints are checked too."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = phi(c), phi(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = phi(d)
    cands = [(fc, c), (fd, d), (phi(lo), lo), (phi(hi), hi)]
    return min(cands, key=lambda p: p[0])[1]
