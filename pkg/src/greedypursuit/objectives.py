"""Smooth convex objectives and the quadratic upper model used by every solver."""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp, softmax

from .errors import DomainError, SchemaError


class SmoothObjective:
    """Convex objective with an ``L``-Lipschitz gradient.

    Subclasses implement :meth:`value` and :meth:`grad`.  ``L`` is an upper
    bound on the smoothness constant and ``mu`` (optional) a lower bound on the
    strong convexity constant, both w.r.t. the Euclidean norm.
    """

    kind = "generic"

    def __init__(self, L: float, mu: float | None = None, minimizer=None):
        if not (np.isfinite(L) and L > 0):
            raise DomainError(f"smoothness bound L must be positive, got {L}")
        if mu is not None:
            if mu < 0:
                raise DomainError("strong convexity mu must be nonnegative")
            if mu > L * (1 + 1e-12):
                raise DomainError(f"mu={mu} exceeds L={L}")
        self.L = float(L)
        self.mu = None if mu is None else float(mu)
        self.minimizer = None if minimizer is None else np.asarray(minimizer, dtype=float)

    def value(self, x) -> float:
        raise NotImplementedError

    def grad(self, x) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> float:
        return self.value(x)

    @property
    def min_value(self) -> float | None:
        return None if self.minimizer is None else self.value(self.minimizer)

    def to_dict(self) -> dict:
        raise NotImplementedError


class QuadraticObjective(SmoothObjective):
    """``f(x) = ½ xᵀQx − bᵀx + c`` with ``Q`` symmetric PSD.

    ``L`` and ``mu`` default to the extreme eigenvalues of ``Q``; a larger ``L``
    may be passed explicitly (any upper bound is legal).
    """

    kind = "quadratic"

    def __init__(self, Q, b, c: float = 0.0, L: float | None = None):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        if Q.shape != (b.size, b.size):
            raise DomainError(f"Q has shape {Q.shape}, expected {(b.size, b.size)}")
        if not np.allclose(Q, Q.T, atol=1e-12, rtol=0):
            raise DomainError("Q must be symmetric")
        Q = 0.5 * (Q + Q.T)
        eig = np.linalg.eigvalsh(Q)
        if eig[0] < -1e-10 * max(1.0, abs(eig[-1])):
            raise DomainError("Q must be positive semidefinite")
        self.Q, self.b, self.c = Q, b, float(c)
        self.eigenvalues = eig
        lam_max = max(float(eig[-1]), 0.0)
        lam_min = max(float(eig[0]), 0.0)
        if L is None:
            L = lam_max
        elif L < lam_max * (1 - 1e-12):
            raise DomainError(f"declared L={L} is below the largest eigenvalue {lam_max}")
        if L <= 0:
            raise DomainError("Q = 0 has no positive smoothness bound; pass L explicitly")
        minimizer = np.linalg.solve(Q, b) if lam_min > 1e-12 * lam_max else None
        super().__init__(L, lam_min, minimizer)

    @property
    def dim(self) -> int:
        return self.b.size

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ (self.Q @ x) - self.b @ x + self.c)

    def grad(self, x) -> np.ndarray:
        return self.Q @ np.asarray(x, dtype=float) - self.b

    def transformed(self, M) -> "QuadraticObjective":
        """Objective ``x̂ ↦ f(M x̂)``."""
        M = np.asarray(M, dtype=float)
        return QuadraticObjective(M.T @ self.Q @ M, M.T @ self.b, self.c)

    def to_dict(self) -> dict:
        return {"kind": "quadratic", "Q": self.Q.tolist(), "b": self.b.tolist(), "c": self.c, "L": self.L}


class LeastSquares(QuadraticObjective):
    """``f(x) = (w/2)‖y − x‖²``; ``w = 1`` is the classic matching-pursuit loss."""

    kind = "least-squares"

    def __init__(self, y, weight: float = 1.0):
        y = np.asarray(y, dtype=float).ravel()
        if weight <= 0:
            raise DomainError("weight must be positive")
        self.target = y
        self.weight = float(weight)
        super().__init__(weight * np.eye(y.size), weight * y, 0.5 * weight * float(y @ y))

    def value(self, x) -> float:
        r = self.target - np.asarray(x, dtype=float)
        return float(0.5 * self.weight * (r @ r))

    def grad(self, x) -> np.ndarray:
        return self.weight * (np.asarray(x, dtype=float) - self.target)

    def to_dict(self) -> dict:
        return {"kind": "least-squares", "y": self.target.tolist(), "weight": self.weight}


class LogSumExp(SmoothObjective):
    """``f(x) = log Σ_i exp(⟨a_i, x⟩) + (μ₀/2)‖x‖²``.

    Declared ``L = max_i ‖a_i‖² + μ₀`` and ``mu = μ₀``.
    """

    kind = "log-sum-exp"

    def __init__(self, A, mu0: float):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if mu0 < 0:
            raise DomainError("mu0 must be nonnegative")
        self.A = A
        self.mu0 = float(mu0)
        L = float(np.max(np.sum(A * A, axis=1))) + self.mu0
        super().__init__(L, self.mu0)

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(logsumexp(self.A @ x) + 0.5 * self.mu0 * (x @ x))

    def grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.A.T @ softmax(self.A @ x) + self.mu0 * x

    def to_dict(self) -> dict:
        return {"kind": "log-sum-exp", "A": self.A.tolist(), "mu0": self.mu0}


def least_squares(y) -> LeastSquares:
    return LeastSquares(y)


def surrogate(obj: SmoothObjective, x_t, x) -> float:
    """Quadratic upper model ``f(x_t) + ⟨∇f(x_t), x − x_t⟩ + (L/2)‖x − x_t‖²``."""
    x_t = np.asarray(x_t, dtype=float)
    dx = np.asarray(x, dtype=float) - x_t
    if dx.shape != x_t.shape:
        raise DomainError("dimension mismatch")
    return obj.value(x_t) + float(obj.grad(x_t) @ dx) + 0.5 * obj.L * float(dx @ dx)


def linearization_gap(obj: SmoothObjective, x, y) -> float:
    """``D(y, x) = f(y) − f(x) − ⟨y − x, ∇f(x)⟩``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DomainError("dimension mismatch")
    return obj.value(y) - obj.value(x) - float((y - x) @ obj.grad(x))


def gradient_check(obj: SmoothObjective, points, step: float = 1e-5) -> float:
    """Largest relative error between ``grad`` and central finite differences."""
    worst = 0.0
    for x in np.atleast_2d(points):
        g = obj.grad(x)
        fd = np.empty_like(g)
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = step
            fd[i] = (obj.value(x + e) - obj.value(x - e)) / (2 * step)
        worst = max(worst, float(np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1.0)))
    return worst


def from_dict(doc: dict) -> SmoothObjective:
    """Build an objective from ``{"kind": ..., ...parameters}``."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise SchemaError("objective document needs a 'kind' field")
    kind = doc["kind"]
    try:
        if kind == "least-squares":
            return LeastSquares(doc["y"], float(doc.get("weight", 1.0)))
        if kind == "quadratic":
            Q = np.asarray(doc["Q"], dtype=float)
            return QuadraticObjective(Q, doc["b"], float(doc.get("c", 0.0)), doc.get("L"))
        if kind == "log-sum-exp":
            return LogSumExp(doc["A"], float(doc["mu0"]))
    except KeyError as exc:
        raise SchemaError(f"objective {kind!r} is missing field {exc}") from None
    raise SchemaError(f"unknown objective kind {kind!r}")
