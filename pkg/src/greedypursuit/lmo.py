"""Linear minimization oracles over a finite atom set.

Two multiplicative approximation contracts are supported:

* ``approx_fw``: ``⟨q, z̃ − x⟩ ≤ δ · min_z ⟨q, z − x⟩`` (anchored at the iterate)
* ``approx_mp``: ``⟨q, z̃⟩ ≤ δ · ⟨q, z*⟩`` with ``z*`` the exact answer

Approximate answers are produced by a cheaper candidate search and then
validated against full enumeration; a candidate that breaks its contract is
replaced by the exact atom.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .atoms import AtomSet
from .errors import DomainError, GapSignError, SchemaError

MODES = ("exact", "approx_fw", "approx_mp")
IMPLS = ("full", "subsample", "adversarial")


@dataclass(frozen=True)
class LmoConfig:
    """Oracle settings.

    ``impl`` picks how approximate candidates are produced:

    * ``full``: enumerate everything (always exact)
    * ``subsample``: best atom within a seeded random subset of size
      ``ceil(fraction * n)``
    * ``adversarial``: the *worst* atom that still meets the contract, which
      makes the δ in the rate bounds bite
    """

    mode: str = "exact"
    delta: float = 1.0
    impl: str = "full"
    fraction: float = 1.0
    seed: int = 0
    validate: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown oracle mode {self.mode!r}")
        if self.impl not in IMPLS:
            raise DomainError(f"unknown oracle impl {self.impl!r}")
        if not 0 < self.delta <= 1:
            raise DomainError(f"delta must lie in (0, 1], got {self.delta}")
        if not 0 < self.fraction <= 1:
            raise DomainError(f"subsample fraction must lie in (0, 1], got {self.fraction}")
        if self.mode == "exact" and self.delta != 1:
            raise DomainError("exact mode requires delta = 1")

    def to_dict(self) -> dict:
        impl = {"kind": self.impl}
        if self.impl == "subsample":
            impl.update(fraction=self.fraction, seed=self.seed)
        return {"mode": self.mode, "delta": self.delta, "impl": impl, "validate": self.validate}

    @classmethod
    def from_dict(cls, doc: dict | None) -> "LmoConfig":
        if doc is None:
            return cls()
        if not isinstance(doc, dict):
            raise SchemaError("lmo config must be an object")
        impl = doc.get("impl", "full")
        if isinstance(impl, str):
            impl = {"kind": impl}
        try:
            return cls(
                mode=doc.get("mode", "exact"),
                delta=float(doc.get("delta", 1.0)),
                impl=impl.get("kind", "full"),
                fraction=float(impl.get("fraction", 1.0)),
                seed=int(impl.get("seed", 0)),
                validate=bool(doc.get("validate", True)),
            )
        except DomainError as exc:
            raise SchemaError(str(exc)) from None


EXACT = LmoConfig()


@dataclass(frozen=True)
class LmoResult:
    index: int
    atom: np.ndarray = field(repr=False)
    inner: float
    certified_delta: float | None = 1.0
    substituted: bool = False


def _result(atom_set: AtomSet, query, idx: int, certified, substituted=False) -> LmoResult:
    atom = atom_set.vectors[idx]
    return LmoResult(int(idx), atom, float(atom @ query), certified, substituted)


def _check(atom_set: AtomSet, query) -> np.ndarray:
    q = np.asarray(query, dtype=float).ravel()
    if q.size != atom_set.dim:
        raise DomainError(f"query has dimension {q.size}, atoms have {atom_set.dim}")
    return q


def lmo_exact(atom_set: AtomSet, query) -> LmoResult:
    """``argmin_z ⟨query, z⟩``; ties go to the lowest stored index."""
    q = _check(atom_set, query)
    return _result(atom_set, q, int(np.argmin(atom_set.vectors @ q)), 1.0)


def _candidate(scores: np.ndarray, threshold: float, cfg: LmoConfig, step: int) -> int:
    """Pick an approximate answer from per-atom scores (lower is better)."""
    n = scores.size
    if cfg.impl == "full":
        return int(np.argmin(scores))
    if cfg.impl == "subsample":
        rng = np.random.default_rng((cfg.seed, step))
        k = max(1, int(np.ceil(cfg.fraction * n)))
        sub = np.sort(rng.choice(n, size=k, replace=False))
        return int(sub[np.argmin(scores[sub])])
    ok = np.flatnonzero(scores <= threshold)
    if ok.size == 0:
        return int(np.argmin(scores))
    return int(ok[np.argmax(scores[ok])])


def lmo_approx_fw(atom_set: AtomSet, query, anchor, cfg: LmoConfig = EXACT, step: int = 0) -> LmoResult:
    """δ-approximate oracle in the Frank-Wolfe sense, anchored at ``anchor``."""
    q = _check(atom_set, query)
    if cfg.mode == "exact" or cfg.delta == 1.0:
        return lmo_exact(atom_set, q)
    if cfg.mode != "approx_fw":
        raise DomainError(f"lmo_approx_fw called with mode {cfg.mode!r}")
    scores = atom_set.vectors @ q - float(q @ np.asarray(anchor, dtype=float))
    best = int(np.argmin(scores))
    opt = scores[best]
    if opt >= 0:
        # zero gap: every atom satisfies the contract; hand back the exact one
        return _result(atom_set, q, best, 1.0)
    idx = _candidate(scores, cfg.delta * opt, cfg, step)
    if not cfg.validate:
        return _result(atom_set, q, idx, None)
    if scores[idx] <= cfg.delta * opt:
        return _result(atom_set, q, idx, min(1.0, scores[idx] / opt))
    return _result(atom_set, q, best, 1.0, substituted=True)


def lmo_approx_mp(atom_set: AtomSet, query, cfg: LmoConfig = EXACT, step: int = 0) -> LmoResult:
    """δ-approximate oracle in the matching-pursuit sense (no anchor)."""
    q = _check(atom_set, query)
    if cfg.mode == "exact" or cfg.delta == 1.0:
        return lmo_exact(atom_set, q)
    if cfg.mode != "approx_mp":
        raise DomainError(f"lmo_approx_mp called with mode {cfg.mode!r}")
    scores = atom_set.vectors @ q
    best = int(np.argmin(scores))
    opt = scores[best]
    if opt >= 0:
        return _result(atom_set, q, best, 1.0)
    idx = _candidate(scores, cfg.delta * opt, cfg, step)
    if not cfg.validate:
        return _result(atom_set, q, idx, None)
    if scores[idx] <= cfg.delta * opt:
        return _result(atom_set, q, idx, min(1.0, scores[idx] / opt))
    return _result(atom_set, q, best, 1.0, substituted=True)


def measure_delta(atom_set: AtomSet, query, candidate, mode: str, anchor=None) -> float:
    """Largest δ in (0, 1] for which ``candidate`` meets the ``mode`` contract.

    Returns 0.0 when no positive δ works (the candidate points uphill).

    Raises:
        GapSignError: in ``approx_mp`` mode when the exact optimum is
            nonnegative, where the multiplicative contract has no meaning.
    """
    q = _check(atom_set, query)
    c = np.asarray(candidate, dtype=float)
    if mode == "approx_fw":
        x = np.zeros_like(q) if anchor is None else np.asarray(anchor, dtype=float)
        opt = float(np.min(atom_set.vectors @ q) - q @ x)
        val = float(q @ (c - x))
        if opt >= 0:
            return 1.0
    elif mode == "approx_mp":
        opt = float(np.min(atom_set.vectors @ q))
        val = float(q @ c)
        if opt >= 0:
            raise GapSignError("exact oracle value is nonnegative; δ is undefined in mp mode")
    else:
        raise DomainError(f"unknown contract mode {mode!r}")
    return float(np.clip(val / opt, 0.0, 1.0))
