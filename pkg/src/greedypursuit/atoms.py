"""Finite atom dictionaries.

An :class:`AtomSet` is an ordered, immutable stack of dense vectors together
with a symmetry claim and a uniform scale factor.  Every consumer that needs
deterministic tie-breaking refers back to the stored row index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, SchemaError

SET_TOL = 1e-12


def _find_row(rows: np.ndarray, v: np.ndarray, tol: float = SET_TOL) -> int:
    """Index of the first row equal to ``v`` coordinate-wise within ``tol``, else -1."""
    if rows.shape[0] == 0:
        return -1
    hit = np.flatnonzero(np.max(np.abs(rows - v), axis=1) <= tol)
    return int(hit[0]) if hit.size else -1


def _match_rows(rows: np.ndarray, queries: np.ndarray, tol: float = SET_TOL) -> np.ndarray:
    """For every query, the first row equal to it within ``tol`` (or -1).

    Candidates come from squared distances computed through the Gram matrix
    and are then confirmed coordinate-wise, so the tolerance is exact.
    """
    out = np.full(queries.shape[0], -1)
    if rows.shape[0] == 0 or queries.shape[0] == 0:
        return out
    sr = np.sum(rows * rows, axis=1)
    sq = np.sum(queries * queries, axis=1)
    d2 = sq[:, None] + sr[None, :] - 2.0 * (queries @ rows.T)
    slack = rows.shape[1] * tol * tol + 1e-12 * (sq[:, None] + sr[None, :])
    qi, ri = np.nonzero(d2 <= slack)
    for q, r in zip(qi, ri):
        if out[q] < 0 and np.max(np.abs(rows[r] - queries[q])) <= tol:
            out[q] = r
    return out


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AtomSet:
    """Ordered finite dictionary ``scale * atoms``.

    Args:
        atoms: array of shape ``(n, d)`` holding the unscaled atoms row-wise.
        symmetric: claim that the set equals its own negation. Verified on
            construction.
        scale: positive factor applied to every atom.
    """

    atoms: np.ndarray
    symmetric: bool = False
    scale: float = 1.0

    def __post_init__(self):
        arr = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DomainError("an atom set needs at least one atom of dimension >= 1")
        if not np.all(np.isfinite(arr)):
            raise DomainError("atom coordinates must be finite")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise DomainError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "atoms", _frozen(arr))
        object.__setattr__(self, "scale", float(self.scale))
        if self.symmetric and np.any(_match_rows(arr, -arr) < 0):
            raise DomainError("set is flagged symmetric but is not closed under negation")

    @property
    def n(self) -> int:
        return self.atoms.shape[0]

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    def __len__(self):
        return self.n

    @cached_property
    def vectors(self) -> np.ndarray:
        """Scaled atoms, shape ``(n, d)``."""
        return _frozen(self.scale * self.atoms)

    def __getitem__(self, i) -> np.ndarray:
        return self.vectors[i]

    @cached_property
    def radius(self) -> float:
        return float(np.max(np.linalg.norm(self.vectors, axis=1)))

    @cached_property
    def diameter(self) -> float:
        V = self.vectors
        sq = np.sum(V * V, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (V @ V.T)
        return float(np.sqrt(max(np.max(d2), 0.0)))

    @cached_property
    def symmetrized(self) -> "AtomSet":
        return symmetrize(self)

    def contains(self, v, tol: float = SET_TOL) -> bool:
        return _find_row(self.vectors, np.asarray(v, dtype=float), tol) >= 0

    def to_dict(self) -> dict:
        return {
            "dimension": self.dim,
            "symmetric": bool(self.symmetric),
            "scale": self.scale,
            "atoms": self.atoms.tolist(),
        }

    def __repr__(self):
        return f"AtomSet(n={self.n}, d={self.dim}, symmetric={self.symmetric}, scale={self.scale:g})"


def symmetrize(atom_set: AtomSet) -> AtomSet:
    """Return ``A ∪ -A`` with each vector present once.

    Input order is kept; negations that were missing are appended after the
    originals in the order of their source atoms, so an already symmetric set
    comes back unchanged.
    """
    arr = atom_set.atoms
    first = _match_rows(arr, arr)
    kept = arr[first == np.arange(arr.shape[0])]
    missing = _match_rows(kept, -kept) < 0
    out = np.vstack([kept, -kept[missing]])
    return AtomSet(np.array(out), symmetric=True, scale=atom_set.scale)


def scale(atom_set: AtomSet, alpha: float) -> AtomSet:
    """Blow the set up by ``alpha > 0``; symmetry is preserved."""
    if not (np.isfinite(alpha) and alpha > 0):
        raise DomainError(f"alpha must be positive, got {alpha}")
    return AtomSet(atom_set.atoms, symmetric=atom_set.symmetric, scale=atom_set.scale * alpha)


def radius(atom_set: AtomSet) -> float:
    return atom_set.radius


def diameter(atom_set: AtomSet) -> float:
    return atom_set.diameter


class HalfDictionary:
    """One representative ``B`` per ± pair, so that ``A = B ∪ -B``."""

    def __init__(self, atoms):
        arr = np.atleast_2d(np.asarray(atoms, dtype=float))
        if arr.shape[0] < 1:
            raise DomainError("half dictionary needs at least one atom")
        for i, a in enumerate(arr):
            if _find_row(arr, -a) >= 0:
                raise DomainError(f"atom {i} has its negation in the half dictionary")
        self.atoms = _frozen(arr)

    @property
    def n(self) -> int:
        return self.atoms.shape[0]

    def to_atom_set(self) -> AtomSet:
        return symmetrize(AtomSet(self.atoms))

    @classmethod
    def from_symmetric(cls, atom_set: AtomSet) -> "HalfDictionary":
        if not atom_set.symmetric:
            raise DomainError("need a symmetric atom set to split into halves")
        half = []
        for a in atom_set.vectors:
            arr = np.array(half).reshape(-1, atom_set.dim)
            if _find_row(arr, a) < 0 and _find_row(arr, -a) < 0:
                half.append(a)
        return cls(np.array(half))


# ---------------------------------------------------------------- generators


def l1_vertices(d: int) -> AtomSet:
    """``{±e_i}`` ordered e1, -e1, e2, -e2, ..."""
    if d < 1:
        raise DomainError("dimension must be >= 1")
    rows = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        rows += [e, -e]
    return AtomSet(np.array(rows), symmetric=True)


def theta_pair(theta: float) -> AtomSet:
    """``A_θ ∪ -A_θ`` with ``A_θ = {(1, 0), (cos θ, sin θ)}``."""
    if not 0 < theta <= np.pi / 2 + 1e-15:
        raise DomainError("theta must lie in (0, pi/2]")
    base = np.array([[1.0, 0.0], [np.cos(theta), np.sin(theta)]])
    return symmetrize(AtomSet(base))


def random_unit_sphere(n: int, d: int, seed: int, symmetric: bool = True) -> AtomSet:
    """``n`` seeded uniform unit vectors in ``R^d`` (symmetrized to ``2n`` by default)."""
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((n, d))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    base = AtomSet(V)
    return symmetrize(base) if symmetric else base


def simplex_vertices(d: int) -> AtomSet:
    return AtomSet(np.eye(d), symmetric=False)


GENERATORS = {
    "l1-vertices": lambda p: l1_vertices(int(p["d"])),
    "theta-pair": lambda p: theta_pair(float(p["theta"])),
    "random-unit-sphere": lambda p: random_unit_sphere(
        int(p["n"]), int(p["d"]), int(p.get("seed", 0)), bool(p.get("symmetric", True))
    ),
    "simplex-vertices": lambda p: simplex_vertices(int(p["d"])),
}


def from_dict(doc: dict) -> AtomSet:
    """Build an atom set from a JSON document or a generator reference.

    Accepted layouts::

        {"dimension": d, "symmetric": bool, "scale": a, "atoms": [[...], ...]}
        {"generator": "l1-vertices", "d": 4, "scale": 2.0}
    """
    if not isinstance(doc, dict):
        raise SchemaError("atom-set document must be a JSON object")
    if "generator" in doc:
        name = doc["generator"]
        if name not in GENERATORS:
            raise SchemaError(f"unknown atom generator {name!r}; known: {sorted(GENERATORS)}")
        try:
            out = GENERATORS[name](doc)
        except KeyError as exc:
            raise SchemaError(f"generator {name!r} is missing parameter {exc}") from None
        if "scale" in doc:
            out = scale(out, float(doc["scale"]))
        return out
    if "atoms" not in doc:
        raise SchemaError("atom-set document needs 'atoms' or 'generator'")
    atoms = np.asarray(doc["atoms"], dtype=float)
    if atoms.ndim != 2:
        raise SchemaError("'atoms' must be a list of equal-length coordinate lists")
    if "dimension" in doc and int(doc["dimension"]) != atoms.shape[1]:
        raise SchemaError(f"declared dimension {doc['dimension']} but atoms have {atoms.shape[1]}")
    return AtomSet(atoms, symmetric=bool(doc.get("symmetric", False)), scale=float(doc.get("scale", 1.0)))
