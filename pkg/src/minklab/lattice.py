"""Lattice bases, Gram matrices, duals and basic matrix invariants.

A basis is stored column-wise: ``columns[:, j]`` is the j-th basis vector.
All arithmetic is double precision.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateBasis
from .intmat import int_det


def rank_tolerance(columns: np.ndarray) -> float:
    """Scale-invariant singularity threshold 1e-10 * (max column norm)^d."""
    d = columns.shape[0]
    scale = float(np.max(np.linalg.norm(columns, axis=0))) if d else 0.0
    return 1e-10 * scale**d


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    columns: np.ndarray
    covolume: float = field(init=False)

    def __post_init__(self):
        cols = np.array(self.columns, dtype=float)
        if cols.ndim != 2 or cols.shape[0] != cols.shape[1] or cols.shape[0] < 1:
            raise DegenerateBasis(f"basis must be a nonempty square matrix, got shape {cols.shape}")
        if not np.all(np.isfinite(cols)):
            raise DegenerateBasis("basis has non-finite entries")
        det = abs(float(np.linalg.det(cols)))
        if not det > rank_tolerance(cols):
            raise DegenerateBasis(f"basis is (numerically) singular: |det| = {det:.3e}")
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "covolume", det)

    @property
    def dim(self) -> int:
        return self.columns.shape[0]

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence[float]]) -> "LatticeBasis":
        """Build from a list of basis vectors (each becomes a column)."""
        return cls(np.array(vectors, dtype=float).T)

    def vector(self, coeffs) -> "LatticeVector":
        return LatticeVector.from_coeffs(self, coeffs)

    def gram(self) -> "GramMatrix":
        return GramMatrix(self.columns.T @ self.columns)

    def to_json(self) -> dict:
        return {"dim": self.dim, "columns": self.columns.T.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "LatticeBasis":
        if not isinstance(obj, dict) or "dim" not in obj or "columns" not in obj:
            raise ValueError('basis JSON must be an object with keys "dim" and "columns"')
        d = obj["dim"]
        cols = obj["columns"]
        if not isinstance(d, int) or d < 1:
            raise ValueError('"dim" must be a positive integer')
        if not isinstance(cols, list) or len(cols) != d or any(
            not isinstance(c, list) or len(c) != d for c in cols
        ):
            raise ValueError(f'"columns" must be a list of {d} vectors of length {d}')
        try:
            arr = np.array(cols, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValueError(f'"columns" entries must be numbers: {exc}') from None
        return cls(arr.T)

    def __repr__(self):
        return f"LatticeBasis(dim={self.dim}, covolume={self.covolume:.6g})"


@dataclass(frozen=True, eq=False)
class GramMatrix:
    entries: np.ndarray

    def __post_init__(self):
        g = np.array(self.entries, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("Gram matrix must be square")
        if not np.allclose(g, g.T, rtol=0, atol=1e-12 * max(1.0, np.abs(g).max())):
            raise ValueError("Gram matrix must be symmetric")
        if np.linalg.eigvalsh(g).min() <= 0:
            raise ValueError("Gram matrix must be positive definite")
        object.__setattr__(self, "entries", g)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class LatticeVector:
    coeffs: tuple
    embedding: np.ndarray
    norm: float

    @classmethod
    def from_coeffs(cls, basis: LatticeBasis, coeffs) -> "LatticeVector":
        c = tuple(int(x) for x in coeffs)
        if len(c) != basis.dim:
            raise ValueError("coefficient vector has wrong length")
        emb = basis.columns @ np.array(c, dtype=float)
        return cls(c, emb, float(np.linalg.norm(emb)))

    def __neg__(self):
        return LatticeVector(tuple(-x for x in self.coeffs), -self.embedding, self.norm)


def as_basis(obj) -> LatticeBasis:
    if isinstance(obj, LatticeBasis):
        return obj
    return LatticeBasis(np.asarray(obj, dtype=float))


def covolume(basis) -> float:
    return as_basis(basis).covolume


def dual(basis) -> LatticeBasis:
    """Dual basis: the inverse transpose, so that <b_i, b_j*> = delta_ij."""
    b = as_basis(basis)
    return LatticeBasis(np.linalg.inv(b.columns).T)


def operator_norm(matrix) -> float:
    m = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return float(np.linalg.svd(m, compute_uv=False)[0]) if m.size else 0.0


def is_unimodular_integer_matrix(m, tol: float = 1e-6) -> bool:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.all(np.isfinite(a)):
        return False
    r = np.rint(a)
    if np.max(np.abs(a - r), initial=0.0) > tol:
        return False
    return abs(int_det(r.astype(np.int64))) == 1


def same_lattice(b1, b2) -> bool:
    """Lattice equality via the change-of-basis matrix B1^-1 B2."""
    x = as_basis(b1).columns
    y = as_basis(b2).columns
    if x.shape != y.shape:
        return False
    return is_unimodular_integer_matrix(np.linalg.solve(x, y))


def load_basis(path) -> LatticeBasis:
    with open(path) as fh:
        return LatticeBasis.from_json(json.load(fh))


def save_basis(basis: LatticeBasis, path) -> None:
    with open(path, "w") as fh:
        json.dump(basis.to_json(), fh)
