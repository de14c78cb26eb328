"""Successive minima by enumeration, with a brute-force oracle."""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionTooLarge, EnumerationBudgetExceeded
from .intmat import hermite_completion, int_det, is_primitive_tuple
from .lattice import LatticeBasis, LatticeVector, as_basis

MAX_DIM = 8
TIE_RTOL = 1e-9
DEFAULT_BUDGET = 10**6


def enumeration_budget() -> int:
    """Cap on enumerated points; overridable through MINKLAB_BUDGET."""
    raw = os.environ.get("MINKLAB_BUDGET")
    if raw:
        try:
            return max(1, int(float(raw)))
        except ValueError:
            pass
    return DEFAULT_BUDGET


@dataclass(frozen=True, eq=False)
class MinimaProfile:
    values: np.ndarray
    attaining: tuple

    @property
    def dim(self):
        return len(self.values)

    def coefficient_matrix(self) -> np.ndarray:
        return np.array([v.coeffs for v in self.attaining], dtype=np.int64).T


def lll_reduce(columns):
    """LLL-reduced copy of a column basis and the unimodular U with B_red = B U."""
    B = np.array(columns, dtype=float, order="C")
    d = B.shape[0]
    U = np.eye(d, dtype=np.int64)
    _kernels.lll_range(B, U, 0, d)
    return B, U


def sign_normalize(c):
    c = tuple(int(x) for x in c)
    for x in c:
        if x != 0:
            return c if x > 0 else tuple(-y for y in c)
    return c


def lattice_points(basis, radius: float, budget: int | None = None):
    """Nonzero lattice points of norm <= radius.

    Returns ``(coeffs, norms)``: an (n, d) integer array of coefficient
    vectors in the given basis and their Euclidean norms.
    """
    b = as_basis(basis)
    if budget is None:
        budget = enumeration_budget()
    B, U = lll_reduce(b.columns)
    R = _kernels.upper_factor(B)
    cs, n2, ok = _kernels.enumerate_ball(R, float(radius) ** 2, budget)
    if not ok:
        raise EnumerationBudgetExceeded(
            f"more than {budget} lattice points within radius {radius:g}"
        )
    coeffs = cs @ U.T
    norms = np.linalg.norm(coeffs.astype(float) @ b.columns.T, axis=1)
    return coeffs, norms


def _minima_core(columns):
    """Greedy successive minima; returns (values, coefficient columns)."""
    cols = np.asarray(columns, dtype=float)
    d = cols.shape[0]
    Bred, U = lll_reduce(cols)
    chosen = []  # coefficient vectors in the reduced basis
    values = np.zeros(d)
    out = np.zeros((d, d), dtype=np.int64)
    for k in range(d):
        if k == 0:
            Bk = Bred.copy()
            W = np.eye(d, dtype=np.int64)
        else:
            Uk, _ = hermite_completion(np.array(chosen, dtype=np.int64).T)
            W = Uk.astype(np.int64)
            Bk = np.ascontiguousarray(Bred @ W)
            _kernels.lll_range(Bk, W, 0, k)
            _kernels.lll_range(Bk, W, k, d)
        R = _kernels.upper_factor(Bk)
        init = float(np.min(np.sum(Bk[:, k:] ** 2, axis=0)))
        if k == 0:
            cands, _, _ = _kernels.shortest_outside(R, 0, init, TIE_RTOL, 0.0)
        else:
            # absolute slack tied to lambda_1 keeps the tie set small in cusp lattices
            cands, _, _ = _kernels.shortest_outside(R, k, init, 0.0, TIE_RTOL * values[0])
        red = cands @ W.T
        orig = red @ U.T
        norms = np.linalg.norm(orig.astype(float) @ cols.T, axis=1)
        best = norms.min()
        slack = best * TIE_RTOL if k == 0 else values[0] * TIE_RTOL
        pick = None
        for i in np.flatnonzero(norms <= best + slack):
            key = sign_normalize(orig[i])
            if pick is None or key > pick[0]:
                pick = (key, i)
        key, i = pick
        sgn = 1 if tuple(orig[i]) == key else -1
        chosen.append(sgn * red[i])
        out[:, k] = key
        values[k] = norms[i]
    return values, out


def _check_dim(d, limit):
    if d > limit:
        raise DimensionTooLarge(f"dimension {d} exceeds the supported limit {limit}")


def minima_values(columns) -> np.ndarray:
    """Fast path: only the values lambda_1..lambda_d of a column basis."""
    return _minima_core(columns)[0]


def successive_minima(basis) -> MinimaProfile:
    b = as_basis(basis)
    _check_dim(b.dim, MAX_DIM)
    values, coeffs = _minima_core(b.columns)
    vecs = tuple(LatticeVector.from_coeffs(b, coeffs[:, j]) for j in range(b.dim))
    return MinimaProfile(values, vecs)


def brute_force_minima(basis, coeff_bound: int = 6) -> MinimaProfile:
    """Exhaustive scan of the coefficient box [-bound, bound]^d (testing oracle)."""
    b = as_basis(basis)
    d = b.dim
    _check_dim(d, 5)
    if coeff_bound > 6:
        raise DimensionTooLarge(f"coefficient bound {coeff_bound} exceeds 6")
    rng = np.arange(-coeff_bound, coeff_bound + 1)
    box = np.array(list(itertools.product(rng, repeat=d)), dtype=np.int64)
    box = box[np.any(box != 0, axis=1)]
    norms = np.linalg.norm(box.astype(float) @ b.columns.T, axis=1)
    order = np.lexsort((np.arange(len(norms)), norms))
    chosen = []
    values = []
    for idx in order:
        trial = chosen + [box[idx]]
        if np.linalg.matrix_rank(np.array(trial, dtype=float)) == len(trial):
            chosen.append(box[idx])
            values.append(norms[idx])
            if len(chosen) == d:
                break
    if len(chosen) < d:
        raise ValueError("coefficient box too small to contain d independent vectors")
    vecs = tuple(LatticeVector.from_coeffs(b, c) for c in chosen)
    return MinimaProfile(np.array(values), vecs)


def minima_attaining_basis_search(basis, cap: int = 512):
    """Look for a basis whose j-th vector has length exactly lambda_j.

    Returns a tuple of d LatticeVectors, or None when no such basis exists.
    """
    b = as_basis(basis)
    d = b.dim
    _check_dim(d, 5)
    lam = minima_values(b.columns)
    coeffs, norms = lattice_points(b, lam[-1] * (1.0 + 2 * TIE_RTOL))
    levels = []
    for j in range(d):
        hit = np.abs(norms - lam[j]) <= TIE_RTOL * lam[j]
        cands = sorted({sign_normalize(c) for c in coeffs[hit]}, reverse=True)
        levels.append(cands[:cap])

    def extend(prefix):
        j = len(prefix)
        if j == d:
            return prefix if abs(int_det(np.array(prefix).T)) == 1 else None
        for c in levels[j]:
            trial = prefix + [c]
            if c in prefix or not is_primitive_tuple(np.array(trial).T):
                continue
            found = extend(trial)
            if found is not None:
                return found
        return None

    found = extend([])
    if found is None:
        return None
    return tuple(LatticeVector.from_coeffs(b, c) for c in found)
