"""Projection off the shortest vector, quasi-minimal bases, Minkowski reduction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBasis, DimensionTooLarge
from .intmat import hermite_completion, is_primitive_tuple
from .lattice import LatticeBasis, LatticeVector, as_basis
from .minima import (
    MAX_DIM,
    TIE_RTOL,
    lattice_points,
    sign_normalize,
    successive_minima,
)


def quasi_constant(d: int) -> float:
    """Explicit envelope C(d) = (1 + 1/sqrt(3))^d for the quasi-minimal ratios."""
    return (1.0 + 1.0 / math.sqrt(3.0)) ** d


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def minkowski_window(d: int):
    """Classical bounds on (prod lambda_i) / covol."""
    v = unit_ball_volume(d)
    return 2.0**d / (math.factorial(d) * v), 2.0**d / v


@dataclass(frozen=True, eq=False)
class ProjectionStep:
    shortest: LatticeVector
    projector: np.ndarray
    projected_basis: LatticeBasis
    frame: np.ndarray  # d x (d-1) orthonormal frame of shortest^perp
    completion: np.ndarray  # unimodular U with first column = shortest coeffs

    def project(self, v) -> np.ndarray:
        """Coordinates of pi_1(v) in the hyperplane frame."""
        return self.frame.T @ np.asarray(v, dtype=float)


@dataclass(frozen=True, eq=False)
class QuasiMinimalBasis:
    vectors: tuple
    ratios: np.ndarray

    def coefficient_matrix(self) -> np.ndarray:
        return np.array([v.coeffs for v in self.vectors], dtype=np.int64).T


def _complete(coeffs):
    U, _ = hermite_completion(np.array(coeffs, dtype=np.int64).reshape(-1, 1))
    return U.astype(np.int64)


def project_off_shortest(basis) -> ProjectionStep:
    b = as_basis(basis)
    d = b.dim
    if d < 2:
        raise DegenerateBasis("projection needs d >= 2")
    prof = successive_minima(b)
    v1 = prof.attaining[0]
    U = _complete(v1.coeffs)
    C = b.columns @ U.astype(float)
    Q, R = np.linalg.qr(C)
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    Q = Q * s
    R = s[:, None] * R
    e = v1.embedding / v1.norm
    P = np.eye(d) - np.outer(e, e)
    return ProjectionStep(
        shortest=v1,
        projector=P,
        projected_basis=LatticeBasis(R[1:, 1:]),
        frame=Q[:, 1:],
        completion=U,
    )


def _quasi_coeffs(cols: np.ndarray) -> np.ndarray:
    """Integer W (unimodular) such that cols @ W is the quasi-minimal basis."""
    d = cols.shape[0]
    if d == 1:
        return np.ones((1, 1), dtype=np.int64)
    step = project_off_shortest(cols)
    U = step.completion
    C = cols @ U.astype(float)
    Wp = _quasi_coeffs(np.asarray(step.projected_basis.columns))
    v1 = C[:, 0]
    n1 = float(v1 @ v1)
    block = np.zeros((d, d), dtype=np.int64)
    block[0, 0] = 1
    block[1:, 1:] = Wp
    for j in range(1, d):
        lift = C[:, 1:] @ Wp[:, j - 1].astype(float)
        # bring the v_1 component into [-1/2, 1/2)
        block[0, j] = -math.floor(float(lift @ v1) / n1 + 0.5)
    return U @ block


def quasi_minimal_basis(basis) -> QuasiMinimalBasis:
    b = as_basis(basis)
    if b.dim > MAX_DIM:
        raise DimensionTooLarge(f"dimension {b.dim} exceeds the supported limit {MAX_DIM}")
    W = _quasi_coeffs(np.asarray(b.columns))
    vecs = tuple(LatticeVector.from_coeffs(b, W[:, j]) for j in range(b.dim))
    lam = successive_minima(b).values
    ratios = np.array([v.norm for v in vecs]) / lam
    return QuasiMinimalBasis(vecs, ratios)


def minkowski_reduce(basis) -> LatticeBasis:
    """Greedy Minkowski reduction: b_i is the shortest vector extending b_1..b_{i-1}.

    Candidates come from enumeration inside a radius that doubles until an
    extendable vector appears; norm ties go to the lexicographically largest
    sign-normalized coefficient vector.
    """
    b = as_basis(basis)
    d = b.dim
    if d > 5:
        raise DimensionTooLarge(f"dimension {d} exceeds the supported limit 5")
    lam = successive_minima(b).values
    radius = lam[-1] * (1.0 + 4 * TIE_RTOL)
    chosen: list[tuple] = []
    while len(chosen) < d:
        coeffs, norms = lattice_points(b, radius)
        order = np.argsort(norms, kind="stable")
        pick = None
        for idx in order:
            if pick is not None and norms[idx] > pick[0] + TIE_RTOL * lam[0]:
                break
            key = sign_normalize(coeffs[idx])
            if key in chosen or not is_primitive_tuple(np.array(chosen + [key]).T):
                continue
            if pick is None or (norms[idx] <= pick[0] + TIE_RTOL * lam[0] and key > pick[1]):
                pick = (norms[idx] if pick is None else pick[0], key)
        if pick is None:
            radius *= 2.0
            continue
        chosen.append(pick[1])
    M = np.array(chosen, dtype=np.int64).T
    return LatticeBasis(b.columns @ M.astype(float))


def minkowski_product_ratio(basis) -> float:
    b = as_basis(basis)
    lam = successive_minima(b).values
    return float(np.prod(lam) / b.covolume)
