"""Primitive tuples, the Siegel transform f-hat^k, and Monte-Carlo checks of the mean-value formula.

Tuples are ordered and signed: (v, w), (w, v) and (-v, w) are distinct
elements of P^k.  The test functions are indicators of products of
centred balls, so the right-hand side is c_{d,k} (V_d r^d)^k.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .distribution import ExperimentReport
from .errors import EnumerationBudgetExceeded, InvalidRange
from .haar import SiegelSet, sample_exact_d2, sample_siegel, volume_constants
from .intmat import is_primitive_tuple
from .lattice import LatticeVector, as_basis
from .minima import enumeration_budget, lattice_points
from .reduction import unit_ball_volume


@dataclass(frozen=True, eq=False)
class PrimitiveTuple:
    order: int
    vectors: tuple

    def coefficient_matrix(self) -> np.ndarray:
        return np.array([v.coeffs for v in self.vectors], dtype=np.int64)


def _minor_combos(d, k):
    return np.array(list(itertools.combinations(range(d), k)), dtype=np.int64)


def _check_k(d, k):
    if not 1 <= k < d:
        raise InvalidRange(f"need 1 <= k < d, got d={d}, k={k}")


def enumerate_primitive_tuples(basis, k: int, radius: float, budget: int | None = None):
    """All ordered k-tuples of lattice vectors of norm <= radius that extend to a basis."""
    b = as_basis(basis)
    _check_k(b.dim, k)
    budget = enumeration_budget() if budget is None else budget
    coeffs, _ = lattice_points(b, radius, budget)
    n = len(coeffs)
    if n**k > budget:
        raise EnumerationBudgetExceeded(f"{n}^{k} candidate tuples exceed the budget {budget}")
    vecs = [LatticeVector.from_coeffs(b, c) for c in coeffs]
    out = []
    for idx in itertools.permutations(range(n), k):
        if is_primitive_tuple(coeffs[list(idx)].T):
            out.append(PrimitiveTuple(k, tuple(vecs[i] for i in idx)))
    return out


def f_hat_k(basis, k: int, radius: float, budget: int | None = None) -> int:
    """|P^k(L) intersected with B(0, radius)^k| (primitivity via gcd of maximal minors)."""
    b = as_basis(basis)
    _check_k(b.dim, k)
    budget = enumeration_budget() if budget is None else budget
    coeffs, _ = lattice_points(b, radius, budget)
    if k <= 3:
        return int(_kernels.count_primitive_tuples(coeffs.astype(np.int64), k, _minor_combos(b.dim, k)))
    return sum(
        1 for idx in itertools.permutations(range(len(coeffs)), k) if is_primitive_tuple(coeffs[list(idx)].T)
    )


def siegel_rhs(d: int, k: int, radius: float) -> float:
    _, _, c = volume_constants(d, k)
    return c * (unit_ball_volume(d) * radius**d) ** k


def ensemble_f_hat(ens, k: int, radius: float) -> np.ndarray:
    budget = enumeration_budget()
    vals = _kernels.batch_f_hat(ens.upper, k, float(radius), _minor_combos(ens.dim, k), budget)
    if np.any(vals < 0):
        raise EnumerationBudgetExceeded(f"a sample has more than {budget} lattice points in the ball")
    return vals.astype(float)


def siegel_mc_check(
    d: int,
    k: int,
    radius: float,
    count: int,
    seed: int,
    sampler: str = "siegel",
    tilt: float = 0.5,
    jobs: int = 1,
    ensemble=None,
) -> ExperimentReport:
    """Weighted ensemble mean of f-hat^k against c_{d,k} (V_d r^d)^k."""
    _check_k(d, k)
    if d not in (2, 3):
        raise InvalidRange("the Monte-Carlo check runs at d in {2, 3}")
    if radius <= 0:
        raise InvalidRange("radius must be positive")
    if ensemble is None:
        if sampler == "exact":
            if d != 2:
                raise InvalidRange("the exact sampler exists only for d = 2")
            ensemble = sample_exact_d2(count, seed, jobs=jobs)
        elif sampler == "siegel":
            ensemble = sample_siegel(d, count, seed, SiegelSet(), tilt=tilt, jobs=jobs)
        else:
            raise InvalidRange(f"unknown sampler {sampler!r}")
    vals = ensemble_f_hat(ensemble, k, radius)
    left, se = ensemble.mean(vals)
    right = siegel_rhs(d, k, radius)
    z = (left - right) / se if se > 0 else (0.0 if left == right else math.inf)
    return ExperimentReport(
        quantity=f"siegel_f_hat_d{d}_k{k}",
        grid=[(float(radius), left, se)],
        fitted_exponent=None,
        fit_window=None,
        seed=seed,
        sample_count=ensemble.count,
        extras={
            "left": left,
            "right": right,
            "stderr": se,
            "z": z,
            "ratio": left / right,
            "ess": ensemble.ess(),
            "ensemble": ensemble.header(),
        },
    )
