"""Empirical distribution of successive minima under Haar measure.

Phi_i(delta) = mu(lambda_i <= delta) and the tail mu(lambda_i >= 1/delta)
are estimated from weighted ensembles; exponents come from a weighted
least-squares fit of log Phi against log delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import _kernels
from .errors import InvalidRange
from .haar import SiegelSet, sample_exact_d2, sample_siegel, volume_constants

FIT_WINDOW = (0.05, 0.3)
MIN_ESS = 30.0
MIN_FIT_POINTS = 4

# proposal tilts per (d, i): smaller means more cusp oversampling
DEFAULT_TILT = {(2, 1): 0.5, (2, 2): 0.5, (3, 1): 0.5, (3, 2): 0.35, (3, 3): 0.5}


@dataclass(eq=False)
class ExperimentReport:
    quantity: str
    grid: list
    fitted_exponent: float | None
    fit_window: tuple | None
    seed: int
    sample_count: int
    fit_stderr: float | None = None
    excluded: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "quantity": self.quantity,
            "grid": [list(map(float, row)) for row in self.grid],
            "fitted_exponent": self.fitted_exponent,
            "fit_stderr": self.fit_stderr,
            "fit_window": list(self.fit_window) if self.fit_window else None,
            "seed": self.seed,
            "sample_count": self.sample_count,
            "excluded": self.excluded,
            "extras": _plain(self.extras),
        }

    def csv_rows(self):
        yield ("x", "estimate", "stderr")
        for row in self.grid:
            yield tuple(repr(float(v)) for v in row[:3])


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def weighted_loglog_fit(xs, ests, ses):
    """WLS slope of log(est) on log(x) with weights (est/se)^2; returns (slope, stderr)."""
    x = np.log(np.asarray(xs, dtype=float))
    y = np.log(np.asarray(ests, dtype=float))
    sig = np.asarray(ses, dtype=float) / np.asarray(ests, dtype=float)
    w = 1.0 / sig**2
    X = np.column_stack([np.ones_like(x), x])
    A = X.T @ (w[:, None] * X)
    beta = np.linalg.solve(A, X.T @ (w * y))
    resid = y - X @ beta
    dof = max(len(x) - 2, 1)
    # scale by the reduced chi-square so the error reflects the residual scatter
    scale = max(float(np.sum(w * resid**2)) / dof, 1.0)
    cov = np.linalg.inv(A) * scale
    return float(beta[1]), float(math.sqrt(cov[1, 1]))


def _check_deltas(deltas):
    ds = [float(v) for v in deltas]
    if not ds or any(not 0.0 < v <= 0.5 for v in ds):
        raise InvalidRange("deltas must lie in (0, 0.5]")
    return ds


def _ensemble(d, count, seed, sampler, tilt, jobs):
    if sampler == "exact":
        if d != 2:
            raise InvalidRange("the exact sampler exists only for d = 2")
        return sample_exact_d2(count, seed, jobs=jobs)
    if sampler != "siegel":
        raise InvalidRange(f"unknown sampler {sampler!r}")
    return sample_siegel(d, count, seed, SiegelSet(), tilt=tilt, jobs=jobs)


def _grid_estimates(events, w, deltas):
    """Weighted probability, stderr and hit ESS for each event column."""
    sw = w.sum()
    rows = []
    for j, dlt in enumerate(deltas):
        hit = events[:, j]
        wh = w[hit]
        p = float(wh.sum() / sw)
        se = float(math.sqrt(np.sum((w * (hit - p)) ** 2)) / sw)
        ess = float(wh.sum() ** 2 / np.sum(wh * wh)) if wh.size else 0.0
        rows.append((dlt, p, se, ess))
    return rows


def _fit(rows, window, expected_hint=None):
    use = [r for r in rows if window[0] - 1e-12 <= r[0] <= window[1] + 1e-12 and r[3] >= MIN_ESS and r[1] > 0]
    excluded = [
        {"x": r[0], "reason": "InsufficientMass", "ess": r[3]} for r in rows if r[3] < MIN_ESS or r[1] <= 0
    ]
    if len(use) < MIN_FIT_POINTS:
        return None, None, excluded
    slope, se = weighted_loglog_fit([r[0] for r in use], [r[1] for r in use], [r[2] for r in use])
    return slope, se, excluded


def estimate_phi(
    d: int,
    i: int,
    deltas,
    count: int,
    seed: int,
    sampler: str = "siegel",
    tilt: float | None = None,
    window=FIT_WINDOW,
    jobs: int = 1,
    ensemble=None,
) -> ExperimentReport:
    if d not in (2, 3):
        raise InvalidRange("distribution experiments run at d in {2, 3}")
    if not 1 <= i <= d - 1:
        raise InvalidRange(f"need 1 <= i <= d-1, got i={i}")
    ds = _check_deltas(deltas)
    tilt = DEFAULT_TILT[(d, i)] if tilt is None else tilt
    ens = ensemble if ensemble is not None else _ensemble(d, count, seed, sampler, tilt, jobs)
    lam = _kernels.batch_minima(ens.upper)[:, i - 1]
    events = lam[:, None] <= np.array(ds)[None, :]
    rows = _grid_estimates(events, ens.weights, ds)
    slope, se, excluded = _fit(rows, window)
    return ExperimentReport(
        quantity=f"phi_d{d}_i{i}",
        grid=[r[:3] for r in rows],
        fitted_exponent=slope,
        fit_window=tuple(window),
        seed=seed,
        sample_count=ens.count,
        fit_stderr=se,
        excluded=excluded,
        extras={"expected_exponent": d * i, "hit_ess": [r[3] for r in rows], "ensemble": ens.header()},
    )


def dual_uppers(upper: np.ndarray) -> np.ndarray:
    """Bases of the dual lattices (inverse transposes) of a stack of bases."""
    return np.ascontiguousarray(np.transpose(np.linalg.inv(upper), (0, 2, 1)))


def estimate_tail(
    d: int,
    i: int,
    deltas,
    count: int,
    seed: int,
    sampler: str = "siegel",
    tilt: float | None = None,
    window=FIT_WINDOW,
    jobs: int = 1,
    ensemble=None,
) -> ExperimentReport:
    """mu(lambda_i >= 1/delta), fitted against the exponent d(d+1-i).

    The same tail is also estimated over the dual ensemble, and the duality
    sandwich 1 <= lambda_r(L) lambda_{d+1-r}(L*) <= d! is checked on every
    sample (a violation raises).
    """
    if d not in (2, 3):
        raise InvalidRange("distribution experiments run at d in {2, 3}")
    if not 2 <= i <= d:
        raise InvalidRange(f"need 2 <= i <= d, got i={i}")
    ds = _check_deltas(deltas)
    tilt = DEFAULT_TILT[(d, i)] if tilt is None else tilt
    ens = ensemble if ensemble is not None else _ensemble(d, count, seed, sampler, tilt, jobs)
    lam = _kernels.batch_minima(ens.upper)
    lam_dual = _kernels.batch_minima(dual_uppers(ens.upper))
    sandwich = duality_products(lam, lam_dual)
    fact = math.factorial(d)
    bad = int(np.sum((sandwich < 1 - 1e-9) | (sandwich > fact + 1e-9)))
    if bad:
        raise AssertionError(f"duality sandwich violated on {bad} samples")
    inv = 1.0 / np.array(ds)
    ev = lam[:, i - 1][:, None] >= inv[None, :]
    ev_dual = lam_dual[:, i - 1][:, None] >= inv[None, :]
    bound = lam_dual[:, d - i][:, None] <= fact * np.array(ds)[None, :]
    if np.any(ev & ~bound):
        raise AssertionError("tail event without the implied dual event")
    rows = _grid_estimates(ev, ens.weights, ds)
    rows_dual = _grid_estimates(ev_dual, ens.weights, ds)
    rows_bound = _grid_estimates(bound, ens.weights, ds)
    slope, se, excluded = _fit(rows, window)
    slope_d, se_d, _ = _fit(rows_dual, window)
    return ExperimentReport(
        quantity=f"tail_d{d}_i{i}",
        grid=[r[:3] for r in rows],
        fitted_exponent=slope,
        fit_window=tuple(window),
        seed=seed,
        sample_count=ens.count,
        fit_stderr=se,
        excluded=excluded,
        extras={
            "expected_exponent": d * (d + 1 - i),
            "dual_grid": [list(r[:3]) for r in rows_dual],
            "dual_fitted_exponent": slope_d,
            "dual_fit_stderr": se_d,
            "implied_bound_grid": [list(r[:3]) for r in rows_bound],
            "sandwich_min": float(sandwich.min()),
            "sandwich_max": float(sandwich.max()),
            "hit_ess": [r[3] for r in rows],
            "ensemble": ens.header(),
        },
    )


def duality_products(lam: np.ndarray, lam_dual: np.ndarray) -> np.ndarray:
    """lambda_r(L) * lambda_{d+1-r}(L*) for every sample and r."""
    return lam * lam_dual[:, ::-1]


def siegel_set_box_measure(d: int, i: int, delta: float, epsrel: float = 1e-10) -> float:
    """Unnormalized Haar mass of the Siegel-set box S_i.

    a_1 .. a_i range over sqrt(3)/2 a_{j-1} <= a_j < delta/sqrt(i),
    a_{i+1} .. a_{d-1} over sqrt(3)/2 a_{j-1} <= a_j <= 1, a_d is fixed by
    det = 1, and n_ij ranges over [1/2, 1].  The A-integrand is
    rho(a) / (a_1 ... a_{d-1}); the K and N factors contribute Vol(K) and
    (1/2)^(d(d-1)/2).
    """
    if d not in (2, 3):
        raise InvalidRange("box measure is implemented for d in {2, 3}")
    if i != d - 1:
        raise InvalidRange("box measure is defined for i = d - 1")
    if not 0.0 < delta <= 0.3:
        raise InvalidRange("delta must lie in (0, 0.3]")
    c = delta / math.sqrt(i)
    h = math.sqrt(3.0) / 2.0
    m = d - 1  # free A-coordinates a_1 .. a_{d-1}
    expo = np.array([(d - 1) - 2 * j for j in range(d)], dtype=float)

    def integrand(*rev):
        a = np.empty(d)
        a[:m] = rev[::-1]
        a[d - 1] = 1.0 / np.prod(a[:m])
        rho = math.exp(float(np.dot(expo, np.log(a))))
        return rho / np.prod(a[:m])

    ranges = []
    # nquad integrates the first argument innermost; arguments are a_{d-1}, ..., a_1
    for pos in range(m):
        j = m - pos  # 1-based index of a_j
        upper = c if j <= i else 1.0
        if j == 1:
            ranges.append((0.0, upper))
        else:
            ranges.append(lambda *outer, up=upper: (h * outer[0], up))
    val, _ = integrate.nquad(integrand, ranges, opts={"epsrel": epsrel, "epsabs": 0.0})
    vol_k = volume_constants(d, 1)[0]
    return vol_k * 0.5 ** (d * (d - 1) // 2) * val
