"""Diagonal and unipotent flows on the space of lattices, log-law traces and hitting times.

Orbits are followed as pseudo-orbits: the basis is advanced by at most one
time unit, renormalized and LLL-reduced after every increment.  A direct
evaluation of exp(t z) B overflows double precision long before t = 10^4,
while the reduced pseudo-orbit stays well conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .distribution import ExperimentReport
from .errors import InvalidRange
from .haar import draw_haar_basis
from .lattice import LatticeBasis, as_basis

T_MIN = 100.0
GRID_RATIO = 1.05
STEP = 1.0


@dataclass(frozen=True, eq=False)
class FlowSpec:
    kind: str
    generator: np.ndarray

    def __post_init__(self):
        g = np.array(self.generator, dtype=float)
        if self.kind == "diagonal":
            if g.ndim != 1 or g.size < 2:
                raise InvalidRange("diagonal generator must be a vector z of length d >= 2")
            if abs(g.sum()) > 1e-12:
                raise InvalidRange("diagonal generator must sum to zero")
            if np.max(np.abs(g)) == 0:
                raise InvalidRange("diagonal generator must be nonzero")
        elif self.kind == "unipotent":
            if g.ndim != 2 or g.shape[0] != g.shape[1]:
                raise InvalidRange("unipotent generator must be a square matrix")
            if np.any(np.tril(g) != 0):
                raise InvalidRange("unipotent generator must be strictly upper triangular")
        else:
            raise InvalidRange(f"unknown flow kind {self.kind!r}")
        g.setflags(write=False)
        object.__setattr__(self, "generator", g)

    @property
    def dim(self) -> int:
        return self.generator.shape[0]

    def _kernel_args(self):
        if self.kind == "diagonal":
            return 0, np.diag(self.generator)
        return 1, np.array(self.generator)

    def matrix(self, t: float) -> np.ndarray:
        """exp(t z) or exp(t N) in closed form."""
        kind, gen = self._kernel_args()
        return _kernels._step_matrix(kind, gen, float(t))


@dataclass(frozen=True, eq=False)
class LogLawTrace:
    times: np.ndarray
    delta_values: np.ndarray
    running_ratio: np.ndarray


def apply_flow(spec: FlowSpec, t: float, basis) -> LatticeBasis:
    b = as_basis(basis)
    if b.dim != spec.dim:
        raise InvalidRange("flow and basis dimensions differ")
    return LatticeBasis(spec.matrix(t) @ b.columns)


def geometric_times(t_min: float, t_max: float, ratio: float = GRID_RATIO) -> np.ndarray:
    n = int(math.floor(math.log(t_max / t_min) / math.log(ratio) + 1e-9))
    ts = t_min * ratio ** np.arange(n + 1)
    if ts[-1] < t_max * (1 - 1e-12):
        ts = np.append(ts, t_max)
    return ts


def _orbit_lambda(spec, basis, i, times):
    kind, gen = spec._kernel_args()
    B = np.ascontiguousarray(as_basis(basis).columns)
    return _kernels.orbit_minima(B, kind, gen, np.asarray(times, dtype=float), STEP, i - 1)


def _check_orbit_args(spec, d, i):
    if d not in (2, 3):
        raise InvalidRange("flow experiments run at d in {2, 3}")
    if spec.dim != d:
        raise InvalidRange("flow and lattice dimensions differ")
    if not 1 <= i <= d - 1:
        raise InvalidRange(f"need 1 <= i <= d-1, got i={i}")


def log_law_trace(spec: FlowSpec, basis, i: int, t_max: float, grid: int | None = None, t_min: float = T_MIN) -> LogLawTrace:
    """Delta_i = -log lambda_i along the orbit on a geometric grid, with the running max of Delta_i / log t.

    ``grid`` fixes the number of grid points; by default consecutive times
    have ratio 1.05.  The grid starts at ``t_min`` > 1 so that log t stays
    away from 0.
    """
    b = as_basis(basis)
    _check_orbit_args(spec, b.dim, i)
    if not 1.0 < t_min < t_max <= 1e5:
        raise InvalidRange("need 1 < t_min < t_max <= 1e5")
    times = geometric_times(t_min, t_max) if grid is None else np.geomspace(t_min, t_max, int(grid))
    lam = _orbit_lambda(spec, b, i, times)
    delta = -np.log(lam)
    running = np.maximum.accumulate(delta / np.log(times))
    return LogLawTrace(times, delta, running)


def _seed_rng(seed, s):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(s)]))


def haar_bases(d: int, seeds: int, seed: int = 0):
    """One exact Haar-random basis per seed index, independent of the seed count."""
    return [draw_haar_basis(d, _seed_rng(seed, s)) for s in range(seeds)]


def log_law_experiment(spec: FlowSpec, d: int, i: int, t_max: float, seeds: int, seed: int = 0,
                       t_min: float = T_MIN, grid: int | None = None):
    """Traces for ``seeds`` Haar-random lattices and the fraction ending in the band.

    The band is [1/2, 3/2] / (d i) around the limit 1/(d i).
    """
    traces = [log_law_trace(spec, B, i, t_max, grid, t_min) for B in haar_bases(d, seeds, seed)]
    lim = 1.0 / (d * i)
    final = np.array([tr.running_ratio[-1] for tr in traces])
    inside = (final >= 0.5 * lim) & (final <= 1.5 * lim)
    return traces, float(inside.mean())


def borel_cantelli_upper_check(spec: FlowSpec, d: int, i: int, epsilon: float, seeds: int,
                               t_maxes=(1e2, 1e3, 1e4), seed: int = 0) -> ExperimentReport:
    """Fractions of integer times in [T/2, T] with Delta_i > (1/(d i) + epsilon) log t."""
    _check_orbit_args(spec, d, i)
    if epsilon < 0:
        raise InvalidRange("epsilon must be nonnegative")
    windows = [np.arange(math.ceil(T / 2), math.floor(T) + 1, dtype=float) for T in t_maxes]
    allt = np.unique(np.concatenate(windows))
    thr = 1.0 / (d * i) + epsilon
    fracs = np.zeros((seeds, len(t_maxes)))
    for s, B in enumerate(haar_bases(d, seeds, seed)):
        delta = -np.log(_orbit_lambda(spec, B, i, allt))
        viol = delta > thr * np.log(allt)
        for j, w in enumerate(windows):
            sel = np.searchsorted(allt, w)
            fracs[s, j] = viol[sel].mean()
    mono = np.all(np.diff(fracs, axis=1) <= 0, axis=1)
    mean = fracs.mean(axis=0)
    se = fracs.std(axis=0, ddof=1) / math.sqrt(seeds) if seeds > 1 else np.zeros(len(t_maxes))
    return ExperimentReport(
        quantity=f"borel_cantelli_d{d}_i{i}",
        grid=[(float(T), float(m), float(e)) for T, m, e in zip(t_maxes, mean, se)],
        fitted_exponent=None,
        fit_window=None,
        seed=seed,
        sample_count=seeds,
        extras={
            "epsilon": epsilon,
            "per_seed_fractions": fracs.tolist(),
            "nonincreasing_fraction": float(mono.mean()),
            "max_fraction_at_largest": float(fracs[:, -1].max()),
        },
    )


def hitting_time(spec: FlowSpec, basis, i: int, level: float, m_max: int):
    """First m in 1..m_max with lambda_i(flow_m L) <= level, or None."""
    b = as_basis(basis)
    if spec.dim != b.dim:
        raise InvalidRange("flow and basis dimensions differ")
    if not 1 <= i <= b.dim:
        raise InvalidRange("index i out of range")
    kind, gen = spec._kernel_args()
    m = _kernels.orbit_first_hit(np.ascontiguousarray(b.columns), kind, gen, i - 1, float(level), int(m_max))
    return int(m) if m > 0 else None


def hitting_time_experiment(spec: FlowSpec, d: int, i: int, ts=(1.0, 1.5, 2.0, 2.5), seeds: int = 100,
                            m_max: int = 10**6, seed: int = 0) -> ExperimentReport:
    """Regress the mean of log(hitting time of lambda_i <= e^-t) on t; slope near d i."""
    _check_orbit_args(spec, d, i)
    bases = haar_bases(d, seeds, seed)
    logm = np.zeros((seeds, len(ts)))
    censored = 0
    for s, B in enumerate(bases):
        for j, t in enumerate(ts):
            m = hitting_time(spec, B, i, math.exp(-t), m_max)
            if m is None:
                censored += 1
                m = m_max
            logm[s, j] = math.log(m)
    mean = logm.mean(axis=0)
    se = logm.std(axis=0, ddof=1) / math.sqrt(seeds)
    X = np.column_stack([np.ones(len(ts)), np.asarray(ts, dtype=float)])
    w = 1.0 / se**2
    A = X.T @ (w[:, None] * X)
    beta = np.linalg.solve(A, X.T @ (w * mean))
    slope_se = math.sqrt(np.linalg.inv(A)[1, 1])
    return ExperimentReport(
        quantity=f"hitting_time_d{d}_i{i}",
        grid=[(float(t), float(m), float(e)) for t, m, e in zip(ts, mean, se)],
        fitted_exponent=float(beta[1]),
        fit_window=(float(min(ts)), float(max(ts))),
        seed=seed,
        sample_count=seeds,
        fit_stderr=slope_se,
        extras={"expected_slope": d * i, "censored": censored, "m_max": m_max},
    )
