"""Iwasawa coordinates, Siegel sets, Haar density, volume constants and samplers.

Two samplers of the Haar probability measure on unimodular lattices:

* ``sample_exact_d2``: the modular fundamental domain with density
  dx dy / y^2, one lattice per point, then a uniform rotation.
* ``sample_siegel``: g = k a n drawn from a Siegel set with the Haar density
  rho(a).  Every lattice is covered m(g) >= 1 times by the Siegel set, so
  samples carry weight 1/m(g) (times an importance ratio when the
  A-coordinates are drawn from a tilted proposal).

In simple-root coordinates s_k = log(a_k / a_{k+1}) the density rho(a) da
factorizes as prod_k exp(k (d - k) s_k) ds_k on s_k <= log t, so each
coordinate is an independent truncated exponential.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import _kernels
from ._blocks import BLOCK_SIZE, run_blocks
from .errors import DimensionTooLarge, EnumerationBudgetExceeded, InvalidRange, NotUnimodular
from .lattice import LatticeBasis
from .minima import enumeration_budget

SIGMA_RTOL = 1e-9
TRUNC_MASS = 1e-12  # target Haar mass cut from each simple-root coordinate
Y_MAX = 1e6


# ---------------------------------------------------------------- constants

def zeta(s: int) -> float:
    """Riemann zeta at integer s >= 2."""
    if s < 2 or int(s) != s:
        raise InvalidRange("zeta is only evaluated at integers s >= 2")
    return float(special.zeta(s, 1))


def volume_constants(d: int, k: int):
    """(vol_K, vol_X, c_dk).

    vol_K follows the printed product prod_{i=1}^{d-1} pi^(i/2) / Gamma(i/2 + 1);
    vol_X = zeta(2)...zeta(d); c_dk = 1 / (zeta(d) ... zeta(d - k + 1)).
    """
    if not (isinstance(d, (int, np.integer)) and isinstance(k, (int, np.integer))):
        raise InvalidRange("d and k must be integers")
    if not 1 <= k < d:
        raise InvalidRange(f"need 1 <= k < d, got d={d}, k={k}")
    vol_k = math.prod(math.pi ** (i / 2) / math.gamma(i / 2 + 1) for i in range(1, d))
    vol_x = math.prod(zeta(j) for j in range(2, d + 1))
    c = 1.0 / math.prod(zeta(j) for j in range(d - k + 1, d + 1))
    return vol_k, vol_x, c


# ---------------------------------------------------------------- Iwasawa


@dataclass(frozen=True, eq=False)
class IwasawaCoords:
    k: np.ndarray
    a: np.ndarray
    n: np.ndarray  # unit upper triangular

    def matrix(self) -> np.ndarray:
        return self.k @ np.diag(self.a) @ self.n


def _qr_positive(g):
    Q, R = np.linalg.qr(g)
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    return Q * s, s[:, None] * R


def iwasawa_decompose(g) -> IwasawaCoords:
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise NotUnimodular("expected a square matrix")
    det = np.linalg.det(g)
    if abs(det - 1.0) > 1e-8:
        raise NotUnimodular(f"det = {det:.12g}, expected 1")
    Q, R = _qr_positive(g)
    a = np.diag(R).copy()
    return IwasawaCoords(Q, a, R / a[:, None])


def haar_density(a) -> float:
    """rho(a) = prod_{i<j} a_i / a_j."""
    a = np.asarray(a, dtype=float)
    d = len(a)
    expo = (d - 1) - 2 * np.arange(d)
    return float(np.exp(np.sum(expo * np.log(a))))


@dataclass(frozen=True)
class SiegelSet:
    t: float = 2.0 / math.sqrt(3.0)
    u: float = 0.5

    def __post_init__(self):
        if not (self.t > 0 and self.u > 0):
            raise InvalidRange("Siegel set parameters must be positive")

    @property
    def covering(self) -> bool:
        return self.t >= 2.0 / math.sqrt(3.0) - 1e-15 and self.u >= 0.5

    def contains(self, g, rtol: float = SIGMA_RTOL) -> bool:
        g = np.asarray(g, dtype=float)
        if np.linalg.det(g) <= 0:
            return False
        _, R = _qr_positive(g)
        a = np.diag(R)
        n = R / a[:, None]
        if np.any(a[:-1] > self.t * a[1:] * (1 + rtol)):
            return False
        iu = np.triu_indices(len(a), 1)
        return bool(np.all(np.abs(n[iu]) <= self.u * (1 + rtol)))


def count_siegel_translates(basis, sset: SiegelSet | None = None) -> int:
    """m(g): number of bases g*gamma, gamma in SL(d,Z), lying in the Siegel set.

    Counted modulo the column sign patterns diag(e), prod(e) = 1, which map
    the Siegel set to itself; a deep-cusp point therefore has m = 1.
    """
    sset = sset or SiegelSet()
    cols = basis.columns if isinstance(basis, LatticeBasis) else np.asarray(basis, dtype=float)
    d = cols.shape[0]
    if d > 3:
        raise DimensionTooLarge(f"multiplicity counting supports d <= 3, got {d}")
    if np.linalg.det(cols) <= 0:
        raise ValueError("basis must have positive determinant to be viewed as g in SL(d,R)")
    _, R = _qr_positive(cols)
    budget = enumeration_budget()
    m = _kernels.siegel_multiplicity(R, sset.t, sset.u, SIGMA_RTOL, budget)
    if m < 0:
        raise EnumerationBudgetExceeded(f"multiplicity enumeration exceeded {budget} points")
    return int(m)


# ---------------------------------------------------------------- ensembles


@dataclass(eq=False)
class SampleEnsemble:
    seed: int
    dim: int
    bases: np.ndarray  # (N, d, d), columns are basis vectors
    weights: np.ndarray
    weight_kind: str
    upper: np.ndarray  # (N, d, d) the a*n factor; K-invariant statistics use it
    meta: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.weights)

    @property
    def samples(self):
        return [(LatticeBasis(b), float(w)) for b, w in zip(self.bases, self.weights)]

    def ess(self) -> float:
        w = self.weights
        return float(w.sum() ** 2 / np.sum(w * w))

    def mean(self, values):
        """Self-normalized weighted mean and its delta-method standard error."""
        return weighted_mean(values, self.weights)

    def header(self) -> dict:
        return {
            "type": "header",
            "seed": int(self.seed),
            "dim": int(self.dim),
            "count": self.count,
            "weight_kind": self.weight_kind,
            **self.meta,
        }

    def to_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(json.dumps(self.header()) + "\n")
            for b, w in zip(self.bases, self.weights):
                rec = {"basis": {"dim": self.dim, "columns": b.T.tolist()}, "weight": float(w)}
                fh.write(json.dumps(rec) + "\n")

    @classmethod
    def from_jsonl(cls, path) -> "SampleEnsemble":
        with open(path) as fh:
            lines = [ln for ln in fh if ln.strip()]
        if not lines:
            raise ValueError("empty ensemble file")
        head = json.loads(lines[0])
        if head.get("type") != "header":
            raise ValueError("first line of an ensemble file must be the header")
        bases, weights = [], []
        for ln in lines[1:]:
            rec = json.loads(ln)
            bases.append(LatticeBasis.from_json(rec["basis"]).columns)
            weights.append(float(rec["weight"]))
        bases = np.array(bases)
        upper = np.array([_qr_positive(b)[1] for b in bases])
        meta = {k: v for k, v in head.items() if k not in ("type", "seed", "dim", "count", "weight_kind")}
        return cls(head["seed"], head["dim"], bases, np.array(weights), head["weight_kind"], upper, meta)


def weighted_mean(values, weights):
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    sw = w.sum()
    est = float(np.dot(w, v) / sw)
    se = float(math.sqrt(np.sum((w * (v - est)) ** 2)) / sw)
    return est, se


def random_rotations(rng, n: int, d: int) -> np.ndarray:
    """Haar-uniform elements of SO(d): QR of a Gaussian with sign-fixed diagonal."""
    Z = rng.standard_normal((n, d, d))
    Q, R = np.linalg.qr(Z)
    s = np.sign(np.diagonal(R, axis1=1, axis2=2))
    s[s == 0] = 1.0
    Q = Q * s[:, None, :]
    neg = np.linalg.det(Q) < 0
    Q[neg, :, 0] *= -1.0
    return Q


def _exact_d2_block(ss, n):
    rng = np.random.default_rng(ss)
    y_min = math.sqrt(3.0) / 2.0
    xs = np.empty(n)
    ys = np.empty(n)
    got = 0
    tries = 0
    while got < n:
        m = int((n - got) * 1.15) + 16
        # y has density y_min / y^2 on [y_min, Y_MAX]
        uu = rng.uniform(y_min / Y_MAX, 1.0, m)
        y = y_min / uu
        x = rng.uniform(-0.5, 0.5, m)
        keep = x * x + y * y >= 1.0
        tries += m
        take = min(int(keep.sum()), n - got)
        xs[got:got + take] = x[keep][:take]
        ys[got:got + take] = y[keep][:take]
        got += take
    upper = np.zeros((n, 2, 2))
    r = 1.0 / np.sqrt(ys)
    upper[:, 0, 0] = r
    upper[:, 0, 1] = xs * r
    upper[:, 1, 1] = ys * r
    K = random_rotations(rng, n, 2)
    return K @ upper, upper, tries


def sample_exact_d2(count: int, seed: int, block_size: int = BLOCK_SIZE, jobs: int = 1) -> SampleEnsemble:
    parts = run_blocks(_exact_d2_block, seed, count, block_size, jobs)
    bases = np.concatenate([p[0] for p in parts])
    upper = np.concatenate([p[1] for p in parts])
    tries = sum(p[2] for p in parts)
    meta = {
        "sampler": "exact_d2",
        "truncation": {"y_max": Y_MAX},
        "block_size": block_size,
        "acceptance": count / tries,
    }
    return SampleEnsemble(seed, 2, bases, np.ones(count), "exact", upper, meta)


def truncation_bounds(d: int, sset: SiegelSet, mass: float = TRUNC_MASS):
    """Lower bounds on s_k = log(a_k / a_{k+1}) cutting ``mass`` of Haar measure per coordinate."""
    beta = np.array([k * (d - k) for k in range(1, d)], dtype=float)
    return math.log(sset.t) + math.log(mass) / beta


def _siegel_block(ss, n, d, t, u, tilt, mass):
    rng = np.random.default_rng(ss)
    sset = SiegelSet(t, u)
    beta = np.array([k * (d - k) for k in range(1, d)], dtype=float)
    top = math.log(t)
    depth = top - truncation_bounds(d, sset, mass)
    # proposal: exponential of rate tilt*beta below log t, truncated at the depth
    rate = tilt * beta
    cap = -np.expm1(-rate * depth)
    e = -np.log1p(-rng.uniform(size=(n, d - 1)) * cap) / rate
    s = top - e
    logw = -(1.0 - tilt) * np.sum(beta * e, axis=1)
    x = np.zeros((n, d))
    for k in range(1, d):
        x[:, k] = x[:, k - 1] - s[:, k - 1]
    x -= x.mean(axis=1, keepdims=True)
    a = np.exp(x)
    iu = np.triu_indices(d, 1)
    N = np.broadcast_to(np.eye(d), (n, d, d)).copy()
    N[:, iu[0], iu[1]] = rng.uniform(-u, u, size=(n, len(iu[0])))
    upper = a[:, :, None] * N
    K = random_rotations(rng, n, d)
    budget = enumeration_budget()
    m = _kernels.batch_multiplicity(upper, t, u, SIGMA_RTOL, budget)
    if np.any(m < 0):
        raise EnumerationBudgetExceeded(f"multiplicity enumeration exceeded {budget} points")
    if np.any(m == 0):
        raise RuntimeError("a Siegel-set sample was not recognised as lying in the Siegel set")
    w = np.exp(logw) / m
    return K @ upper, upper, w, m


def sample_siegel(
    d: int,
    count: int,
    seed: int,
    sset: SiegelSet | None = None,
    tilt: float = 1.0,
    block_size: int = BLOCK_SIZE,
    jobs: int = 1,
    mass: float = TRUNC_MASS,
) -> SampleEnsemble:
    """Siegel-set importance sampler for d in {2, 3}.

    ``tilt`` in (0, 1] scales the exponential rates of the simple-root
    proposal; tilt < 1 oversamples the cusp (rare small-lambda events) and
    is corrected by importance weights.  tilt = 1 draws exactly from Haar
    measure restricted to the Siegel set, leaving only the 1/m weights.
    """
    sset = sset or SiegelSet()
    if d > 3:
        raise DimensionTooLarge(f"Siegel sampler supports d <= 3, got {d}")
    if d < 2:
        raise InvalidRange("Siegel sampler needs d >= 2")
    if not 0.0 < tilt <= 1.0:
        raise InvalidRange("tilt must lie in (0, 1]")
    if not sset.covering:
        raise InvalidRange("Siegel set must satisfy t >= 2/sqrt(3), u >= 1/2 to cover a fundamental domain")
    parts = run_blocks(_siegel_block, seed, count, block_size, jobs, (d, sset.t, sset.u, tilt, mass))
    bases = np.concatenate([p[0] for p in parts])
    upper = np.concatenate([p[1] for p in parts])
    w = np.concatenate([p[2] for p in parts])
    mult = np.concatenate([p[3] for p in parts])
    lows = truncation_bounds(d, sset, mass)
    meta = {
        "sampler": "siegel",
        "sigma": {"t": sset.t, "u": sset.u},
        "tilt": tilt,
        "truncation": {
            "s_min": [float(v) for v in lows],
            "s_max": math.log(sset.t),
            "mass_per_coordinate": mass,
        },
        "block_size": block_size,
        "multiplicity_histogram": np.bincount(mult).tolist(),
    }
    return SampleEnsemble(seed, d, bases, w, "importance", upper, meta)


def draw_haar_basis(d: int, rng, sset: SiegelSet | None = None) -> np.ndarray:
    """One exact Haar-random unimodular basis (d = 2 or 3).

    d = 2 uses the fundamental-domain sampler; d = 3 draws from the Siegel
    set with the exact density and accepts with probability 1/m(g).
    """
    if d == 2:
        ss = np.random.SeedSequence(int(rng.integers(2**63)))
        return _exact_d2_block(ss, 1)[0][0]
    if d != 3:
        raise DimensionTooLarge("Haar draws are available for d in {2, 3}")
    sset = sset or SiegelSet()
    while True:
        ss = np.random.SeedSequence(int(rng.integers(2**63)))
        B, _, w, m = _siegel_block(ss, 1, d, sset.t, sset.u, 1.0, TRUNC_MASS)
        if rng.uniform() * m[0] < 1.0:
            return B[0]
