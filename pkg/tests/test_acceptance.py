"""The eleven acceptance criteria, each at its stated tolerance and runtime limit.

Every test records one PASS/FAIL line (printed in the pytest terminal
summary and immediately on stdout) before asserting.  Run alone with
``pytest tests/test_acceptance.py -s`` or ``python3 tests/test_acceptance.py``.
"""

import math
import time

import mpmath
import numpy as np
import pytest

from conftest import ACCEPTANCE
from helpers import SQ3, Z5PLUS, oracle_fixture, random_fixture
from minklab import (
    FlowSpec,
    borel_cantelli_upper_check,
    brute_force_minima,
    dual,
    estimate_phi,
    minima_attaining_basis_search,
    project_off_shortest,
    quasi_minimal_basis,
    sample_siegel,
    siegel_mc_check,
    siegel_set_box_measure,
    successive_minima,
    volume_constants,
)
from minklab.flows import haar_bases, hitting_time_experiment, log_law_experiment
from minklab.intmat import int_det
from minklab.reduction import minkowski_window, quasi_constant

pytestmark = pytest.mark.slow
DELTAS = [0.05, 0.065, 0.085, 0.11, 0.14, 0.18, 0.23, 0.3]


def record(n, ok, detail, elapsed, limit):
    ok = bool(ok) and elapsed < limit
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {detail} [{elapsed:.1f}s, limit {limit:g}s]"
    ACCEPTANCE[n] = line
    print(line, flush=True)
    assert ok, line


def fixtures(seed, dims, per_dim):
    rng = np.random.default_rng(seed)
    return [random_fixture(rng, d) for d in dims for _ in range(per_dim)]


def test_criterion_01_attaining_basis():
    t0 = time.perf_counter()
    found = 0
    for B in fixtures(101, (2, 3, 4), 100):
        vecs = minima_attaining_basis_search(B)
        lam = successive_minima(B).values
        if vecs is not None:
            M = np.array([v.coeffs for v in vecs]).T
            ok = abs(int_det(M)) == 1 and np.allclose([v.norm for v in vecs], lam, rtol=1e-9)
            found += ok
    none_on_z5 = minima_attaining_basis_search(Z5PLUS) is None
    elapsed = time.perf_counter() - t0
    record(1, found == 300 and none_on_z5, f"attaining basis found on {found}/300, d=5 example -> none: {none_on_z5}", elapsed, 120)


def test_criterion_02_projection_and_quasi_minimal():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    worst_proj, worst_cov, worst_ratio, ratio1 = np.inf, 0.0, 0.0, 0.0
    ok = True
    for B in fixtures(102, (2, 3, 4), 67)[:200]:
        d = B.shape[0]
        step = project_off_shortest(B)
        lam1 = step.shortest.norm
        for _ in range(20):
            p = np.linalg.norm(step.project(B @ rng.integers(-4, 5, size=d)))
            if p > 1e-9:
                worst_proj = min(worst_proj, p - SQ3 / 2 * lam1)
        cov = abs(step.projected_basis.covolume * lam1 / abs(np.linalg.det(B)) - 1)
        worst_cov = max(worst_cov, cov)
        q = quasi_minimal_basis(B)
        C = quasi_constant(d)
        ok &= abs(int_det(q.coefficient_matrix())) == 1
        ok &= bool(np.all(q.ratios >= 1 / C) and np.all(q.ratios <= C))
        worst_ratio = max(worst_ratio, float(np.max(q.ratios)) / C)
        ratio1 = max(ratio1, abs(q.ratios[0] - 1))
    ok &= worst_proj >= -1e-9 and worst_cov <= 1e-8 and ratio1 <= 1e-9
    detail = (
        f"min(|pi v| - sqrt3/2 lam1) = {worst_proj:.3g}, covolume rel err {worst_cov:.2g}, "
        f"max ratio / C(d) = {worst_ratio:.3f}, |ratios[1] - 1| = {ratio1:.2g}"
    )
    record(2, ok, detail, time.perf_counter() - t0, 60)


def test_criterion_03_minkowski_second():
    t0 = time.perf_counter()
    lo_marg, hi_marg = np.inf, np.inf
    for B in fixtures(101, (2, 3, 4), 100) + fixtures(102, (2, 3, 4), 67):
        lo, hi = minkowski_window(B.shape[0])
        r = np.prod(successive_minima(B).values) / abs(np.linalg.det(B))
        lo_marg = min(lo_marg, r / lo)
        hi_marg = min(hi_marg, hi / r)
    ok = lo_marg >= 1 - 1e-9 and hi_marg >= 1 - 1e-9
    record(3, ok, f"min ratio/lower = {lo_marg:.3f}, min upper/ratio = {hi_marg:.3f} on 501 fixtures", time.perf_counter() - t0, 60)


def test_criterion_04_duality():
    t0 = time.perf_counter()
    lo, hi = np.inf, 0.0
    ok = True
    for d in (2, 3):
        for B in haar_bases(d, 500, seed=404):
            prod = successive_minima(B).values * successive_minima(dual(B)).values[::-1]
            ok &= bool(np.all(prod >= 1 - 1e-9) and np.all(prod <= math.factorial(d) + 1e-9))
            lo, hi = min(lo, prod.min()), max(hi, prod.max() / math.factorial(d))
    record(4, ok, f"min product {lo:.4f}, max product / d! {hi:.4f} over 2x500 Haar samples", time.perf_counter() - t0, 120)


def test_criterion_05_classical_siegel():
    t0 = time.perf_counter()
    parts, ok = [], True
    for r in (0.3, 0.5):
        ex = siegel_mc_check(2, 1, r, 100000, 505, sampler="exact").extras
        si = siegel_mc_check(2, 1, r, 100000, 506, sampler="siegel").extras
        cross = abs(ex["left"] - si["left"]) / math.hypot(ex["stderr"], si["stderr"])
        ok &= abs(ex["z"]) <= 3 and abs(si["z"]) <= 3 and cross <= 3
        parts.append(f"r={r}: z_exact={ex['z']:+.2f} z_siegel={si['z']:+.2f} cross={cross:.2f}")
    record(5, ok, "; ".join(parts), time.perf_counter() - t0, 300)


def test_criterion_06_generalized_siegel():
    t0 = time.perf_counter()
    ens = sample_siegel(3, 200000, 606, tilt=0.5)
    parts, ok = [], True
    for k in (1, 2):
        ex = siegel_mc_check(3, k, 0.4, ens.count, 606, ensemble=ens).extras
        ok &= abs(ex["z"]) <= 3
        parts.append(f"k={k}: left {ex['left']:.5g} right {ex['right']:.5g} z={ex['z']:+.2f}")
    record(6, ok, "; ".join(parts), time.perf_counter() - t0, 900)


def test_criterion_07_phi_exponents():
    t0 = time.perf_counter()
    parts, ok = [], True
    for d, i, count, tol in [(2, 1, 200000, 0.15), (3, 1, 200000, 0.25)]:
        rep = estimate_phi(d, i, DELTAS, count, 707)
        good = rep.fitted_exponent is not None and abs(rep.fitted_exponent - d * i) <= tol
        ok &= good
        parts.append(f"d{d}i{i}: {rep.fitted_exponent:.3f} (want {d * i}+-{tol})")
    t1 = time.perf_counter()
    rep = estimate_phi(3, 2, DELTAS, 1000000, 707)
    long_run = time.perf_counter() - t1
    ok &= rep.fitted_exponent is not None and abs(rep.fitted_exponent - 6) <= 0.5 and long_run < 1800
    parts.append(f"d3i2: {rep.fitted_exponent:.3f} (want 6+-0.5, {long_run:.0f}s of 1800s)")
    record(7, ok, "; ".join(parts), time.perf_counter() - t0, 1800 + 600)


def test_criterion_08_box_measure():
    t0 = time.perf_counter()
    parts, ok = [], True
    for d in (2, 3):
        i = d - 1
        ratio = siegel_set_box_measure(d, i, 0.05) / siegel_set_box_measure(d, i, 0.025)
        expo = math.log2(ratio)
        want = (2 * d - i - 1) * i
        ok &= abs(expo / want - 1) <= 0.02
        parts.append(f"d={d}: exponent {expo:.6f} (want {want})")
    record(8, ok, "; ".join(parts), time.perf_counter() - t0, 60)


def test_criterion_09_log_laws():
    t0 = time.perf_counter()
    spec = FlowSpec("diagonal", [1.0, -1.0])
    _, frac = log_law_experiment(spec, 2, 1, 1e4, 50, seed=909)
    bc = borel_cantelli_upper_check(spec, 2, 1, 0.5, 50, seed=909)
    mono = bc.extras["nonincreasing_fraction"]
    viol = bc.grid[-1][1]
    hit = hitting_time_experiment(spec, 2, 1, seeds=100, seed=909)
    slope = hit.fitted_exponent
    ok = frac >= 0.8 and mono >= 0.8 and viol <= 0.05 and abs(slope - 2) <= 0.6
    detail = (
        f"in band [0.25,0.75]: {frac:.0%} of 50; BC nonincreasing {mono:.0%}, violation at 1e4 {viol:.3f}; "
        f"hitting slope {slope:.3f} (want 2+-0.6)"
    )
    record(9, ok, detail, time.perf_counter() - t0, 1200)


def test_criterion_10_constants():
    t0 = time.perf_counter()
    _, vx2, c2 = volume_constants(2, 1)
    vk3, vx3, c3 = volume_constants(3, 2)
    elapsed = time.perf_counter() - t0
    z2, z3 = mpmath.zeta(2), mpmath.zeta(3)
    ref_k3 = mpmath.pi ** mpmath.mpf(0.5) / mpmath.gamma(1.5) * mpmath.pi / mpmath.gamma(2)
    errs = [
        abs(c2 - 6 / math.pi**2),
        abs(vx2 - float(z2)),
        abs(vx3 - float(z2 * z3)),
        abs(c3 - float(1 / (z2 * z3))),
        abs(vk3 - float(ref_k3)),
    ]
    record(10, max(errs) <= 1e-10, f"max abs error {max(errs):.2g} (1/zeta(2), zeta(2)zeta(3), Vol(K))", elapsed, 1)


def test_criterion_11_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1111)
    worst = 0.0
    for j in range(200):
        B = oracle_fixture(rng, (2, 3, 4)[j % 3])
        worst = max(worst, float(np.max(np.abs(successive_minima(B).values - brute_force_minima(B, 6).values))))
    record(11, worst <= 1e-7, f"max |enumeration - brute force| = {worst:.2g} on 200 fixtures", time.perf_counter() - t0, 120)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
