"""Fixtures and independent oracles shared by the test modules."""

import itertools
import math

import numpy as np
import sympy
from sympy.matrices.normalforms import smith_normal_form

SQ3 = math.sqrt(3.0)
HEX = np.array([[1.0, 0.5], [0.0, SQ3 / 2]])
Z5PLUS = np.column_stack([np.eye(5)[:, :4], np.full(5, 0.5)])


def random_fixture(rng, d, cond_max=50.0, spread=2.0):
    """Basis with entries uniform in [-spread, spread] and condition number below cond_max."""
    while True:
        B = rng.uniform(-spread, spread, size=(d, d))
        if np.linalg.cond(B) < cond_max:
            return B


def cramer_box(B, radius):
    """Coefficient bound for all lattice vectors of norm <= radius: |c_i| <= |row_i(B^-1)| radius."""
    return np.linalg.norm(np.linalg.inv(B), axis=1) * radius


def oracle_fixture(rng, d, bound=6):
    """random_fixture whose minimizing coefficients provably fit in the box [-bound, bound]^d.

    lambda_d is at most the longest basis column, so the Cramer bound at that
    radius certifies the box without consulting the code under test.
    """
    while True:
        B = random_fixture(rng, d)
        if np.all(cramer_box(B, np.linalg.norm(B, axis=0).max()) < bound + 1):
            return B


def unimodular(rng, d, steps=6):
    """Random integer matrix of determinant 1 from elementary row operations."""
    U = np.eye(d, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(d, 2, replace=False)
        U[i] += int(rng.integers(-2, 3)) * U[j]
    return U


def sympy_primitive(coeff_cols):
    """Oracle: elementary divisors of the d x k coefficient matrix are all 1."""
    M = sympy.Matrix(np.asarray(coeff_cols, dtype=np.int64).tolist())
    k = M.shape[1]
    S = smith_normal_form(M, domain=sympy.ZZ)
    return all(abs(S[i, i]) == 1 for i in range(k))


def box_points(B, radius, bound):
    rng = range(-bound, bound + 1)
    box = np.array([c for c in itertools.product(rng, repeat=B.shape[0]) if any(c)], dtype=np.int64)
    norms = np.linalg.norm(box.astype(float) @ B.T, axis=1)
    keep = norms <= radius * (1 + 1e-12)
    return box[keep], norms[keep]


def brute_f_hat(B, k, radius):
    """Ordered signed primitive k-tuples of norm <= radius, by box scan and Smith normal form."""
    bound = int(math.floor(cramer_box(B, radius).max())) + 1
    pts, _ = box_points(B, radius, bound)
    return sum(1 for idx in itertools.permutations(range(len(pts)), k) if sympy_primitive(pts[list(idx)].T))


def _in_siegel(stack, t, u, rtol=1e-9):
    Q, R = np.linalg.qr(stack)
    s = np.sign(np.einsum("nii->ni", R))
    R = R * s[:, :, None]
    a = np.einsum("nii->ni", R)
    n = R / a[:, :, None]
    d = stack.shape[1]
    ok = np.all(a[:, :-1] <= t * a[:, 1:] * (1 + rtol), axis=1)
    iu = np.triu_indices(d, 1)
    ok &= np.all(np.abs(n[:, iu[0], iu[1]]) <= u * (1 + rtol), axis=1)
    return ok


def brute_multiplicity(B, bound, t=2 / SQ3, u=0.5):
    """Count gamma in SL(d,Z) with entries in [-bound, bound] and B gamma in the Siegel set, modulo signs."""
    d = B.shape[0]
    vals = range(-bound, bound + 1)
    cols = np.array([c for c in itertools.product(vals, repeat=d) if any(c)], dtype=np.int64)
    count = 0
    if d == 2:
        g = np.stack(np.broadcast_arrays(cols[:, None, :], cols[None, :, :]), axis=-1).reshape(-1, 2, 2)
        g = g[np.round(np.linalg.det(g)).astype(int) == 1]
        count = int(_in_siegel(B @ g, t, u).sum())
    else:
        for c0 in cols:
            pairs = np.stack(np.broadcast_arrays(cols[:, None, :], cols[None, :, :]), axis=-1).reshape(-1, d, 2)
            g = np.concatenate([np.broadcast_to(c0[None, :, None], (len(pairs), d, 1)), pairs], axis=2)
            g = g[np.round(np.linalg.det(g)).astype(int) == 1]
            if len(g):
                count += int(_in_siegel(B @ g, t, u).sum())
    return count // 2 ** (d - 1)
