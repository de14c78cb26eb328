"""Property tests for the structural invariants (hypothesis-driven)."""

import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from minklab import (
    FlowSpec,
    apply_flow,
    covolume,
    dual,
    f_hat_k,
    is_unimodular_integer_matrix,
    iwasawa_decompose,
    operator_norm,
    quasi_minimal_basis,
    same_lattice,
    successive_minima,
)
from minklab.intmat import is_primitive_tuple
from minklab.reduction import minkowski_window, quasi_constant

SETTINGS = settings(max_examples=40, deadline=None)
entry = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)


@st.composite
def bases(draw, dims=(2, 3, 4)):
    d = draw(st.sampled_from(dims))
    B = draw(arrays(np.float64, (d, d), elements=entry))
    with np.errstate(all="ignore"):
        assume(abs(np.linalg.det(B)) > 1e-3 and np.linalg.cond(B) < 50)
    return B


@st.composite
def unimodular_bases(draw, dims=(2, 3, 4)):
    B = draw(bases(dims))
    return B / abs(np.linalg.det(B)) ** (1.0 / B.shape[0])


@st.composite
def sl_matrices(draw, d):
    M = draw(arrays(np.float64, (d, d), elements=entry))
    with np.errstate(all="ignore"):
        det = np.linalg.det(M)
        assume(abs(det) > 0.05 and np.linalg.cond(M) < 30)
    if det < 0:
        M[:, 0] *= -1
    return M / abs(det) ** (1.0 / d)


@st.composite
def int_unimodular(draw, d):
    U = np.eye(d, dtype=np.int64)
    ops = st.tuples(st.integers(0, d - 1), st.integers(0, d - 1), st.integers(-2, 2))
    for i, j, c in draw(st.lists(ops, max_size=6)):
        if i != j:
            U[i] += c * U[j]
    return U


def lam(B):
    return successive_minima(B).values


@SETTINGS
@given(bases())
def test_dual_covolume_reciprocal(B):
    assert math.isclose(covolume(dual(B)) * covolume(B), 1.0, rel_tol=1e-9)


@SETTINGS
@given(bases(), st.data())
def test_dual_commutes_with_linear_maps(B, data):
    T = data.draw(sl_matrices(B.shape[0]))
    assert same_lattice(dual(T @ B), np.linalg.inv(T).T @ dual(B).columns)


@SETTINGS
@given(bases(), st.data())
def test_dual_pairing_integral(B, data):
    d = B.shape[0]
    c = np.array(data.draw(st.lists(st.integers(-5, 5), min_size=d, max_size=d)))
    e = np.array(data.draw(st.lists(st.integers(-5, 5), min_size=d, max_size=d)))
    p = float((B @ c) @ (dual(B).columns @ e))
    assert abs(p - round(p)) < 1e-8


@SETTINGS
@given(bases(), st.data())
def test_change_of_basis_is_unimodular(B, data):
    U = data.draw(int_unimodular(B.shape[0]))
    assert is_unimodular_integer_matrix(np.linalg.solve(B, B @ U))
    assert same_lattice(B, B @ U)


@SETTINGS
@given(bases(), st.data())
def test_operator_norm_bound(B, data):
    b = data.draw(sl_matrices(B.shape[0]))
    assert np.all(lam(b @ B) <= operator_norm(b) * lam(B) + 1e-9)


@SETTINGS
@given(bases(), st.data())
def test_continuity(B, data):
    d = B.shape[0]
    E = data.draw(arrays(np.float64, (d, d), elements=st.floats(-1, 1)))
    n = operator_norm(E)
    if n > 0:
        E = E / n
    base = lam(B)
    c = 2 * operator_norm(B) * d
    for eps in (1e-2, 1e-3, 1e-4):
        assert np.all(np.abs(lam((np.eye(d) + eps * E) @ B) - base) <= c * eps)


@SETTINGS
@given(bases(), st.floats(0.1, 10.0))
def test_scaling(B, s):
    assert np.allclose(lam(s * B), s * lam(B), rtol=1e-9)


@SETTINGS
@given(unimodular_bases())
def test_duality_sandwich(B):
    d = B.shape[0]
    prod = lam(B) * lam(dual(B).columns)[::-1]
    assert np.all(prod >= 1 - 1e-9) and np.all(prod <= math.factorial(d) + 1e-9)


@SETTINGS
@given(bases())
def test_minkowski_second_theorem(B):
    lo, hi = minkowski_window(B.shape[0])
    r = np.prod(lam(B)) / covolume(B)
    assert lo - 1e-9 <= r <= hi + 1e-9


@SETTINGS
@given(bases(), st.data())
def test_rotation_invariance(B, data):
    d = B.shape[0]
    Z = data.draw(arrays(np.float64, (d, d), elements=st.floats(-1, 1)))
    with np.errstate(all="ignore"):
        assume(abs(np.linalg.det(Z)) > 0.05)
    Q, _ = np.linalg.qr(Z)
    assert np.allclose(lam(Q @ B), lam(B), rtol=1e-9)


@SETTINGS
@given(bases())
def test_quasi_minimal_envelope(B):
    q = quasi_minimal_basis(B)
    C = quasi_constant(B.shape[0])
    assert abs(q.ratios[0] - 1) < 1e-9
    assert np.all(q.ratios >= 1 / C) and np.all(q.ratios <= C)


@SETTINGS
@given(st.integers(2, 4), st.data())
def test_primitivity_basis_invariant(d, data):
    k = data.draw(st.integers(1, d - 1))
    M = np.array(data.draw(st.lists(st.lists(st.integers(-6, 6), min_size=k, max_size=k), min_size=d, max_size=d)))
    U = data.draw(int_unimodular(d))
    assert is_primitive_tuple(U @ M) == is_primitive_tuple(M)
    if k == 1:
        assert is_primitive_tuple(M) == (math.gcd(*M[:, 0].tolist()) == 1)


@settings(max_examples=20, deadline=None)
@given(unimodular_bases(dims=(2, 3)), st.floats(0.5, 1.5), st.floats(0.0, 0.5))
def test_f_hat_monotone(B, r, dr):
    k = 1
    assert f_hat_k(B, k, r) <= f_hat_k(B, k, r + dr)


@SETTINGS
@given(st.integers(2, 4), st.data())
def test_iwasawa_reconstruction(d, data):
    g = data.draw(sl_matrices(d))
    c = iwasawa_decompose(g)
    assert np.linalg.norm(c.matrix() - g) < 1e-9


@SETTINGS
@given(unimodular_bases(dims=(2, 3)), st.floats(-5.0, 5.0), st.data())
def test_flow_covolume_and_dual_commutation(B, t, data):
    d = B.shape[0]
    z = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=d - 1, max_size=d - 1)))
    z = np.append(z, -z.sum())
    assume(np.max(np.abs(z)) > 1e-3)
    diag = FlowSpec("diagonal", z)
    N = np.triu(data.draw(arrays(np.float64, (d, d), elements=st.floats(-1, 1))), 1)
    for spec in (diag, FlowSpec("unipotent", N)):
        moved = apply_flow(spec, t, B)
        assert math.isclose(moved.covolume, 1.0, rel_tol=1e-8)
        # (g L)* = g^{-T} L*
        assert same_lattice(dual(moved), np.linalg.inv(spec.matrix(t)).T @ dual(B).columns)
