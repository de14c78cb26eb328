"""Exact integer matrix helpers (Python ints, no overflow).

Matrices are plain nested lists or integer numpy arrays; everything is
converted to lists of Python ints before arithmetic.
"""

import numpy as np


def _as_rows(m):
    return [[int(x) for x in row] for row in np.asarray(m).tolist()]


def int_det(m):
    """Exact determinant of a square integer matrix (Bareiss elimination)."""
    a = _as_rows(m)
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def hermite_completion(cols):
    """Row-reduce a d x k integer matrix with unimodular row operations.

    Returns ``(U, H)`` with ``U`` a d x d unimodular integer matrix and ``H``
    a k x k upper-triangular matrix with positive diagonal such that
    ``cols == U[:, :k] @ H``. The first k columns of ``U`` are a basis of the
    saturation (span_R(cols) intersected with Z^d) and the remaining columns
    complete it to a basis of Z^d.
    """
    m = _as_rows(cols)
    d = len(m)
    k = len(m[0]) if d else 0
    # u is tracked as a list of columns so that column operations are cheap
    u = [[1 if i == j else 0 for i in range(d)] for j in range(d)]

    def swap_rows(a, b):
        m[a], m[b] = m[b], m[a]
        u[a], u[b] = u[b], u[a]

    for j in range(k):
        while True:
            piv = None
            for r in range(j, d):
                if m[r][j] != 0 and (piv is None or abs(m[r][j]) < abs(m[piv][j])):
                    piv = r
            if piv is None:
                raise ValueError("columns are linearly dependent")
            if piv != j:
                swap_rows(piv, j)
            done = True
            for r in range(j + 1, d):
                if m[r][j] != 0:
                    q = m[r][j] // m[j][j]
                    # row_r -= q * row_j  <=>  col_j(U) += q * col_r(U)
                    m[r] = [x - q * y for x, y in zip(m[r], m[j])]
                    u[j] = [x + q * y for x, y in zip(u[j], u[r])]
                    if m[r][j] != 0:
                        done = False
            if done:
                break
        if m[j][j] < 0:
            m[j] = [-x for x in m[j]]
            u[j] = [-x for x in u[j]]
    U = np.array([[u[c][r] for c in range(d)] for r in range(d)], dtype=object)
    H = np.array([row[:k] for row in m[:k]], dtype=object)
    return U, H


def is_primitive_tuple(cols):
    """True iff the integer columns extend to a basis of Z^d.

    Equivalent to all elementary divisors of the d x k matrix being 1.
    """
    cols = np.asarray(cols)
    if cols.ndim == 1:
        return _gcd_all(cols) == 1
    try:
        _, H = hermite_completion(cols)
    except ValueError:
        return False
    det = 1
    for i in range(H.shape[0]):
        det *= int(H[i, i])
    return det == 1


def _gcd_all(v):
    from math import gcd

    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g


def elementary_divisors(m):
    """Smith normal form diagonal of an integer matrix (small sizes only)."""
    a = _as_rows(m)
    rows = len(a)
    cols = len(a[0]) if rows else 0
    out = []
    for t in range(min(rows, cols)):
        # bring the smallest nonzero entry of the trailing block to (t, t)
        while True:
            best = None
            for i in range(t, rows):
                for j in range(t, cols):
                    if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return out + [0] * (min(rows, cols) - t)
            i, j = best
            a[t], a[i] = a[i], a[t]
            for row in a:
                row[t], row[j] = row[j], row[t]
            p = a[t][t]
            clean = True
            for i in range(t + 1, rows):
                q = a[i][t] // p
                a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                if a[i][t] != 0:
                    clean = False
            for j in range(t + 1, cols):
                q = a[t][j] // p
                for row in a:
                    row[j] -= q * row[t]
                if a[t][j] != 0:
                    clean = False
            if not clean:
                continue
            bad = None
            for i in range(t + 1, rows):
                for j in range(t + 1, cols):
                    if a[i][j] % p != 0:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            a[t] = [x + y for x, y in zip(a[t], a[bad])]
        out.append(abs(a[t][t]))
    return out
