"""Compiled inner loops: LLL on a column range and Fincke-Pohst enumeration.

Bases are d x d float64 arrays whose *columns* are the lattice vectors.
Enumeration works on the upper-triangular factor R of B = QR (positive
diagonal), so ||B c||^2 = ||R c||^2.
"""

import math

import numpy as np
from numba import njit

LLL_DELTA = 0.99


@njit(cache=True)
def _gso(B):
    d = B.shape[1]
    n = B.shape[0]
    bstar = np.zeros((n, d))
    mu = np.zeros((d, d))
    bn = np.zeros(d)
    for i in range(d):
        v = B[:, i].copy()
        for j in range(i):
            if bn[j] > 0.0:
                m = 0.0
                for r in range(n):
                    m += B[r, i] * bstar[r, j]
                m /= bn[j]
                mu[i, j] = m
                for r in range(n):
                    v[r] -= m * bstar[r, j]
        bstar[:, i] = v
        s = 0.0
        for r in range(n):
            s += v[r] * v[r]
        bn[i] = s
    return mu, bn


@njit(cache=True)
def lll_range(B, U, lo, hi):
    """In-place LLL on columns lo..hi-1 of B, size-reducing against all earlier columns.

    Columns before ``lo`` are never moved, so span(B[:, :lo]) is preserved.
    U accumulates the same integer column operations.
    """
    n = B.shape[0]
    k = lo
    guard = 0
    while k < hi:
        guard += 1
        if guard > 100000:
            break
        mu, bn = _gso(B)
        for j in range(k - 1, -1, -1):
            q = math.floor(mu[k, j] + 0.5)
            if q != 0.0:
                iq = np.int64(q)
                for r in range(n):
                    B[r, k] -= q * B[r, j]
                for r in range(U.shape[0]):
                    U[r, k] -= iq * U[r, j]
                for i in range(j):
                    mu[k, i] -= q * mu[j, i]
                mu[k, j] -= q
        if k > lo:
            # recompute the projected norm of b_k after size reduction
            mu, bn = _gso(B)
            if bn[k] < (LLL_DELTA - mu[k, k - 1] ** 2) * bn[k - 1]:
                for r in range(n):
                    tmp = B[r, k]
                    B[r, k] = B[r, k - 1]
                    B[r, k - 1] = tmp
                for r in range(U.shape[0]):
                    itmp = U[r, k]
                    U[r, k] = U[r, k - 1]
                    U[r, k - 1] = itmp
                k -= 1
                continue
        k += 1


@njit(cache=True)
def upper_factor(B):
    """R factor of B = QR with positive diagonal.

    Householder QR rather than Cholesky of B^T B, which would square the
    condition number of cusp bases.
    """
    _, R = np.linalg.qr(B)
    d = R.shape[0]
    for i in range(d):
        if R[i, i] < 0.0:
            for j in range(d):
                R[i, j] = -R[i, j]
    return R


@njit(cache=True)
def enumerate_ball(R, radius2, budget):
    """All nonzero integer c with ||R c||^2 <= radius2 (tiny relative slack).

    Returns (coeffs, norms2, ok); ok is False when more than ``budget``
    points were found, in which case the output is truncated.
    """
    d = R.shape[0]
    r2 = radius2 * (1.0 + 1e-12) + 1e-300
    cap = 64
    out = np.zeros((cap, d), dtype=np.int64)
    out_n = np.zeros(cap)
    cnt = 0
    c = np.zeros(d, dtype=np.int64)
    hi = np.zeros(d, dtype=np.int64)
    ctr = np.zeros(d)
    partial = np.zeros(d + 1)
    k = d - 1
    w = math.sqrt(r2) / R[k, k]
    c[k] = np.int64(math.ceil(-w))
    hi[k] = np.int64(math.floor(w))
    while True:
        if c[k] > hi[k]:
            k += 1
            if k >= d:
                break
            c[k] += 1
            continue
        y = (c[k] - ctr[k]) * R[k, k]
        p = partial[k + 1] + y * y
        if p > r2:
            c[k] += 1
            continue
        if k == 0:
            nz = False
            for j in range(d):
                if c[j] != 0:
                    nz = True
                    break
            if nz:
                if cnt >= budget:
                    return out[:cnt], out_n[:cnt], False
                if cnt >= cap:
                    cap *= 2
                    tmp = np.zeros((cap, d), dtype=np.int64)
                    tmp[:cnt] = out[:cnt]
                    out = tmp
                    tmpn = np.zeros(cap)
                    tmpn[:cnt] = out_n[:cnt]
                    out_n = tmpn
                out[cnt] = c
                out_n[cnt] = p
                cnt += 1
            c[0] += 1
            continue
        partial[k] = p
        k -= 1
        s = 0.0
        for j in range(k + 1, d):
            s += R[k, j] * c[j]
        ctr[k] = -s / R[k, k]
        rem = r2 - p
        if rem < 0.0:
            rem = 0.0
        w = math.sqrt(rem) / R[k, k]
        c[k] = np.int64(math.ceil(ctr[k] - w))
        hi[k] = np.int64(math.floor(ctr[k] + w))
    return out[:cnt], out_n[:cnt], True


@njit(cache=True)
def shortest_outside(R, k0, radius2, rel_tol, abs_tol):
    """Shortest vectors R c whose tail c[k0:] is nonzero.

    Columns 0..k0-1 of the underlying basis span the excluded subspace.
    The search radius shrinks to the best norm found, widened to
    (norm * (1 + rel_tol) + abs_tol)^2, and every point within that final
    bound is returned so the caller can break ties.  ``radius2`` must be a
    valid upper bound (e.g. the squared norm of one admissible basis column).
    """
    d = R.shape[0]
    best = radius2
    r2 = (math.sqrt(radius2) * (1.0 + rel_tol) + abs_tol) ** 2 * (1.0 + 1e-12)
    cap = 16
    out = np.zeros((cap, d), dtype=np.int64)
    out_n = np.zeros(cap)
    cnt = 0
    c = np.zeros(d, dtype=np.int64)
    hi = np.zeros(d, dtype=np.int64)
    ctr = np.zeros(d)
    partial = np.zeros(d + 1)
    k = d - 1
    w = math.sqrt(r2) / R[k, k]
    c[k] = np.int64(math.ceil(-w))
    hi[k] = np.int64(math.floor(w))
    while True:
        if c[k] > hi[k]:
            k += 1
            if k >= d:
                break
            c[k] += 1
            continue
        y = (c[k] - ctr[k]) * R[k, k]
        p = partial[k + 1] + y * y
        if p > r2:
            c[k] += 1
            continue
        if k == k0 or (k0 == 0 and k == 0):
            tail_nz = False
            for j in range(k0, d):
                if c[j] != 0:
                    tail_nz = True
                    break
            if not tail_nz:
                c[k] += 1
                continue
        if k == 0:
            if p < best:
                best = p
                r2 = (math.sqrt(best) * (1.0 + rel_tol) + abs_tol) ** 2
            if cnt >= cap:
                cap *= 2
                tmp = np.zeros((cap, d), dtype=np.int64)
                tmp[:cnt] = out[:cnt]
                out = tmp
                tmpn = np.zeros(cap)
                tmpn[:cnt] = out_n[:cnt]
                out_n = tmpn
            out[cnt] = c
            out_n[cnt] = p
            cnt += 1
            c[0] += 1
            continue
        partial[k] = p
        k -= 1
        s = 0.0
        for j in range(k + 1, d):
            s += R[k, j] * c[j]
        ctr[k] = -s / R[k, k]
        rem = r2 - p
        if rem < 0.0:
            rem = 0.0
        w = math.sqrt(rem) / R[k, k]
        c[k] = np.int64(math.ceil(ctr[k] - w))
        hi[k] = np.int64(math.floor(ctr[k] + w))
    keep = 0
    final = (math.sqrt(best) * (1.0 + rel_tol) + abs_tol) ** 2
    for i in range(cnt):
        if out_n[i] <= final:
            out[keep] = out[i]
            out_n[keep] = out_n[i]
            keep += 1
    return out[:keep], out_n[:keep], best


@njit(cache=True)
def hermite_int(cols):
    """int64 port of intmat.hermite_completion; returns only U.

    The first k columns of U span the saturation of the column span of
    ``cols`` and U is unimodular.  Entries stay small for the reduced bases
    this is used on.
    """
    d = cols.shape[0]
    k = cols.shape[1]
    m = cols.copy()
    U = np.eye(d, dtype=np.int64)
    for j in range(k):
        while True:
            piv = -1
            for r in range(j, d):
                if m[r, j] != 0 and (piv < 0 or abs(m[r, j]) < abs(m[piv, j])):
                    piv = r
            if piv < 0:
                return U
            if piv != j:
                for c in range(k):
                    tmp = m[piv, c]
                    m[piv, c] = m[j, c]
                    m[j, c] = tmp
                for r in range(d):
                    tmp = U[r, piv]
                    U[r, piv] = U[r, j]
                    U[r, j] = tmp
            done = True
            for r in range(j + 1, d):
                if m[r, j] != 0:
                    q = m[r, j] // m[j, j]
                    for c in range(k):
                        m[r, c] -= q * m[j, c]
                    for s in range(d):
                        U[s, j] += q * U[s, r]
                    if m[r, j] != 0:
                        done = False
            if done:
                break
        if m[j, j] < 0:
            for c in range(k):
                m[j, c] = -m[j, c]
            for s in range(d):
                U[s, j] = -U[s, j]
    return U


@njit(cache=True)
def minima_values_nb(B):
    """Successive minima values of the column basis B (no tie-breaking)."""
    d = B.shape[0]
    Bred = B.copy()
    U = np.eye(d, dtype=np.int64)
    lll_range(Bred, U, 0, d)
    chosen = np.zeros((d, d), dtype=np.int64)
    vals = np.zeros(d)
    for k in range(d):
        if k == 0:
            Bk = Bred.copy()
            W = np.eye(d, dtype=np.int64)
        else:
            W = hermite_int(chosen[:, :k].copy())
            Bk = Bred @ W.astype(np.float64)
            lll_range(Bk, W, 0, k)
            lll_range(Bk, W, k, d)
        R = upper_factor(Bk)
        init = np.inf
        for l in range(k, d):
            s = 0.0
            for r in range(d):
                s += Bk[r, l] * Bk[r, l]
            if s < init:
                init = s
        cands, n2, best = shortest_outside(R, k, init, 0.0, 0.0)
        idx = 0
        for i in range(1, n2.shape[0]):
            if n2[i] < n2[idx]:
                idx = i
        for r in range(d):
            acc = 0
            for c in range(d):
                acc += W[r, c] * cands[idx, c]
            chosen[r, k] = acc
        vals[k] = math.sqrt(n2[idx])
    return vals


@njit(cache=True)
def batch_minima(bases):
    n = bases.shape[0]
    d = bases.shape[1]
    out = np.zeros((n, d))
    for s in range(n):
        out[s] = minima_values_nb(np.ascontiguousarray(bases[s]))
    return out


@njit(cache=True)
def _gcd_vec(c):
    g = 0
    for x in c:
        a = abs(x)
        while a:
            g, a = a, g % a
    return g


@njit(cache=True)
def siegel_multiplicity(Rg, t, u, rtol, budget):
    """Number of bases B' = B gamma (gamma in SL(d,Z)) lying in Sigma_{t,u}.

    Column j of such a basis has Gram-Schmidt norm a'_j at most
    t^(d-1-j) lambda_1 of the lattice projected off the first j columns, so
    each level enumerates primitive vectors of that projected lattice and
    lifts them by every integer shift keeping |mu| <= u.  Returns -1 when an
    enumeration exceeds ``budget`` points.  Bases differing by a column sign
    pattern diag(e), prod(e) = 1, are counted once: that group of order
    2^(d-1) maps Sigma to itself and acts freely.
    """
    d = Rg.shape[0]
    stackC = [Rg.copy()]
    stackJ = [0]
    stackA = [0.0]
    count = 0
    dummy = np.eye(d, dtype=np.int64)
    while len(stackC) > 0:
        C = stackC.pop()
        j = stackJ.pop()
        prev = stackA.pop()
        if j == d:
            if np.linalg.det(C) > 0.0:
                count += 1
            continue
        C2 = C.copy()
        lll_range(C2, dummy, j, d)
        Rq = upper_factor(C2)
        m = d - j
        P = Rq[j:, j:].copy()
        minc = np.inf
        for l in range(m):
            s = 0.0
            for r in range(m):
                s += P[r, l] * P[r, l]
            if s < minc:
                minc = s
        rad = t ** (m - 1) * math.sqrt(minc) * (1.0 + rtol)
        cs, n2, ok = enumerate_ball(P, rad * rad, budget)
        if not ok:
            return -1
        lower = prev / t * (1.0 - rtol)
        for idx in range(cs.shape[0]):
            c = cs[idx]
            if _gcd_vec(c) != 1:
                continue
            p = math.sqrt(n2[idx])
            if p < lower:
                continue
            w0 = np.ascontiguousarray(Rq[:, j:]) @ c.astype(np.float64)
            v0 = np.ascontiguousarray(C2[:, j:]) @ c.astype(np.float64)
            lw = np.zeros((1, d))
            lv = np.zeros((1, d))
            lw[0] = w0
            lv[0] = v0
            for l in range(j - 1, -1, -1):
                nw = np.zeros((0, d))
                nv = np.zeros((0, d))
                for q in range(lw.shape[0]):
                    mu = lw[q, l] / Rq[l, l]
                    lo = math.ceil(mu - u * (1.0 + rtol))
                    hi = math.floor(mu + u * (1.0 + rtol))
                    for nint in range(np.int64(lo), np.int64(hi) + 1):
                        aw = np.zeros((1, d))
                        av = np.zeros((1, d))
                        aw[0] = lw[q] - nint * Rq[:, l]
                        av[0] = lv[q] - nint * C2[:, l]
                        nw = np.concatenate((nw, aw))
                        nv = np.concatenate((nv, av))
                lw = nw
                lv = nv
            M = hermite_int(c.reshape(m, 1).copy())
            T = np.ascontiguousarray(C2[:, j:]) @ M.astype(np.float64)
            for q in range(lv.shape[0]):
                newC = C2.copy()
                newC[:, j:] = T
                newC[:, j] = lv[q]
                stackC.append(newC)
                stackJ.append(j + 1)
                stackA.append(p)
    return count // (2 ** (d - 1))


@njit(cache=True)
def batch_multiplicity(uppers, t, u, rtol, budget):
    n = uppers.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for s in range(n):
        out[s] = siegel_multiplicity(np.ascontiguousarray(uppers[s]), t, u, rtol, budget)
    return out


@njit(cache=True)
def _minor_gcd(C, idx, k, combos):
    """gcd of the k x k minors of the d x k matrix with columns C[idx[0..k-1]]."""
    g = 0
    for ci in range(combos.shape[0]):
        rows = combos[ci]
        if k == 1:
            det = C[idx[0], rows[0]]
        elif k == 2:
            det = (C[idx[0], rows[0]] * C[idx[1], rows[1]]
                   - C[idx[0], rows[1]] * C[idx[1], rows[0]])
        else:
            a = C[idx[0]]
            b = C[idx[1]]
            e = C[idx[2]]
            r0 = rows[0]
            r1 = rows[1]
            r2 = rows[2]
            det = (a[r0] * (b[r1] * e[r2] - b[r2] * e[r1])
                   - b[r0] * (a[r1] * e[r2] - a[r2] * e[r1])
                   + e[r0] * (a[r1] * b[r2] - a[r2] * b[r1]))
        x = abs(det)
        while x:
            g, x = x, g % x
        if g == 1:
            return 1
    return g


@njit(cache=True)
def count_primitive_tuples(C, k, combos):
    """Ordered k-tuples (k <= 3) of rows of C forming a primitive tuple.

    A tuple is primitive iff the gcd of its maximal minors is 1.  Unordered
    sets are counted once and multiplied by k!.
    """
    n = C.shape[0]
    idx = np.zeros(3, dtype=np.int64)
    total = 0
    if k == 1:
        for a in range(n):
            idx[0] = a
            if _minor_gcd(C, idx, 1, combos) == 1:
                total += 1
        return total
    if k == 2:
        for a in range(n):
            for b in range(a + 1, n):
                idx[0] = a
                idx[1] = b
                if _minor_gcd(C, idx, 2, combos) == 1:
                    total += 2
        return total
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                idx[0] = a
                idx[1] = b
                idx[2] = c
                if _minor_gcd(C, idx, 3, combos) == 1:
                    total += 6
    return total


@njit(cache=True)
def batch_f_hat(uppers, k, radius, combos, budget):
    """f-hat^k for indicator of B(0, radius)^k on each upper-triangular basis.

    Returns -1 entries where the point enumeration exceeds ``budget``.
    """
    n = uppers.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for s in range(n):
        R = np.ascontiguousarray(uppers[s])
        cs, n2, ok = enumerate_ball(R, radius * radius, budget)
        if not ok:
            out[s] = -1
        else:
            out[s] = count_primitive_tuples(cs, k, combos)
    return out


@njit(cache=True)
def _step_matrix(kind, gen, dt):
    d = gen.shape[0]
    if kind == 0:
        M = np.zeros((d, d))
        for i in range(d):
            M[i, i] = math.exp(gen[i, i] * dt)
        return M
    M = np.eye(d)
    term = np.eye(d)
    for p in range(1, d):
        term = term @ (gen * dt) / p
        M = M + term
    return M


@njit(cache=True)
def orbit_minima(B0, kind, gen, times, step, col):
    """lambda_col along a pseudo-orbit of the flow, sampled at sorted ``times``.

    The basis is advanced in increments of at most ``step``, renormalized
    to its initial covolume and LLL-reduced after every increment; exact
    double-precision transport of exp(t z) to large t is impossible.
    """
    d = B0.shape[0]
    B = B0.copy()
    U = np.eye(d, dtype=np.int64)
    lll_range(B, U, 0, d)
    cov0 = abs(np.linalg.det(B))
    out = np.zeros(times.shape[0])
    t = 0.0
    for n in range(times.shape[0]):
        target = times[n]
        while t < target:
            dt = min(step, target - t)
            B = _step_matrix(kind, gen, dt) @ B
            scale = (cov0 / abs(np.linalg.det(B))) ** (1.0 / d)
            B = B * scale
            lll_range(B, U, 0, d)
            t += dt
        out[n] = minima_values_nb(B)[col]
    return out


@njit(cache=True)
def orbit_first_hit(B0, kind, gen, col, level, m_max):
    """First integer m in 1..m_max with lambda_col(flow_m B0) <= level, else 0."""
    d = B0.shape[0]
    B = B0.copy()
    U = np.eye(d, dtype=np.int64)
    lll_range(B, U, 0, d)
    cov0 = abs(np.linalg.det(B))
    M = _step_matrix(kind, gen, 1.0)
    for m in range(1, m_max + 1):
        B = M @ B
        scale = (cov0 / abs(np.linalg.det(B))) ** (1.0 / d)
        B = B * scale
        lll_range(B, U, 0, d)
        if minima_values_nb(B)[col] <= level:
            return m
    return 0
