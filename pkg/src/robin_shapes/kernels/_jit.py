"""Numba-compiled kernels. Same signatures and results as ``_numpy``."""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def p1_triplets(nodes, triangles):
    """Upper-triangle COO triplets of the P1 stiffness and mass matrices.

    Returns ``rows, cols, kvals, mvals, areas``; six entries per triangle
    (three diagonal, three off-diagonal with ``row <= col``).
    """
    nt = triangles.shape[0]
    rows = np.empty(6 * nt, dtype=np.int64)
    cols = np.empty(6 * nt, dtype=np.int64)
    kvals = np.empty(6 * nt)
    mvals = np.empty(6 * nt)
    areas = np.empty(nt)
    b = np.empty(3)
    c = np.empty(3)
    for t in range(nt):
        i0 = triangles[t, 0]
        i1 = triangles[t, 1]
        i2 = triangles[t, 2]
        x0 = nodes[i0, 0]
        y0 = nodes[i0, 1]
        x1 = nodes[i1, 0]
        y1 = nodes[i1, 1]
        x2 = nodes[i2, 0]
        y2 = nodes[i2, 1]
        area = 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))
        areas[t] = area
        b[0] = y1 - y2
        b[1] = y2 - y0
        b[2] = y0 - y1
        c[0] = x2 - x1
        c[1] = x0 - x2
        c[2] = x1 - x0
        ids = (i0, i1, i2)
        pos = 6 * t
        # degenerate triangles get nan stiffness; the caller rejects them by area
        inv = 1.0 / (4.0 * area) if area != 0.0 else math.nan
        for a in range(3):
            for q in range(a, 3):
                ia = ids[a]
                iq = ids[q]
                if ia <= iq:
                    rows[pos] = ia
                    cols[pos] = iq
                else:
                    rows[pos] = iq
                    cols[pos] = ia
                kvals[pos] = (b[a] * b[q] + c[a] * c[q]) * inv
                if a == q:
                    mvals[pos] = area / 6.0
                else:
                    mvals[pos] = area / 12.0
                pos += 1
    return rows, cols, kvals, mvals, areas


@njit(cache=True)
def edge_mass_triplets(nodes, edges):
    """Upper-triangle triplets of the 1D P1 mass matrix on each edge."""
    ne = edges.shape[0]
    rows = np.empty(3 * ne, dtype=np.int64)
    cols = np.empty(3 * ne, dtype=np.int64)
    vals = np.empty(3 * ne)
    for e in range(ne):
        a = edges[e, 0]
        b = edges[e, 1]
        length = math.hypot(nodes[b, 0] - nodes[a, 0], nodes[b, 1] - nodes[a, 1])
        lo = min(a, b)
        hi = max(a, b)
        pos = 3 * e
        rows[pos] = a
        cols[pos] = a
        vals[pos] = length / 3.0
        rows[pos + 1] = lo
        cols[pos + 1] = hi
        vals[pos + 1] = length / 6.0
        rows[pos + 2] = b
        cols[pos + 2] = b
        vals[pos + 2] = length / 3.0
    return rows, cols, vals


@njit(cache=True)
def cholesky_lower(a):
    """Dense Cholesky ``a = L L^T``; returns ``(L, ok)``."""
    n = a.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        s = a[j, j]
        for p in range(j):
            s -= L[j, p] * L[j, p]
        if not s > 0.0:
            return L, False
        d = math.sqrt(s)
        L[j, j] = d
        for i in range(j + 1, n):
            s = a[i, j]
            for p in range(j):
                s -= L[i, p] * L[j, p]
            L[i, j] = s / d
    return L, True


@njit(cache=True)
def lower_solve(L, rhs):
    """Forward substitution ``L X = rhs`` for a matrix right-hand side."""
    n, m = rhs.shape
    x = np.empty((n, m))
    for col in range(m):
        for i in range(n):
            s = rhs[i, col]
            for p in range(i):
                s -= L[i, p] * x[p, col]
            x[i, col] = s / L[i, i]
    return x


@njit(cache=True)
def householder_tridiagonal(a):
    """Reduce a symmetric matrix to tridiagonal form by Householder reflections.

    Returns the diagonal ``d`` and the subdiagonal ``e`` (``e[i]`` couples
    ``i`` and ``i + 1``; ``e[n-1] = 0``).
    """
    A = a.copy()
    n = A.shape[0]
    d = np.zeros(n)
    e = np.zeros(n)
    v = np.empty(n)
    p = np.empty(n)
    for k in range(n - 2):
        norm = 0.0
        for i in range(k + 1, n):
            norm += A[i, k] * A[i, k]
        norm = math.sqrt(norm)
        d[k] = A[k, k]
        if norm == 0.0:
            e[k] = 0.0
            continue
        alpha = -norm if A[k + 1, k] >= 0.0 else norm
        e[k] = alpha
        vnorm = 0.0
        for i in range(k + 1, n):
            v[i] = A[i, k]
        v[k + 1] -= alpha
        for i in range(k + 1, n):
            vnorm += v[i] * v[i]
        vnorm = math.sqrt(vnorm)
        if vnorm == 0.0:
            continue
        for i in range(k + 1, n):
            v[i] /= vnorm
        for i in range(k + 1, n):
            s = 0.0
            for j in range(k + 1, n):
                s += A[i, j] * v[j]
            p[i] = s
        kk = 0.0
        for i in range(k + 1, n):
            kk += v[i] * p[i]
        for i in range(k + 1, n):
            p[i] = 2.0 * p[i] - 2.0 * kk * v[i]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i, j] -= v[i] * p[j] + p[i] * v[j]
    if n >= 2:
        d[n - 2] = A[n - 2, n - 2]
        e[n - 2] = A[n - 1, n - 2]
    d[n - 1] = A[n - 1, n - 1]
    return d, e


@njit(cache=True)
def tridiagonal_eigenvalues(d, e):
    """Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.

    Returns ``(eigenvalues, ok)``; eigenvalues are unsorted.
    """
    d = d.copy()
    e = e.copy()
    n = d.shape[0]
    eps = 2.220446049250313e-16
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 60:
                return d, False
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, True
