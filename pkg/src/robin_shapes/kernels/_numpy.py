"""Pure-numpy kernels; the fallback when numba is disabled or missing."""
import math

import numpy as np

_UPPER_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))


def p1_triplets(nodes, triangles):
    p = nodes[triangles]
    x, y = p[..., 0], p[..., 1]
    areas = 0.5 * ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0])
                   - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0]))
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    a_idx = np.array([a for a, _ in _UPPER_PAIRS])
    q_idx = np.array([q for _, q in _UPPER_PAIRS])
    ia = triangles[:, a_idx]
    iq = triangles[:, q_idx]
    rows = np.minimum(ia, iq).astype(np.int64).ravel()
    cols = np.maximum(ia, iq).astype(np.int64).ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        kvals = ((b[:, a_idx] * b[:, q_idx] + c[:, a_idx] * c[:, q_idx])
                 / (4.0 * areas[:, None])).ravel()
    weight = np.where(a_idx == q_idx, 6.0, 12.0)
    mvals = (areas[:, None] / weight[None, :]).ravel()
    return rows, cols, kvals, mvals, areas


def edge_mass_triplets(nodes, edges):
    a, b = edges[:, 0].astype(np.int64), edges[:, 1].astype(np.int64)
    d = nodes[b] - nodes[a]
    length = np.hypot(d[:, 0], d[:, 1])
    rows = np.stack([a, np.minimum(a, b), b], axis=1).ravel()
    cols = np.stack([a, np.maximum(a, b), b], axis=1).ravel()
    vals = np.stack([length / 3.0, length / 6.0, length / 3.0], axis=1).ravel()
    return rows, cols, vals


def cholesky_lower(a):
    n = a.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        s = a[j, j] - L[j, :j] @ L[j, :j]
        if not s > 0.0:
            return L, False
        d = math.sqrt(s)
        L[j, j] = d
        L[j + 1:, j] = (a[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / d
    return L, True


def lower_solve(L, rhs):
    n = rhs.shape[0]
    x = np.empty(rhs.shape)
    for i in range(n):
        x[i] = (rhs[i] - L[i, :i] @ x[:i]) / L[i, i]
    return x


def householder_tridiagonal(a):
    A = np.array(a, dtype=float, copy=True)
    n = A.shape[0]
    d = np.zeros(n)
    e = np.zeros(n)
    for k in range(n - 2):
        x = A[k + 1:, k]
        norm = math.sqrt(x @ x)
        d[k] = A[k, k]
        if norm == 0.0:
            continue
        alpha = -norm if x[0] >= 0.0 else norm
        e[k] = alpha
        v = x.copy()
        v[0] -= alpha
        vnorm = math.sqrt(v @ v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        sub = A[k + 1:, k + 1:]
        p = sub @ v
        p = 2.0 * p - 2.0 * (v @ p) * v
        sub -= np.outer(v, p) + np.outer(p, v)
    if n >= 2:
        d[n - 2] = A[n - 2, n - 2]
        e[n - 2] = A[n - 1, n - 2]
    d[n - 1] = A[n - 1, n - 1]
    return d, e


def tridiagonal_eigenvalues(d, e):
    # scalar recurrence; no useful vectorization
    d = [float(v) for v in d]
    e = [float(v) for v in e]
    n = len(d)
    eps = 2.220446049250313e-16
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                if abs(e[m]) <= eps * (abs(d[m]) + abs(d[m + 1])):
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > 60:
                return np.array(d), False
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
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
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.array(d), True
