"""Independent reference spectra.

* interval and rectangle Robin spectra from the 1D transcendental equations,
* disk Robin spectra from roots of x J_n'(x) + βR J_n(x) = 0,
* a dense generalized symmetric eigensolver (Cholesky reduction, Householder
  tridiagonalization, implicit QL) for checking the sparse solver.

Roots are found by bisection inside sign-change brackets that come from the
interlacing with the Neumann and Dirichlet roots, never by Newton steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels

ROOT_TOL = 1e-12
DIRICHLET_PROXY_BETA = 1e8
SERIES_LIMIT = 12.0
_FIXED_BITS = 256


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class OracleSpectrum:
    """Eigenvalues ascending, repeated according to multiplicity."""

    eigenvalues: np.ndarray
    method: str
    tolerance: float = ROOT_TOL
    modes: tuple = ()

    def __len__(self) -> int:
        return len(self.eigenvalues)


# ---------------------------------------------------------------------------
# Bessel functions of the first kind

def _series_fixed(n: int, x: float) -> float:
    """Ascending series summed exactly in fixed point; one final rounding."""
    p, q = x.as_integer_ratio()  # x = p / q, q a power of two
    scale = 1 << _FIXED_BITS
    num = p ** n * scale
    den = q ** n * (1 << n) * math.factorial(n)
    term = num // den
    total = term
    p2 = p * p
    q2 = 4 * q * q
    m = 0
    while term:
        m += 1
        mag = abs(term) * p2 // (q2 * m * (m + n))
        term = -mag if term > 0 else mag
        total += term
    return total / scale


def _miller(nmax: int, x: float) -> np.ndarray:
    """J_0..J_nmax by downward recurrence normalized with J0 + 2ΣJ_2k = 1."""
    start = int(max(nmax, x)) + 20 + int(math.sqrt(40.0 * max(nmax, x)))
    start += start % 2
    vals = np.zeros(start + 2)
    vals[start] = 1e-300
    norm = 0.0
    for k in range(start, 0, -1):
        vals[k - 1] = (2.0 * k / x) * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > 1e250:
            vals[k - 1:] *= 1e-250
            norm *= 1e-250
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * vals[k - 1]
    norm += vals[0]
    return vals[: nmax + 1] / norm


def bessel_j(n: int, x: float) -> float:
    """J_n(x) for 0 <= n <= 20 and 0 <= x <= 200, absolute error below 1e-13."""
    if not (isinstance(n, (int, np.integer)) and 0 <= n <= 20):
        raise OracleError(f"order {n} outside validated range 0..20")
    x = float(x)
    if not 0.0 <= x <= 200.0:
        raise OracleError(f"argument {x} outside validated range [0, 200]")
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x <= SERIES_LIMIT:
        return _series_fixed(int(n), x)
    return float(_miller(int(n), x)[n])


def bessel_j_and_derivative(n: int, x: float) -> tuple[float, float]:
    """(J_n(x), J_n'(x)) using J_0' = -J_1 and J_n' = (J_{n-1} - J_{n+1}) / 2."""
    if not 0 <= n <= 20 or not 0.0 < x <= 200.0:
        raise OracleError(f"J_{n}({x}) outside validated range")
    x = float(x)
    if x <= SERIES_LIMIT:
        jn = _series_fixed(n, x)
        if n == 0:
            return jn, -_series_fixed(1, x)
        return jn, 0.5 * (_series_fixed(n - 1, x) - _series_fixed(n + 1, x))
    vals = _miller(n + 1, float(x))
    if n == 0:
        return float(vals[0]), float(-vals[1])
    return float(vals[n]), float(0.5 * (vals[n - 1] - vals[n + 1]))


# ---------------------------------------------------------------------------
# bracketing and bisection

def bisect(f, lo: float, hi: float, tol: float = ROOT_TOL, flo: float | None = None) -> float:
    """Bisection on a sign-change bracket down to width ``tol``."""
    flo = f(lo) if flo is None else flo
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise OracleError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _scan_zeros(f, start: float, count: int, step: float = 0.05, stop: float = 200.0) -> list[float]:
    zeros = []
    a, fa = start, f(start)
    while len(zeros) < count:
        b = a + step
        if b > stop:
            raise OracleError("root scan left the validated range")
        fb = f(b)
        if fa == 0.0 or (fa > 0) != (fb > 0):
            zeros.append(bisect(f, a, b, flo=fa))
        a, fa = b, fb
    return zeros


@lru_cache(maxsize=None)
def bessel_zeros(n: int, count: int) -> tuple[float, ...]:
    """First ``count`` positive zeros of J_n (Dirichlet disk roots)."""
    return tuple(_scan_zeros(lambda x: bessel_j(n, x), 1e-3, count))


@lru_cache(maxsize=None)
def bessel_derivative_zeros(n: int, count: int) -> tuple[float, ...]:
    """First ``count`` zeros of J_n' (Neumann roots); 0 is included for n = 0."""
    if n == 0:
        return (0.0,) + bessel_zeros(1, count - 1) if count > 1 else (0.0,)
    return tuple(_scan_zeros(lambda x: bessel_j_and_derivative(n, x)[1], 1e-3, count))


# ---------------------------------------------------------------------------
# classical spectra

def _interval_roots(L: float, beta: float, count: int) -> list[float]:
    """First ``count`` values of μ for the Robin problem on (0, L), ascending."""
    out = []
    j = 0
    while len(out) < count:
        if beta == 0.0:
            out.append(j * math.pi / L)
        elif j % 2 == 0:
            # even modes: μ tan(μL/2) = β, written without poles
            r = j // 2
            f = lambda mu: mu * math.sin(0.5 * mu * L) - beta * math.cos(0.5 * mu * L)
            out.append(bisect(f, 2 * r * math.pi / L, (2 * r + 1) * math.pi / L))
        else:
            # odd modes: μ cot(μL/2) = -β
            r = j // 2
            f = lambda mu: mu * math.cos(0.5 * mu * L) + beta * math.sin(0.5 * mu * L)
            out.append(bisect(f, (2 * r + 1) * math.pi / L, (2 * r + 2) * math.pi / L))
        j += 1
    return out


def interval_robin_eigenvalues(L: float, beta: float, k: int) -> OracleSpectrum:
    """First ``k`` eigenvalues of -u'' on (0, L) with u' = βu at 0 and -u' = βu at L."""
    if not L > 0:
        raise OracleError(f"length must be positive, got {L}")
    if not beta >= 0:
        raise OracleError(f"beta must be nonnegative, got {beta}")
    mu = np.array(_interval_roots(float(L), float(beta), k))
    return OracleSpectrum(mu ** 2, "interval", ROOT_TOL, tuple(range(k)))


def rectangle_robin_eigenvalues(Lx: float, Ly: float, beta: float, k: int) -> OracleSpectrum:
    """First ``k`` sums μ_i(Lx) + μ_j(Ly) in ascending order."""
    m = max(k, 2)
    while True:
        ex = interval_robin_eigenvalues(Lx, beta, m).eigenvalues
        ey = interval_robin_eigenvalues(Ly, beta, m).eigenvalues
        sums = (ex[:, None] + ey[None, :]).ravel()
        order = np.argsort(sums, kind="stable")[:k]
        kth = sums[order[-1]]
        # any pair using an index >= m is at least ex[m-1] or ey[m-1]
        if ex[-1] > kth and ey[-1] > kth:
            modes = tuple(divmod(int(i), m) for i in order)
            return OracleSpectrum(sums[order], "rectangle", ROOT_TOL, modes)
        m *= 2


def _disk_root(n: int, m: int, beta_r: float) -> float:
    """m-th root (1-based) of x J_n'(x) + βR J_n(x) = 0."""
    lo = bessel_derivative_zeros(n, m)[m - 1]
    if beta_r == 0.0:
        return lo
    hi = bessel_zeros(n, m)[m - 1]

    def g(x):
        jn, djn = bessel_j_and_derivative(n, x)
        return x * djn + beta_r * jn

    flo = beta_r * (1.0 if lo == 0.0 else bessel_j(n, lo))
    return bisect(g, lo, hi, flo=flo)


def disk_robin_eigenvalues(R: float, beta: float, k: int) -> OracleSpectrum:
    """First ``k`` Robin eigenvalues of the disk of radius R, with multiplicity."""
    if not R > 0:
        raise OracleError(f"radius must be positive, got {R}")
    if not beta >= 0:
        raise OracleError(f"beta must be nonnegative, got {beta}")
    beta_r = float(beta) * float(R)
    found: list[tuple[float, int, int]] = []

    def kth() -> float:
        if sum(1 if n == 0 else 2 for _, n, _ in found) < k:
            return math.inf
        vals = sorted(v for v, n, _ in found for _ in range(1 if n == 0 else 2))
        return vals[k - 1]

    n = 0
    while True:
        if n > 20:
            raise OracleError("disk oracle needs angular order above 20")
        # x_{n,1} > j'_{n,1}, and j'_{n,1} grows with n
        if (bessel_derivative_zeros(n, 1)[0] / R) ** 2 >= kth():
            break
        m = 1
        while True:
            x = _disk_root(n, m, beta_r)
            found.append(((x / R) ** 2, n, m))
            if (bessel_derivative_zeros(n, m + 1)[m] / R) ** 2 >= kth():
                break
            m += 1
        n += 1
    vals, modes = [], []
    for v, n_, m_ in sorted(found):
        for _ in range(1 if n_ == 0 else 2):
            vals.append(v)
            modes.append((n_, m_))
    return OracleSpectrum(np.array(vals[:k]), "disk", ROOT_TOL, tuple(modes[:k]))


def weyl_count(L: float, beta: float, lam: float) -> tuple[int, float]:
    """Number of interval eigenvalues below ``lam`` and the Weyl term L√lam/π."""
    count = 0
    while True:
        ev = interval_robin_eigenvalues(L, beta, count + 1).eigenvalues[-1]
        if ev >= lam:
            break
        count += 1
    return count, L * math.sqrt(lam) / math.pi


# ---------------------------------------------------------------------------
# dense brute force

def dense_generalized_eig(A: np.ndarray, M: np.ndarray) -> np.ndarray:
    """All eigenvalues of A u = λ M u, ascending (A symmetric, M SPD, n <= 2000)."""
    A = np.asarray(A, dtype=float)
    M = np.asarray(M, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or M.shape != (n, n):
        raise OracleError("A and M must be square and of equal size")
    if n > 2000:
        raise OracleError(f"dimension {n} above the dense limit 2000")
    L, ok = kernels.cholesky_lower(np.ascontiguousarray(M))
    if not ok:
        raise OracleError("M not SPD")
    # C = L^{-1} A L^{-T}
    Y = kernels.lower_solve(L, np.ascontiguousarray(A))
    C = kernels.lower_solve(L, np.ascontiguousarray(Y.T))
    C = 0.5 * (C + C.T)
    d, e = kernels.householder_tridiagonal(np.ascontiguousarray(C))
    w, ok = kernels.tridiagonal_eigenvalues(d, e)
    if not ok:
        raise OracleError("QL iteration did not converge")
    return np.sort(w)
