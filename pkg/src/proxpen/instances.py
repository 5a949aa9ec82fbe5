"""Simplex-constrained nonconvex QP instances.

The objective is ``g(z) = -(xi/2)|D B z|^2 + (tau/2)|A z - b|^2`` over the
unit simplex, with ``xi, tau`` chosen so the Hessian has extreme eigenvalues
exactly ``M`` and ``-m``.

Random numbers come from ``numpy.random.Generator(PCG64(seed))``; the seed is
stored on every instance.  Calibration relies on dense symmetric
eigensolves, so dimensions beyond a few hundred get slow.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg, optimize

from .errors import CalibrationError
from .problem import (CompositeProblem, ConstrainedProblem, ProxableConvex, SmoothOracle,
                      quadratic)

__all__ = [
    "project_simplex",
    "simplex_indicator",
    "calibrate_curvature",
    "SimplexQpInstance",
    "LinConstrQpInstance",
    "gen_simplex_qp",
    "gen_linconstr_qp",
    "make_rng",
]


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def project_simplex(x) -> np.ndarray:
    """Euclidean projection onto ``{z >= 0, sum z = 1}`` by sort-and-threshold."""
    x = np.asarray(x, dtype=float)
    u = np.sort(x)[::-1]
    css = u.cumsum()
    css -= 1.0
    # u_k > (sum_{i<=k} u_i - 1) / k holds exactly for k = 1..rho
    rho = np.count_nonzero(u * _ranks(x.size) > css)
    z = x - css[rho - 1] / rho
    np.maximum(z, 0.0, out=z)
    # for large |x| the subtraction loses the unit sum; restore it on the
    # support, since any multiple of the normal vector amplifies that error
    S = z > 0
    z[S] += (1.0 - z.sum()) / np.count_nonzero(S)
    return np.maximum(z, 0.0, out=z)


@functools.lru_cache(maxsize=32)
def _ranks(n):
    k = np.arange(1.0, n + 1.0)
    k.flags.writeable = False
    return k


def _simplex_value(z, tol=1e-9):
    z = np.asarray(z)
    if z.min() >= -tol and abs(z.sum() - 1.0) <= tol * z.size:
        return 0.0
    return np.inf


def simplex_indicator() -> ProxableConvex:
    """Indicator of the unit simplex; its prox is :func:`project_simplex`."""
    return ProxableConvex(_simplex_value, lambda t, x: project_simplex(x))


def _extremes(H):
    n = H.shape[0]
    lo = linalg.eigh(H, eigvals_only=True, subset_by_index=[0, 0])[0]
    hi = linalg.eigh(H, eigvals_only=True, subset_by_index=[n - 1, n - 1])[0]
    return lo, hi


def calibrate_curvature(Q1, Q2, M: float, m: float, rtol: float = 1e-6):
    """Find ``(xi, tau)`` with ``eig(tau Q2 - xi Q1)`` spanning ``[-m, M]``.

    The ratio ``lmax / (-lmin)`` of ``H(1, r) = r Q2 - Q1`` is increasing in
    ``r``; a root search on ``log r`` matches it to ``M/m`` and a global
    scale then fixes ``lmax = M``.
    """
    Q1 = np.asarray(Q1, dtype=float)
    Q2 = np.asarray(Q2, dtype=float)
    if M <= 0 or m <= 0:
        raise ValueError("target curvatures must be positive")
    target = M / m

    def gap(logr):
        # signed, monotone decreasing in logr; +inf where lmax <= 0
        lo, hi = _extremes(np.exp(logr) * Q2 - Q1)
        if lo >= 0:
            return -np.inf
        if hi <= 0:
            return np.inf
        return np.log(target) - np.log(hi / -lo)

    a, b = -5.0, 5.0
    ga, gb = gap(a), gap(b)
    for _ in range(60):
        if ga > 0:
            break
        a -= 10.0
        ga = gap(a)
    for _ in range(60):
        if gb < 0:
            break
        b += 10.0
        gb = gap(b)
    if not (ga > 0 > gb) or not (np.isfinite(ga) or np.isfinite(gb)):
        raise CalibrationError(f"curvature ratio M/m={target:g} is not attainable for these matrices")
    # move infinite endpoints inward so the root finder sees finite values
    for _ in range(200):
        if np.isfinite(ga):
            break
        a = 0.5 * (a + b)
        ga = gap(a)
    for _ in range(200):
        if np.isfinite(gb):
            break
        b = 0.5 * (a + b)
        gb = gap(b)
    if not (np.isfinite(ga) and np.isfinite(gb) and ga > 0 > gb):
        raise CalibrationError("could not bracket the curvature ratio")
    try:
        logr = optimize.brentq(gap, a, b, xtol=1e-14, rtol=1e-15, maxiter=500)
    except (RuntimeError, ValueError) as exc:
        raise CalibrationError(f"ratio search failed: {exc}") from exc
    r = np.exp(logr)
    lo, hi = _extremes(r * Q2 - Q1)
    scale = M / hi
    xi, tau = scale, scale * r
    lo, hi = _extremes(tau * Q2 - xi * Q1)
    if abs(hi - M) > rtol * M or abs(-lo - m) > rtol * m:
        raise CalibrationError(f"calibration missed: got ({hi:g}, {-lo:g}) for ({M:g}, {m:g})")
    return float(xi), float(tau)


@dataclass
class SimplexQpInstance:
    """Data of ``min -(xi/2)|DBz|^2 + (tau/2)|Az-b|^2`` over the simplex."""

    A: np.ndarray
    B: np.ndarray
    d: np.ndarray
    b: np.ndarray
    xi: float
    tau: float
    M: float
    m: float
    seed: Optional[int] = None
    _H: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def l(self) -> int:
        return self.A.shape[0]

    @property
    def hessian(self) -> np.ndarray:
        if self._H is None:
            DB = self.d[:, None] * self.B
            self._H = self.tau * (self.A.T @ self.A) - self.xi * (DB.T @ DB)
        return self._H

    def oracle(self) -> SmoothOracle:
        c = -self.tau * (self.A.T @ self.b)
        const = 0.5 * self.tau * float(self.b @ self.b)
        return quadratic(self.hessian, c, const, m=self.m, M=self.M)

    def problem(self) -> CompositeProblem:
        return CompositeProblem(self.oracle(), simplex_indicator())

    def centroid(self) -> np.ndarray:
        return np.full(self.n, 1.0 / self.n)


@dataclass
class LinConstrQpInstance(SimplexQpInstance):
    """A simplex QP plus the equality system ``A_eq z = b_eq``."""

    A_eq: np.ndarray = None
    b_eq: np.ndarray = None
    z_feas: np.ndarray = None

    @property
    def l_eq(self) -> int:
        return self.A_eq.shape[0]

    def constrained_problem(self) -> ConstrainedProblem:
        # the Hessian spectrum is [-m, M] with m <= M, so L_f = M
        return ConstrainedProblem(self.oracle(), simplex_indicator(),
                                  self.A_eq, self.b_eq)


def _draw(rng, l, n):
    A = rng.uniform(0.0, 1.0, size=(l, n))
    B = rng.uniform(0.0, 1.0, size=(n, n))
    b = rng.uniform(0.0, 1.0, size=l)
    d = rng.integers(1, 1000, size=n, endpoint=True).astype(float)
    return A, B, b, d


def gen_simplex_qp(l: int, n: int, M: float, m: float, seed: int) -> SimplexQpInstance:
    """Draw ``A, B, b ~ U[0,1]`` and ``d ~ U{1..1000}``, then calibrate."""
    if l < 1 or n < 1:
        raise ValueError("dimensions must be positive")
    if not (M >= m > 0):
        raise ValueError("need M >= m > 0")
    rng = make_rng(seed)
    A, B, b, d = _draw(rng, l, n)
    DB = d[:, None] * B
    xi, tau = calibrate_curvature(DB.T @ DB, A.T @ A, M, m)
    return SimplexQpInstance(A, B, d, b, xi, tau, float(M), float(m), seed)


def gen_linconstr_qp(l: int, n: int, l_eq: int, M: float, m: float,
                     seed: int) -> LinConstrQpInstance:
    """As :func:`gen_simplex_qp` plus ``A_eq z = b_eq`` consistent with a
    random point ``z_feas`` of the simplex."""
    if l_eq < 1:
        raise ValueError("l_eq must be positive")
    base = gen_simplex_qp(l, n, M, m, seed)
    # independent stream so the objective data matches gen_simplex_qp(seed)
    rng = make_rng([seed, 1])
    A_eq = rng.uniform(0.0, 1.0, size=(l_eq, n))
    z_feas = rng.dirichlet(np.ones(n))
    b_eq = A_eq @ z_feas
    return LinConstrQpInstance(base.A, base.B, base.d, base.b, base.xi, base.tau,
                               base.M, base.m, seed, A_eq=A_eq, b_eq=b_eq,
                               z_feas=z_feas)
