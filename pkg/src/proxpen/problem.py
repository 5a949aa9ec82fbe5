"""Oracle abstractions for composite objectives ``phi = g + h``.

A smooth part is described by a :class:`SmoothOracle` (value, gradient and a
curvature pair ``(m, M)``), the convex part by a :class:`ProxableConvex`
(value, prox and a strong convexity modulus).  The sampling checks at the
bottom of the module verify the declared properties numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

__all__ = [
    "SmoothOracle",
    "ProxableConvex",
    "RegularizedProx",
    "CompositeProblem",
    "ConstrainedProblem",
    "quadratic",
    "zero_function",
    "scaled",
    "linearization",
    "check_curvature",
    "subgrad_membership",
]


def _as_point(x, n: int, name: str = "point") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"{name} has shape {x.shape}, expected ({n},)")
    return x


@dataclass(frozen=True)
class SmoothOracle:
    """Differentiable function with lower/upper curvature bounds.

    ``value`` and ``grad`` map a length-``dim`` array to a float and an array.
    The declared pair satisfies
    ``-(m/2)|u-z|^2 <= g(u) - g(z) - <grad g(z), u-z> <= (M/2)|u-z|^2``.

    ``value_diff(x, z)``, when given, returns ``g(x) - g(z)`` without
    forming the two values; it avoids cancellation when ``g`` is a small
    difference of large terms.  Quadratic oracles also carry ``hessian`` and
    ``linear`` so that callers can fuse them.
    """

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    m: float
    M: float
    dim: int
    value_diff: Optional[Callable[[np.ndarray, np.ndarray], float]] = None
    hessian: Optional[np.ndarray] = None
    linear: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if not (self.m >= 0 and self.M >= 0):
            raise ValueError("curvature bounds must be nonnegative")

    def __call__(self, z):
        return self.value(z)

    def diff(self, x, z) -> float:
        """``g(x) - g(z)``."""
        if self.value_diff is not None:
            return float(self.value_diff(x, z))
        return self.value(x) - self.value(z)


@dataclass(frozen=True)
class ProxableConvex:
    """Closed convex function with a prox operator.

    ``prox(t, x)`` returns ``argmin_u h(u) + |u - x|^2 / (2 t)``.  ``value``
    returns ``inf`` outside the effective domain.
    """

    value: Callable[[np.ndarray], float]
    prox: Callable[[float, np.ndarray], np.ndarray]
    mu: float = 0.0

    def __call__(self, z):
        return self.value(z)

    def in_domain(self, z) -> bool:
        return bool(np.isfinite(self.value(z)))


@dataclass(frozen=True)
class RegularizedProx:
    """``base + (kappa/2)|. - center|^2`` kept in decomposed form.

    The decomposition lets the accelerated method solve its inner subproblem
    with a single call to ``base.prox``.
    """

    base: ProxableConvex
    kappa: float
    center: np.ndarray

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")

    @property
    def mu(self) -> float:
        return self.base.mu + self.kappa

    def value(self, x) -> float:
        d = x - self.center
        return self.base.value(x) + 0.5 * self.kappa * float(d @ d)

    __call__ = value

    def prox(self, t: float, x) -> np.ndarray:
        s = 1.0 / (1.0 / t + self.kappa)
        return self.base.prox(s, s * (x / t + self.kappa * self.center))

    def as_proxable(self) -> ProxableConvex:
        return ProxableConvex(self.value, self.prox, self.mu)


@dataclass(frozen=True)
class CompositeProblem:
    """``phi = smooth + convex`` on R^n."""

    smooth: SmoothOracle
    convex: ProxableConvex

    @property
    def dim(self) -> int:
        return self.smooth.dim

    def phi(self, z) -> float:
        return self.smooth.value(z) + self.convex.value(z)


@dataclass(frozen=True)
class ConstrainedProblem:
    """``min f(z) + h(z)  s.t.  A z = b`` with ``(m_f, L_f)`` stored on ``f``."""

    f: SmoothOracle
    h: ProxableConvex
    A: np.ndarray
    b: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if A.shape[1] != self.f.dim:
            raise ValueError("A has the wrong number of columns")
        if A.shape[0] != b.shape[0]:
            raise ValueError("A and b disagree in the number of rows")
        if not np.any(A):
            raise ValueError("A must be nonzero")

    @property
    def dim(self) -> int:
        return self.f.dim

    def feasibility(self, z) -> float:
        return float(np.linalg.norm(self.A @ z - self.b))


# ---------------------------------------------------------------------------
# concrete oracles

def quadratic(H, c=None, const=0.0, m=None, M=None) -> SmoothOracle:
    """Oracle for ``0.5 z'Hz + c'z + const``.

    When ``m`` or ``M`` is omitted it is read off the spectrum of ``H``
    (``m = max(0, -lambda_min)``, ``M = max(0, lambda_max)``).
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    n = H.shape[0]
    c = np.zeros(n) if c is None else np.asarray(c, dtype=float)
    if m is None or M is None:
        ev = np.linalg.eigvalsh(0.5 * (H + H.T))
        m = max(0.0, -ev[0]) if m is None else m
        M = max(0.0, ev[-1]) if M is None else M

    def value(z):
        return 0.5 * float(z @ (H @ z)) + float(c @ z) + const

    def grad(z):
        return H @ z + c

    def value_diff(x, z):
        d = x - z
        return float(d @ (H @ z + c)) + 0.5 * float(d @ (H @ d))

    return SmoothOracle(value, grad, float(m), float(M), n, value_diff, H, c)


def zero_function(n: int) -> ProxableConvex:
    return ProxableConvex(lambda z: 0.0, lambda t, x: np.array(x, dtype=float))


def scaled(h: ProxableConvex, a: float) -> ProxableConvex:
    """The function ``a * h`` for ``a > 0``."""
    if a <= 0:
        raise ValueError("scale must be positive")
    return ProxableConvex(lambda z: a * h.value(z),
                          lambda t, x: h.prox(a * t, x), a * h.mu)


def linearization(oracle: SmoothOracle, z, u) -> float:
    """``g(z) + <grad g(z), u - z>``, the affine model of ``g`` at ``z``."""
    z = _as_point(z, oracle.dim, "z")
    u = _as_point(u, oracle.dim, "u")
    return oracle.value(z) + float(oracle.grad(z) @ (u - z))


# ---------------------------------------------------------------------------
# sampling checks

def _domain_points(rng, n, domain, count, center=None):
    """Points of ``dom h`` drawn by pushing Gaussians through ``prox(1, .)``."""
    scales = 10.0 ** rng.uniform(-3, 1, size=count)
    pts = rng.standard_normal((count, n)) * scales[:, None]
    if center is not None:
        pts = pts + center
    if domain is None:
        return pts
    return np.array([domain.prox(1.0, p) for p in pts])


def check_curvature(oracle: SmoothOracle, sample_count: int, seed=None,
                    domain: Optional[ProxableConvex] = None,
                    rtol: float = 1e-8) -> dict:
    """Sample pairs ``(z, u)`` and report violations of the curvature pair.

    Returns a dict with the list ``violations`` (one entry per failing pair,
    recording which side failed and by how much) and the ``samples`` count.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    rng = np.random.default_rng(seed)
    n = oracle.dim
    Z = _domain_points(rng, n, domain, sample_count)
    U = _domain_points(rng, n, domain, sample_count)
    violations = []
    for z, u in zip(Z, U):
        gu = oracle.value(u)
        gap = gu - linearization(oracle, z, u)
        d2 = float((u - z) @ (u - z))
        tol = rtol * (1.0 + abs(gu))
        if gap > 0.5 * oracle.M * d2 + tol:
            violations.append({"side": "upper", "excess": gap - 0.5 * oracle.M * d2})
        if gap < -0.5 * oracle.m * d2 - tol:
            violations.append({"side": "lower", "excess": -0.5 * oracle.m * d2 - gap})
    return {"violations": violations, "samples": sample_count}


def subgrad_membership(h, p, s, eps: float = 0.0, samples: int = 1000,
                       seed=None, sampler=None, rtol: float = 1e-8) -> bool:
    """Sampling test of ``s in d_eps h(p)``.

    Checks ``h(u) >= h(p) + <s, u - p> - eps`` at sampled ``u``.  This is a
    necessary condition only.  ``h`` needs ``value``; points come from
    ``sampler(rng, count)`` or, by default, from ``h.prox(1, .)`` applied to
    Gaussian perturbations of ``p`` and of the origin.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    p = np.asarray(p, dtype=float)
    s = np.asarray(s, dtype=float)
    hp = h.value(p)
    if not np.isfinite(hp):
        raise DomainError("p is outside dom h")
    rng = np.random.default_rng(seed)
    if sampler is not None:
        U = sampler(rng, samples)
    else:
        half = samples // 2
        U = np.vstack([_domain_points(rng, p.size, h, half, center=p),
                       _domain_points(rng, p.size, h, samples - half)])
    for u in U:
        hu = h.value(u)
        if not np.isfinite(hu):
            continue
        if hu < hp + float(s @ (u - p)) - eps - rtol * (1.0 + abs(hu)):
            return False
    return True
