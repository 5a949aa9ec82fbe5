"""Quadratic penalty driver (QP-AIPP) for ``min f + h  s.t.  Az = b``.

Each loop solves ``min f + h + (c/2)|Az - b|^2`` with AIPP, refines the
result into an approximate stationary pair and doubles ``c`` until the
refined point is feasible to the requested tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .aipp import AippConfig, aipp, refine
from .errors import ConvergenceError
from .problem import CompositeProblem, ConstrainedProblem, SmoothOracle, quadratic

__all__ = [
    "PenaltyConfig",
    "StationaryTriple",
    "build_penalty",
    "tolerance_map",
    "spectral_norm_sq",
    "qp_aipp",
]


@dataclass
class PenaltyConfig:
    rho_hat: float
    eta_hat: float
    c_hat: float = 0.0
    sigma: float = 0.3
    max_doublings: int = 60
    warm_start: bool = False
    acg_mode: str = "practical"

    def __post_init__(self):
        if not (self.rho_hat > 0 and self.eta_hat > 0):
            raise ValueError("tolerances must be positive")
        if self.c_hat < 0:
            raise ValueError("c_hat must be nonnegative")


@dataclass(frozen=True)
class StationaryTriple:
    """``v in grad f(z) + dh(z) + A'p`` with ``p = c (Az - b)``."""

    z: np.ndarray
    v: np.ndarray
    p: np.ndarray


def tolerance_map(rho_hat: float, m: float, M: float):
    """Prox-approximate tolerances whose refinement yields ``|v| <= rho_hat``.

    Returns ``(rho_hat/4, rho_hat^2 / (32 (M + 2m)))``.
    """
    if not (rho_hat > 0 and m > 0 and M > 0):
        raise ValueError("inputs must be positive")
    return rho_hat / 4.0, rho_hat ** 2 / (32.0 * (M + 2.0 * m))


def spectral_norm_sq(A, tol: float = 1e-10, max_power_iters: int = 10_000,
                     safety: float = 1.01) -> float:
    """Upper estimate of ``|A|^2 = lambda_max(A'A)`` by power iteration.

    The converged Rayleigh quotient is inflated by ``safety`` so that it can
    serve as a curvature bound.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if not np.any(A):
        raise ValueError("A must be nonzero")
    n = A.shape[1]
    x = np.random.default_rng(0).uniform(0.5, 1.5, size=n)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(max_power_iters):
        y = A.T @ (A @ x)
        new = float(x @ y)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            # start vector in the null space; restart from a different one
            x = np.random.default_rng(1).standard_normal(n)
            x /= np.linalg.norm(x)
            continue
        x = y / ny
        if abs(new - est) <= tol * new:
            return safety * new
        est = new
    raise ConvergenceError("power iteration did not converge")


def build_penalty(cp: ConstrainedProblem, c: float,
                  norm_sq: Optional[float] = None) -> CompositeProblem:
    """``f + (c/2)|A. - b|^2`` paired with ``h``; curvature ``(m_f, L_f + c|A|^2)``."""
    if c < 0:
        raise ValueError("c must be nonnegative")
    f, A, b = cp.f, cp.A, cp.b
    if norm_sq is None:
        norm_sq = spectral_norm_sq(A)
    M = f.M + c * norm_sq
    if f.hessian is not None:
        # one fused quadratic; the constant is irrelevant to every caller
        # that works with differences, but kept so values agree
        const = f.value(np.zeros(f.dim)) + 0.5 * c * float(b @ b)
        smooth = quadratic(f.hessian + c * (A.T @ A), f.linear - c * (A.T @ b), const,
                           m=f.m, M=M)
        return CompositeProblem(smooth, cp.h)

    def value(z):
        r = A @ z - b
        return f.value(z) + 0.5 * c * float(r @ r)

    def grad(z):
        return f.grad(z) + c * (A.T @ (A @ z - b))

    def value_diff(x, z):
        ad = A @ (x - z)
        return f.diff(x, z) + c * (float(ad @ (A @ z - b)) + 0.5 * float(ad @ ad))

    smooth = SmoothOracle(value, grad, f.m, M, f.dim, value_diff)
    return CompositeProblem(smooth, cp.h)


def qp_aipp(cp: ConstrainedProblem, z0, config: PenaltyConfig):
    """Run the penalty method from ``z0`` (which need not satisfy ``Az = b``).

    Returns ``(StationaryTriple, stats)``; ``stats`` holds the penalty
    schedule, inner iterations and feasibility per loop.
    """
    f = cp.f
    if not f.m > 0:
        raise ValueError("f needs a positive lower curvature m_f")
    z0 = np.array(z0, dtype=float)
    lam = 1.0 / (2.0 * f.m)
    norm_sq = spectral_norm_sq(cp.A)
    c = config.c_hat + f.M / norm_sq
    start = z0
    stats = {"loops": 0, "c": [], "inner": [], "outer": [], "feasibility": [],
             "scaled_feasibility": [], "norm_sq": norm_sq, "lam": lam}
    for loop in range(1, config.max_doublings + 1):
        pen = build_penalty(cp, c, norm_sq)
        rho_bar, eps_bar = tolerance_map(config.rho_hat, f.m, pen.smooth.M)
        sol, st = aipp(pen, start, AippConfig(lam=lam, rho_bar=rho_bar, eps_bar=eps_bar,
                                               sigma=config.sigma,
                                               acg_mode=config.acg_mode))
        ref = refine(pen, lam, sol.z)
        r = cp.A @ ref.z_g - cp.b
        feas = float(np.linalg.norm(r))
        stats["loops"] = loop
        stats["c"].append(c)
        stats["inner"].append(st["inner"])
        stats["outer"].append(st["outer"])
        stats["feasibility"].append(feas)
        stats["scaled_feasibility"].append((c - config.c_hat) * feas ** 2)
        if feas <= config.eta_hat:
            stats["c_final"] = c
            stats["norm_v"] = float(np.linalg.norm(ref.v_g))
            stats["z_pre"] = sol.z
            return StationaryTriple(ref.z_g, ref.v_g, c * r), stats
        if config.warm_start:
            start = ref.z_g
        c *= 2.0
    raise ConvergenceError(f"QP-AIPP exceeded max_doublings={config.max_doublings}")
