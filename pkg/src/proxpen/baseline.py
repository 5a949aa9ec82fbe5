"""Composite (projected) gradient baseline.

With ``lam <= 1/m`` and ``lam < 2/M`` every step is an inexact prox step
whose relative error is at most ``(lam*M + 2)/4``; :func:`pg_certificate`
computes that certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, NumericalError
from .problem import CompositeProblem

__all__ = ["CgConfig", "pg_step", "pg_certificate", "run_pg"]


@dataclass
class CgConfig:
    lam: float
    rho_bar: float = 1e-7
    max_iterations: int = 1_000_000

    def validate(self, problem: CompositeProblem):
        g = problem.smooth
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.lam * g.m > 1.0 or self.lam * g.M >= 2.0:
            raise ValueError(f"stepsize {self.lam:g} violates lam <= 1/m, lam < 2/M "
                             f"(m={g.m:g}, M={g.M:g})")


def pg_step(problem: CompositeProblem, lam: float, z) -> np.ndarray:
    """``prox_{lam h}(z - lam grad g(z))``."""
    z = np.asarray(z, dtype=float)
    if not problem.convex.in_domain(z):
        raise DomainError("z is outside dom h")
    return problem.convex.prox(lam, z - lam * problem.smooth.grad(z))


def pg_certificate(problem: CompositeProblem, lam: float, z_prev, z,
                   check: bool = True):
    """Return ``(v_tilde, eps_tilde, sigma_eff)`` for the step ``z_prev -> z``.

    ``sigma_eff`` is the smallest sigma for which the relative-error test
    holds, taken as 0 when ``z == z_prev``.
    """
    z_prev = np.asarray(z_prev, dtype=float)
    z = np.asarray(z, dtype=float)
    if check:
        z_step = pg_step(problem, lam, z_prev)
        if np.linalg.norm(z_step - z) > 1e-8 * (1.0 + np.linalg.norm(z)):
            raise ValueError("z is not the gradient step from z_prev")
    g = problem.smooth
    v = z_prev - z
    dd = float(v @ v)
    gap = g.diff(z, z_prev) - float(g.grad(z_prev) @ (z - z_prev))
    eps = lam * gap + 0.5 * dd
    if eps < 0:
        if eps < -1e-10 * (1.0 + abs(g.value(z))):
            raise NumericalError(f"negative eps_tilde {eps:.3e}")
        eps = 0.0
    if dd == 0.0:
        return v, float(eps), 0.0
    sigma_eff = (dd + 2.0 * eps) / (4.0 * dd)
    return v, float(eps), float(sigma_eff)


def run_pg(problem: CompositeProblem, z0, config: CgConfig, trace=None):
    """Projected gradient until ``|v| / (|grad g(z0)| + 1) <= rho_bar``.

    ``v = (z_prev - z)/lam + grad g(z) - grad g(z_prev)`` lies in
    ``grad g(z) + dh(z)`` by the prox optimality condition.  Returns
    ``(z, v, stats)``; ``stats["z_prev"]`` is the point the last step started from.
    """
    config.validate(problem)
    g = problem.smooth
    lam = config.lam
    z = np.array(z0, dtype=float)
    if not problem.convex.in_domain(z):
        raise DomainError("z0 is outside dom h")
    grad = g.grad(z)
    scale = float(np.linalg.norm(grad)) + 1.0
    phi = [problem.phi(z)]
    for k in range(1, config.max_iterations + 1):
        z_new = problem.convex.prox(lam, z - lam * grad)
        grad_new = g.grad(z_new)
        v = (z - z_new) / lam + grad_new - grad
        crit = float(np.linalg.norm(v)) / scale
        if trace is not None:
            _, _, s_eff = pg_certificate(problem, lam, z, z_new, check=False)
            trace({"k": k, "phi": problem.phi(z_new), "norm_v": crit * scale,
                   "sigma_eff": s_eff})
        z_prev, z, grad = z, z_new, grad_new
        phi.append(problem.phi(z))
        if crit <= config.rho_bar:
            return z, v, {"iterations": k, "criterion": crit, "phi": phi,
                          "status": "converged", "z_prev": z_prev}
    raise ConvergenceError(f"PG hit max_iterations={config.max_iterations}")
