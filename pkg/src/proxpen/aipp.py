"""Accelerated inexact proximal point (AIPP) method.

Each outer iteration approximately solves the convex prox subproblem
``min lam*phi(z) + |z - z_prev|^2 / 2`` with :class:`~proxpen.acg.AcgSolver`
under a relative error test.  Once the prox residual is small the same ACG
run is continued until its ``eta`` is small too, and the method returns a
prox-approximate solution.  :func:`refine` turns such a solution into an
approximate stationary pair by a composite gradient step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .acg import AcgConfig, AcgSolver, sigma_iteration_bound
from .errors import ConvergenceError, DivergenceError, DomainError, NumericalError
from .problem import CompositeProblem, RegularizedProx, SmoothOracle, scaled

__all__ = [
    "AippConfig",
    "ProxApproxSolution",
    "RefinedPoint",
    "aipp",
    "refine",
    "residual",
    "prox_split",
]


@dataclass
class AippConfig:
    """Inputs of the AIPP method.

    ``lam`` must satisfy ``lam * m < 1`` for the prox subproblems to be
    convex; the complexity theory covers ``lam <= 1/(2m)``.  ``acg_mode`` is
    ``"practical"`` (stop each ACG call as soon as the relative-error test
    holds) or ``"at-least"`` (additionally run ``ceil(6 sqrt(2 lam M + 1))``
    iterations).
    """

    lam: float
    rho_bar: float
    eps_bar: float
    sigma: float = 0.3
    max_outer: int = 100_000
    acg_mode: str = "practical"
    phi_floor: float = -1e50
    acg_max_iterations: Optional[int] = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        if not (self.rho_bar > 0 and self.eps_bar > 0):
            raise ValueError("tolerances must be positive")
        if self.acg_mode not in ("practical", "at-least"):
            raise ValueError("acg_mode must be 'practical' or 'at-least'")

    def validate(self, smooth: SmoothOracle):
        if not self.lam * smooth.m < 1.0:
            raise ValueError(f"lam={self.lam:g} too large for m={smooth.m:g}; need lam*m < 1")


@dataclass(frozen=True)
class ProxApproxSolution:
    """Quintuple ``(lam, z_minus, z, w, eps)`` with
    ``w`` in the ``eps``-subdifferential of ``phi + |. - z_minus|^2/(2 lam)`` at ``z``."""

    lam: float
    z_minus: np.ndarray
    z: np.ndarray
    w: np.ndarray
    eps: float


@dataclass(frozen=True)
class RefinedPoint:
    z_g: np.ndarray
    q_g: np.ndarray
    delta_g: float
    v_g: np.ndarray


def residual(sol: ProxApproxSolution) -> np.ndarray:
    """``(z_minus - z)/lam + w``."""
    if not sol.lam > 0:
        raise ValueError("lam must be positive")
    return (sol.z_minus - sol.z) / sol.lam + sol.w


def refine(problem: CompositeProblem, lam: float, z) -> RefinedPoint:
    """Composite gradient step with stepsize ``1/(M + 1/lam)`` from ``z``.

    ``v_g`` lies in ``grad g(z_g) + dh(z_g)`` and, when ``grad g`` is
    ``M``-Lipschitz, ``|v_g| <= 2 |q_g|``.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    g, h = problem.smooth, problem.convex
    z = np.asarray(z, dtype=float)
    hz = h.value(z)
    if not np.isfinite(hz):
        raise DomainError("z is outside dom h")
    Lr = g.M + 1.0 / lam
    t = 1.0 / Lr
    grad_z = g.grad(z)
    z_g = h.prox(t, z - t * grad_z)
    dz = z - z_g
    q_g = Lr * dz
    s = q_g - grad_z
    delta = hz - h.value(z_g) - float(s @ dz)
    if delta < 0:
        # rounding in <s, dz> scales with |s| |dz|, which is large when M is
        if delta < -1e-10 * (1.0 + abs(hz) + float(np.linalg.norm(s) * np.linalg.norm(dz))):
            raise NumericalError(f"negative delta_g {delta:.3e}")
        delta = 0.0
    v_g = q_g + g.grad(z_g) - grad_z
    return RefinedPoint(z_g, q_g, float(delta), v_g)


def prox_split(lam: float, m: float) -> float:
    """Weight ``theta`` of the prox term assigned to the smooth ACG part.

    The smooth part ``lam*g + (theta/2)|.-z|^2`` is convex when
    ``theta >= lam*m``; the nonsmooth part keeps ``(1-theta)/2``.
    """
    return max(0.5, lam * m)


def _subproblem(problem, z_prev, lam):
    g, h = problem.smooth, problem.convex
    theta = prox_split(lam, g.m)

    if g.hessian is not None:
        # quadratic in d = x - z_prev, fused into one matrix
        Hs = lam * g.hessian + theta * np.eye(g.dim)
        g0 = lam * g.grad(z_prev)

        def value(x):
            d = x - z_prev
            return float(d @ (g0 + 0.5 * (Hs @ d)))

        def grad(x):
            return g0 + Hs @ (x - z_prev)
    else:
        # shifted by -lam*g(z_prev) so the ACG quantities stay small
        def value(x):
            d = x - z_prev
            return lam * g.diff(x, z_prev) + 0.5 * theta * float(d @ d)

        def grad(x):
            return lam * g.grad(x) + theta * (x - z_prev)

    L = lam * g.M + theta
    psi_s = SmoothOracle(value, grad, 0.0, L, g.dim)
    psi_n = RegularizedProx(scaled(h, lam), 1.0 - theta, z_prev)
    mu = (1.0 - theta) + lam * h.mu
    return psi_s, psi_n, L, mu


def aipp(problem: CompositeProblem, z0, config: AippConfig,
         stop: Optional[Callable[[np.ndarray], bool]] = None,
         trace=None):
    """Run AIPP from ``z0``.

    Returns ``(solution, stats)``.  ``stop(z)`` is an optional early-exit
    test evaluated on each new outer iterate and on each iterate of the
    final continuation; when it fires the current quintuple is returned with
    ``stats["status"] == "stopped"`` and need not satisfy the tolerance pair.
    """
    g, h = problem.smooth, problem.convex
    config.validate(g)
    lam, sigma = config.lam, config.sigma
    z_prev = np.array(z0, dtype=float)
    if not h.in_domain(z_prev):
        raise DomainError("z0 is outside dom h")

    min_iters = 0
    if config.acg_mode == "at-least":
        min_iters = math.ceil(6.0 * math.sqrt(2.0 * lam * g.M + 1.0))

    phi_prev = problem.phi(z_prev)
    stats = {"outer": 0, "inner": 0, "inner_per_outer": [], "phi": [phi_prev],
             "gipp": [], "status": "running"}

    for k in range(1, config.max_outer + 1):
        psi_s, psi_n, L, mu = _subproblem(problem, z_prev, lam)
        max_iters = config.acg_max_iterations
        if max_iters is None:
            max_iters = max(1000, 10 * sigma_iteration_bound(L, sigma), 10 * min_iters)
        acg_cfg = AcgConfig(L=L, mu=mu, sigma=sigma, min_iterations=min_iters,
                            max_iterations=max(max_iters, min_iters))
        solver = AcgSolver(psi_s, psi_n, z_prev, acg_cfg)
        cert = solver.run()
        x, u, eta = cert.x, cert.u, cert.eta
        final = False
        stopped = False
        if np.linalg.norm(z_prev - x + u) <= lam * config.rho_bar / 5.0:
            # every continuation iterate is a candidate output, so the
            # external test may end the run before eta is small
            def extra(c):
                nonlocal stopped
                if c.eta / lam <= config.eps_bar:
                    return True
                stopped = stop is not None and bool(stop(c.x))
                return stopped
            cert = solver.run(extra_stop=extra)
            x, u, eta = cert.x, cert.u, cert.eta
            final = True

        inner = solver.state.j
        phi_x = problem.phi(x)
        stats["outer"] = k
        stats["inner"] += inner
        stats["inner_per_outer"].append(inner)
        stats["phi"].append(phi_x)
        stats["gipp"].append({"norm_v": float(np.linalg.norm(u)), "eps": eta,
                              "gap": float(np.linalg.norm(z_prev - x + u))})
        sol = ProxApproxSolution(lam, z_prev, x, u / lam, eta / lam)
        if trace is not None:
            trace({"k": k, "inner": inner, "phi": phi_x,
                   "residual": float(np.linalg.norm(residual(sol))), "eps": eta / lam})
        if not np.isfinite(phi_x) or phi_x < config.phi_floor:
            raise DivergenceError(f"phi={phi_x:g} below floor {config.phi_floor:g}")
        if final:
            stats["status"] = "stopped" if stopped else "converged"
            return sol, stats
        if stop is not None and stop(x):
            stats["status"] = "stopped"
            return sol, stats
        z_prev = x

    raise ConvergenceError(f"AIPP hit max_outer={config.max_outer}")
