"""Accelerated composite gradient method with per-iterate certificates.

Minimizes ``psi = psi_s + psi_n`` where ``psi_s`` is convex with an
``L``-Lipschitz-type upper curvature and ``psi_n`` is ``mu``-strongly convex
and given as ``base + (kappa/2)|. - center|^2``.  Besides the iterate ``x_j``
every step returns a pair ``(u_j, eta_j)`` with ``u_j`` in the
``eta_j``-subdifferential of ``psi`` at ``x_j``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError, DomainError, NumericalError
from .problem import ProxableConvex, RegularizedProx, SmoothOracle

__all__ = [
    "AcgConfig",
    "AcgState",
    "AcgCertificate",
    "AcgSolver",
    "CsvTrace",
    "acg_step",
    "solve_gamma_subproblem",
    "run_acg",
    "next_A",
    "sigma_iteration_bound",
]

ETA_RTOL = 1e-10


def sigma_iteration_bound(L: float, sigma: float) -> int:
    """Iterations after which the relative-error test is guaranteed to hold."""
    return math.ceil(2.0 * math.sqrt(2.0 * L) * (1.0 + math.sqrt(sigma)) / math.sqrt(sigma))


def next_A(A: float, L: float, mu: float) -> float:
    """The stepsize-sum recurrence ``A_j -> A_{j+1}``."""
    t = mu * A + 1.0
    return A + (t + math.sqrt(t * t + 4.0 * L * t * A)) / (2.0 * L)


@dataclass
class AcgConfig:
    """Parameters of one ACG run.

    ``max_iterations`` defaults to ten times :func:`sigma_iteration_bound`
    (at least 1000).  ``extra_stop`` is consulted only once the
    relative-error test already holds.
    """

    L: float
    mu: float = 0.0
    sigma: float = 0.3
    min_iterations: int = 0
    max_iterations: Optional[int] = None
    extra_stop: Optional[Callable[["AcgCertificate"], bool]] = None

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        if self.max_iterations is None:
            self.max_iterations = max(1000, 10 * sigma_iteration_bound(self.L, self.sigma))
        if self.min_iterations < 0 or self.min_iterations > self.max_iterations:
            raise ValueError("need 0 <= min_iterations <= max_iterations")


@dataclass
class AcgState:
    """Iteration quantities.  ``Gamma(y) = <gamma_slope, y - x0> + gamma_value``
    is the aggregated affine minorant of ``psi_s``."""

    j: int
    A: float
    x: np.ndarray
    y: np.ndarray
    x0: np.ndarray
    gamma_slope: np.ndarray
    gamma_value: float
    u: np.ndarray
    eta: float
    psi: float = float("nan")

    @property
    def gamma_intercept(self) -> float:
        return self.gamma_value - float(self.gamma_slope @ self.x0)

    def gamma(self, y) -> float:
        return float(self.gamma_slope @ (y - self.x0)) + self.gamma_value

    def criterion(self) -> tuple[float, float]:
        """``(|u|^2 + 2 eta, |x0 - x + u|^2)``; compare the first with sigma
        times the second."""
        r = self.x0 - self.x + self.u
        return float(self.u @ self.u) + 2.0 * self.eta, float(r @ r)

    @classmethod
    def initial(cls, x0) -> "AcgState":
        x0 = np.array(x0, dtype=float)
        n = x0.size
        return cls(0, 0.0, x0.copy(), x0.copy(), x0, np.zeros(n), 0.0,
                   np.zeros(n), 0.0)


@dataclass(frozen=True)
class AcgCertificate:
    x: np.ndarray
    u: np.ndarray
    eta: float
    iterations: int
    A: float = 0.0


def solve_gamma_subproblem(gamma_slope, base: ProxableConvex, kappa: float,
                           center, A: float, y0) -> np.ndarray:
    """``argmin_y <gamma_slope, y> + base(y) + (kappa/2)|y-center|^2 + |y-y0|^2/(2A)``.

    Completing the square turns it into one prox of ``base``.
    """
    if not A > 0:
        raise ValueError("A must be positive")
    t = 1.0 / (kappa + 1.0 / A)
    d = t * (kappa * np.asarray(center) + np.asarray(y0) / A - gamma_slope)
    return base.prox(t, d)


def _as_regularized(psi_n, n) -> RegularizedProx:
    if isinstance(psi_n, RegularizedProx):
        return psi_n
    return RegularizedProx(psi_n, 0.0, np.zeros(n))


def acg_step(state: AcgState, psi_s: SmoothOracle, psi_n, config: AcgConfig) -> AcgState:
    """One ACG iteration; returns a new state and leaves ``state`` untouched."""
    psi_n = _as_regularized(psi_n, state.x0.size)
    L, mu = config.L, config.mu
    A0 = state.A
    A1 = next_A(A0, L, mu)
    w_old, w_new = A0 / A1, (A1 - A0) / A1
    x0 = state.x0

    x_tilde = w_old * state.x + w_new * state.y
    gval = psi_s.value(x_tilde)
    ggrad = psi_s.grad(x_tilde)
    # linearization at x_tilde, stored relative to x0
    lin_value = gval + float(ggrad @ (x0 - x_tilde))
    slope = w_old * state.gamma_slope + w_new * ggrad
    gamma_value = w_old * state.gamma_value + w_new * lin_value

    y = solve_gamma_subproblem(slope, psi_n.base, psi_n.kappa, psi_n.center, A1, x0)
    x = w_old * state.x + w_new * y
    u = (x0 - y) / A1

    # eta = psi(x) - Gamma(y) - psi_n(y) - <u, x - y>, regrouped so that the
    # large, nearly equal terms cancel before rounding
    psi_s_x = psi_s.value(x)
    hx, hy = psi_n.base.value(x), psi_n.base.value(y)
    gamma_x = float(slope @ (x - x0)) + gamma_value
    dxy = x - y
    quad = 0.5 * psi_n.kappa * float(dxy @ (x + y - 2.0 * psi_n.center))
    eta = (psi_s_x - gamma_x) + float((slope - u) @ dxy) + (hx - hy) + quad
    dxc = x - psi_n.center
    psi_x = psi_s_x + hx + 0.5 * psi_n.kappa * float(dxc @ dxc)

    # psi_x contains |x - center|^2, so it is non-finite whenever x is
    if not (math.isfinite(eta) and math.isfinite(psi_x)):
        raise NumericalError(f"non-finite value at ACG iteration {state.j + 1}")
    if eta < 0:
        if eta < -ETA_RTOL * (1.0 + abs(psi_x)):
            raise NumericalError(f"negative eta {eta:.3e} at ACG iteration {state.j + 1}")
        eta = 0.0
    return AcgState(state.j + 1, A1, x, y, x0, slope, gamma_value, u, eta, psi_x)


class CsvTrace:
    """Callable sink writing dict rows as CSV, header taken from the first row."""

    def __init__(self, stream):
        self.stream = stream
        self._writer = None

    def __call__(self, row: dict):
        if self._writer is None:
            self._writer = csv.DictWriter(self.stream, fieldnames=list(row))
            self._writer.writeheader()
        self._writer.writerow(row)


class AcgSolver:
    """A live ACG run that can be advanced, inspected and continued."""

    def __init__(self, psi_s: SmoothOracle, psi_n, x0, config: AcgConfig,
                 trace=None, keep_history: bool = False):
        self.psi_s = psi_s
        self.psi_n = _as_regularized(psi_n, np.asarray(x0).size)
        self.config = config
        self.state = AcgState.initial(x0)
        self.trace = trace
        self.history = [] if keep_history else None

    def sigma_holds(self, state: Optional[AcgState] = None) -> bool:
        st = self.state if state is None else state
        lhs, rhs = st.criterion()
        return st.j >= 1 and lhs <= self.config.sigma * rhs

    def certificate(self) -> AcgCertificate:
        st = self.state
        return AcgCertificate(st.x, st.u, st.eta, st.j, st.A)

    def step(self) -> AcgState:
        self.state = acg_step(self.state, self.psi_s, self.psi_n, self.config)
        if self.history is not None:
            self.history.append(self.state)
        if self.trace is not None:
            lhs, rhs = self.state.criterion()
            self.trace({"j": self.state.j, "A": self.state.A, "psi": self.state.psi,
                        "norm_u": float(np.linalg.norm(self.state.u)),
                        "eta": self.state.eta,
                        "criterion": lhs - self.config.sigma * rhs})
        return self.state

    def run(self, extra_stop=None) -> AcgCertificate:
        """Advance until the relative-error test (and ``extra_stop``) holds.

        Without an explicit ``extra_stop`` the one on the config is used.
        The current iterate is tested first, so calling ``run`` again with a
        stricter predicate continues the same sequence.
        """
        cfg = self.config
        extra = cfg.extra_stop if extra_stop is None else extra_stop
        while True:
            st = self.state
            if st.j >= max(1, cfg.min_iterations) and self.sigma_holds():
                if extra is None or extra(self.certificate()):
                    return self.certificate()
            if st.j >= cfg.max_iterations:
                raise ConvergenceError(
                    f"ACG hit max_iterations={cfg.max_iterations} (L={cfg.L:g}, mu={cfg.mu:g})")
            self.step()


def run_acg(psi_s: SmoothOracle, psi_n, x0, config: AcgConfig, trace=None) -> AcgCertificate:
    """Run ACG from ``x0`` until its stopping rule holds."""
    psi_n_reg = _as_regularized(psi_n, np.asarray(x0).size)
    if not np.isfinite(psi_n_reg.base.value(np.asarray(x0, dtype=float))):
        raise DomainError("x0 is outside dom psi_n")
    return AcgSolver(psi_s, psi_n_reg, x0, config, trace=trace).run()
