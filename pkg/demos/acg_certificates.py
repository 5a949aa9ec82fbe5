"""
ACG certificates on a simplex-constrained quadratic
===================================================

Besides its iterates, the accelerated method carries a pair ``(u, eta)`` with
``u`` an ``eta``-subgradient of the objective at the current point.  The run
below watches the pair shrink and the relative-error test switch on.
"""

import numpy as np

from proxpen.acg import AcgConfig, AcgSolver
from proxpen.instances import simplex_indicator
from proxpen.problem import RegularizedProx, quadratic

rng = np.random.default_rng(0)
n = 30

# a convex quadratic with top eigenvalue L = 25
G = rng.standard_normal((10, n))
H = G.T @ G
H *= 25.0 / np.linalg.eigvalsh(H)[-1]
psi_s = quadratic(H, rng.standard_normal(n), m=0.0, M=25.0)

# simplex indicator plus a small proximal term, so mu = 0.1
psi_n = RegularizedProx(simplex_indicator(), 0.1, np.full(n, 1.0 / n))

x0 = np.eye(n)[0]
solver = AcgSolver(psi_s, psi_n, x0, AcgConfig(L=25.0, mu=0.1, sigma=0.3))

print(f"{'j':>4} {'A_j':>10} {'|u|':>10} {'eta':>10}  sigma-test")
for j in range(1, 61):
    st = solver.step()
    if j in (1, 2, 5, 10, 20, 40, 60):
        lhs, rhs = st.criterion()
        print(f"{j:4d} {st.A:10.3e} {np.linalg.norm(st.u):10.3e} {st.eta:10.3e}"
              f"  {'holds' if lhs <= 0.3 * rhs else '-'}")

# the run can be continued past the sigma-test, reusing the same state
cert = solver.run(extra_stop=lambda c: c.eta <= 1e-10)
print(f"\ncontinued to iteration {cert.iterations}: eta = {cert.eta:.2e}")
