"""
Proximal point with accelerated inner solves vs projected gradient
==================================================================

On a nonconvex quadratic over the simplex, the gradient method must use a
step of order ``1/M``.  The proximal point method instead takes steps of
order ``1/m`` and solves each convexified subproblem with ACG, so its cost
grows like ``sqrt(M/m)`` rather than ``M/m``.
"""

from proxpen.bench import solve
from proxpen.instances import gen_simplex_qp

print(f"{'M':>9} {'m':>6} {'pg':>8} {'aipp':>8}")
for M, m in [(4000.0, 1.0), (64000.0, 1.0), (1e4, 1e4)]:
    inst = gen_simplex_qp(10, 50, M, m, seed=1)
    counts = {}
    for method in ("pg", "aipp"):
        record, _ = solve(inst, method, rho_bar=1e-5)
        assert record["status"] == "SUCCESS"
        counts[method] = record["iterations"]["inner"]
    print(f"{M:9.0f} {m:6.0f} {counts['pg']:8d} {counts['aipp']:8d}")

# When m = M the problem is as nonconvex as it is smooth, and the plain
# gradient method is usually the cheaper of the two.
