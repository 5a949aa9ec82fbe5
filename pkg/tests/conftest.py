import itertools

import numpy as np
import pytest

from proxpen.problem import quadratic

# PASS/FAIL lines from the acceptance suite, echoed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def brute_force_simplex_projection(x):
    """Nearest simplex point by enumerating supports.

    On a support S the projection is ``x_S - (sum x_S - 1)/|S|``; the best
    nonnegative candidate over all S is the projection.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    best, best_d = None, np.inf
    for k in range(1, n + 1):
        for S in itertools.combinations(range(n), k):
            S = list(S)
            z = np.zeros(n)
            z[S] = x[S] - (x[S].sum() - 1.0) / k
            if z.min() < 0:
                continue
            d = float((z - x) @ (z - x))
            if d < best_d:
                best, best_d = z, d
    return best


def random_convex_quadratic(rng, n, rank=None, scale=1.0):
    """``0.5|Gx - r|^2`` with its curvature read off ``G'G``."""
    rank = n if rank is None else rank
    G = rng.standard_normal((rank, n)) * scale
    r = rng.standard_normal(rank)
    H = G.T @ G
    ev = np.linalg.eigvalsh(H)
    return quadratic(H, -G.T @ r, 0.5 * float(r @ r), m=0.0, M=float(ev[-1]))


def half_norm_sq(n, m=1.0, M=1.0):
    return quadratic(np.eye(n), m=m, M=M)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
