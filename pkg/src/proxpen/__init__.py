"""Accelerated inexact proximal point and quadratic penalty solvers for
nonconvex composite problems ``min g(z) + h(z)``."""

from .acg import AcgCertificate, AcgConfig, AcgSolver, AcgState, acg_step, run_acg
from .aipp import AippConfig, ProxApproxSolution, RefinedPoint, aipp, refine, residual
from .baseline import CgConfig, pg_certificate, pg_step, run_pg
from .errors import (CalibrationError, ConvergenceError, DivergenceError, DomainError,
                     NumericalError, ProxpenError)
from .instances import (LinConstrQpInstance, SimplexQpInstance, calibrate_curvature,
                        gen_linconstr_qp, gen_simplex_qp, make_rng, project_simplex,
                        simplex_indicator)
from .io import load_instance, save_instance
from .penalty import (PenaltyConfig, StationaryTriple, build_penalty, qp_aipp,
                      spectral_norm_sq, tolerance_map)
from .problem import (CompositeProblem, ConstrainedProblem, ProxableConvex, RegularizedProx,
                      SmoothOracle, check_curvature, linearization, quadratic,
                      subgrad_membership, zero_function)

__version__ = "0.1.0"
