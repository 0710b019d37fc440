"""Finite element solvers for periodic stationary Fokker-Planck equations,
periodic correctors and effective diffusion matrices."""

from .coefficients import (CoefficientField, CordesReport, EllipticityReport, RenormalizedField,
                           check_cordes, check_ellipticity, make_builtin_problem, renormalize)
from .correctors import (CorrectorA, CorrectorB, check_centering, solve_corrector_a,
                         solve_corrector_b, solve_correctors_a, solve_correctors_b)
from .effective import EffectiveMatrix, effective_matrix_a, effective_matrix_b
from .errors import (ConfigurationError, EvaluationError, FpkError, InvalidCoefficientError,
                     InvalidInvariantError, SolveError)
from .fem import FeFunction, FeSpace, build_space, error_norm
from .harness import StudyConfig, StudyResult, emit, fit_rates, run_convergence
from .linalg import SolveReport, SparseSystem, residual, solve
from .mesh import PeriodicMesh, build_periodic_mesh
from .oracle import quad1d, reference_effective_matrix, reference_solution
from .quadrature import QuadratureRule, quadrature
from .setting_a import (InvariantMeasureA, assemble_form_a, solve_invariant_a,
                        solve_nonhomogeneous_a)
from .setting_b import (InvariantMeasureB, assemble_B2, solve_invariant_b,
                        solve_nonhomogeneous_b)

__version__ = "0.1.0"
