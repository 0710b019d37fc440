"""Invariant measure and nonhomogeneous problems for W^{1,p} coefficients.

Both problems are solved in divergence form with the nonsymmetric form

    a(u, v) = int A grad u . grad v + int u (div A - b) . grad v,

with ``u`` the trial function (matrix column) and ``v`` the test function
(matrix row), over mean-zero P1 functions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .assembly import scatter_matrix, scatter_vector
from .coefficients import CoefficientField
from .errors import ConfigurationError
from .fem import SCALAR, FeFunction, FeSpace, build_space
from .linalg import Constraint, SolveReport, SparseSystem, solve
from .mesh import build_periodic_mesh
from .quadrature import QuadratureRule, integration_groups

log = logging.getLogger(__name__)


def _require_a(field):
    if not (field.supports_setting_a and field.has_divA):
        raise ConfigurationError(f"field {field.name!r} has no div(A); Setting A unavailable")


def _groups(field, space, quad, cut_quad):
    return integration_groups(space.mesh, field.discontinuity_lines, quad, cut_quad)


def assemble_form_a(field: CoefficientField, space: FeSpace,
                    quad: Optional[QuadratureRule] = None, cut_quad=None):
    """Matrix of ``a(phi_col, phi_row)``."""
    _require_a(field)
    mesh = space.mesh
    G = mesh.basis_gradients
    blocks, dofs = [], []
    for grp in _groups(field, space, quad, cut_quad):
        A = field.eval_A(grp.points)
        c = field.eval_divA(grp.points) - field.eval_b(grp.points)
        g = G[grp.elements]
        K = np.einsum("eq,eqij,ebj,eai->eab", grp.weights, A, g, g)
        K += np.einsum("eq,qb,eqi,eai->eab", grp.weights, grp.bary, c, g)
        blocks.append(K)
        dofs.append(mesh.triangles[grp.elements])
    return scatter_matrix(np.concatenate(dofs), np.concatenate(blocks), space.dof_count)


def load_vector(space, groups, flux):
    """``int flux . grad phi_k`` for a vector field given at quadrature points."""
    G = space.mesh.basis_gradients
    loc, dofs = [], []
    for grp in groups:
        loc.append(np.einsum("eq,eqi,eai->ea", grp.weights, flux(grp), G[grp.elements]))
        dofs.append(space.mesh.triangles[grp.elements])
    return scatter_vector(np.concatenate(dofs), np.concatenate(loc), space.dof_count)


def mean_zero_constraints(space):
    return [Constraint(row, 0.0) for row in space.mean_constraint_rows()]


@dataclass(eq=False)
class InvariantMeasureA:
    r_h: FeFunction
    r_hat_h: FeFunction
    report: SolveReport
    min_vertex_value: float
    matrix: object = None
    rhs: Optional[np.ndarray] = None

    @property
    def positive(self):
        return self.min_vertex_value > 0


def solve_invariant_a(field: CoefficientField, N, quad=None, cut_quad=None,
                      tol=1e-10, method="direct") -> InvariantMeasureA:
    """Discrete invariant measure ``r_h = 1 + rhat_h``.

    ``rhat_h`` is mean-zero and satisfies
    ``a(rhat_h, v) = int (b - div A) . grad v`` for all mean-zero P1 ``v``.
    """
    _require_a(field)
    mesh = build_periodic_mesh(N)
    space = build_space(mesh, SCALAR, mean_zero=True)
    M = assemble_form_a(field, space, quad, cut_quad)
    groups = _groups(field, space, quad, cut_quad)
    rhs = load_vector(space, groups,
                      lambda g: field.eval_b(g.points) - field.eval_divA(g.points))
    system = SparseSystem(M, rhs, mean_zero_constraints(space))
    x, report = solve(system, tol=tol, method=method)
    r_hat = FeFunction(space, x)
    r_h = FeFunction(build_space(mesh, SCALAR, mean_zero=False), 1.0 + x)
    vmin = float(r_h.coeffs.min())
    if vmin <= 0:
        log.warning("discrete invariant measure is not positive (min vertex value %.3e)", vmin)
    return InvariantMeasureA(r_h=r_h, r_hat_h=r_hat, report=report, min_vertex_value=vmin,
                             matrix=M, rhs=rhs)


def solve_nonhomogeneous_a(field: CoefficientField, F: Callable, N, quad=None,
                           cut_quad=None, tol=1e-10, method="direct"):
    """Mean-zero ``u_h`` with ``a(u_h, v) = -int F . grad v`` for all mean-zero ``v``.

    ``F`` maps points ``(..., 2)`` to vectors ``(..., 2)``. Returns
    ``(u_h, SolveReport)``.
    """
    _require_a(field)
    mesh = build_periodic_mesh(N)
    space = build_space(mesh, SCALAR, mean_zero=True)
    M = assemble_form_a(field, space, quad, cut_quad)
    groups = _groups(field, space, quad, cut_quad)
    rhs = -load_vector(space, groups, lambda g: F(g.points))
    x, report = solve(SparseSystem(M, rhs, mean_zero_constraints(space)), tol=tol,
                      method=method)
    return FeFunction(space, x), report
