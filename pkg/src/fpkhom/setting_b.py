"""Invariant measure and nonhomogeneous problems under a Cordes-type condition.

The renormalized problem is solved through the vector-valued form

    B2(v, w) = int div(v) (At : Dw + bt . w)
             + 1/2 int (Dv - Dv^T) : (Dw - Dw^T)

over mean-zero P1 vector fields (first argument = trial/column), and the
scalar density is recovered as ``rt_h = 1 - div(rho_h)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .assembly import scatter_matrix, scatter_vector, vector_dofs
from .coefficients import CoefficientField, RenormalizedField, renormalize
from .errors import ConfigurationError, InvalidInvariantError
from .fem import VECTOR2, FeFunction, FeSpace, build_space
from .linalg import Constraint, Factorization, SolveReport, SparseSystem
from .mesh import PeriodicMesh, build_periodic_mesh
from .quadrature import QuadratureRule, integration_groups

log = logging.getLogger(__name__)


def _require_b(field):
    if not field.supports_setting_b:
        raise ConfigurationError(f"field {field.name!r} is not flagged for Setting B")


def _vector_grads(mesh, elements):
    """``dV[e, 2a+c, i, k]`` = entry ``(i, k)`` of ``D(phi_a e_c)``."""
    G = mesh.basis_gradients[elements]  # (E, 3, 2)
    E = len(elements)
    dV = np.zeros((E, 3, 2, 2, 2))
    for c in range(2):
        dV[:, :, c, c, :] = G
    return dV.reshape(E, 6, 2, 2)


def _vector_bary(bary):
    """``phi_a e_c`` values at quadrature points, shape ``(q, 6, 2)``."""
    q = bary.shape[0]
    out = np.zeros((q, 3, 2, 2))
    for c in range(2):
        out[:, :, c, c] = bary
    return out.reshape(q, 6, 2)


def assemble_B2(ren: RenormalizedField, space: FeSpace, quad: Optional[QuadratureRule] = None,
                cut_quad=None):
    """Matrix with entries ``B2(w_col, w_row)``."""
    mesh = space.mesh
    lines = ren.base.discontinuity_lines
    blocks, dofs = [], []
    for grp in integration_groups(mesh, lines, quad, cut_quad):
        _, At, bt = ren.eval_all(grp.points)
        dV = _vector_grads(mesh, grp.elements)            # (E, 6, 2, 2)
        div = dV[:, :, 0, 0] + dV[:, :, 1, 1]             # (E, 6)
        # At:Dw + bt.w for every test function, at every quadrature point
        test = np.einsum("eqik,erik->eqr", At, dV)
        test += np.einsum("eqi,qri->eqr", bt, _vector_bary(grp.bary))
        K = np.einsum("eq,es,eqr->ers", grp.weights, div, test)
        skew = dV - dV.transpose(0, 1, 3, 2)
        area = grp.weights.sum(axis=1)
        K += 0.5 * area[:, None, None] * np.einsum("esik,erik->ers", skew, skew)
        blocks.append(K)
        dofs.append(vector_dofs(mesh.triangles[grp.elements]))
    return scatter_matrix(np.concatenate(dofs), np.concatenate(blocks), space.dof_count)


def _vector_load(space, groups, integrand):
    """Assemble ``sum_q w * integrand(grp)[e, q, r]`` per local vector dof ``r``."""
    loc, dofs = [], []
    for grp in groups:
        loc.append(np.einsum("eq,eqr...->er...", grp.weights, integrand(grp)))
        dofs.append(vector_dofs(space.mesh.triangles[grp.elements]))
    return scatter_vector(np.concatenate(dofs), np.concatenate(loc), space.dof_count)


def invariant_rhs(ren, space, groups):
    """``int At : Dw + bt . w`` for every basis field ``w``."""
    def integrand(grp):
        _, At, bt = ren.eval_all(grp.points)
        dV = _vector_grads(space.mesh, grp.elements)
        out = np.einsum("eqik,erik->eqr", At, dV)
        out += np.einsum("eqi,qri->eqr", bt, _vector_bary(grp.bary))
        return out
    return _vector_load(space, groups, integrand)


def force_rhs(F, space, groups):
    """``-int F . w`` for every basis field ``w``."""
    def integrand(grp):
        return -np.einsum("eqi,qri->eqr", F(grp.points), _vector_bary(grp.bary))
    return _vector_load(space, groups, integrand)


def divergence_rhs(weight, space, groups):
    """``-int weight * div(w)`` for every basis field ``w``.

    ``weight(grp)`` returns ``(E, q)`` values, or ``(E, q, m)`` for ``m``
    right-hand sides at once.
    """
    def integrand(grp):
        dV = _vector_grads(space.mesh, grp.elements)
        div = dV[:, :, 0, 0] + dV[:, :, 1, 1]
        wv = weight(grp)
        if wv.ndim == 2:
            return -wv[:, :, None] * div[:, None, :]
        return -wv[:, :, None, :] * div[:, None, :, None]
    return _vector_load(space, groups, integrand)


def mean_zero_constraints(space):
    return [Constraint(row, 0.0) for row in space.mean_constraint_rows()]


@dataclass(eq=False)
class PiecewiseDensity:
    """``r_h(y) = gamma(y) * rt_h(y) / mass`` with ``rt_h`` elementwise constant."""

    mesh: PeriodicMesh
    ren: RenormalizedField
    rtilde: np.ndarray
    mass: float

    def eval(self, points):
        elem, _ = self.mesh.locate(points)
        return self.ren.eval_gamma(points) * self.rtilde[elem] / self.mass

    __call__ = eval

    def quad_values(self, group):
        g = self.ren.eval_gamma(group.points)
        return g * self.rtilde[group.elements][:, None] / self.mass


@dataclass(eq=False)
class ElementConstant:
    """A piecewise-constant scalar field (one value per triangle)."""

    mesh: PeriodicMesh
    values: np.ndarray

    def eval(self, points):
        elem, _ = self.mesh.locate(points)
        return self.values[elem]

    __call__ = eval

    def quad_values(self, group):
        q = group.bary.shape[0]
        return np.repeat(self.values[group.elements][:, None], q, axis=1)

    def integral(self):
        return float(np.dot(self.mesh.areas, self.values))


@dataclass(eq=False)
class InvariantMeasureB:
    rho_h: FeFunction
    rtilde_h: ElementConstant
    mass_gamma: float
    r_h: PiecewiseDensity
    report: SolveReport
    ren: RenormalizedField
    matrix: object = None
    negative_count: int = 0
    negative_min: float = 0.0

    def r_h_eval(self, points):
        return self.r_h.eval(points)

    @property
    def rtilde_mass(self):
        return self.rtilde_h.integral()


def setup_b(field: CoefficientField, N, quad=None, cut_quad=None, ren=None):
    """Mesh, space, renormalization, quadrature groups and the B2 matrix."""
    _require_b(field)
    mesh = build_periodic_mesh(N)
    space = build_space(mesh, VECTOR2, mean_zero=True)
    ren = ren or renormalize(field)
    groups = integration_groups(mesh, field.discontinuity_lines, quad, cut_quad)
    M = assemble_B2(ren, space, quad, cut_quad)
    return mesh, space, ren, groups, M


def solve_invariant_b(field: CoefficientField, N, quad=None, cut_quad=None, tol=1e-10,
                      ren=None) -> InvariantMeasureB:
    """Discrete invariant measure via ``rho_h`` and ``rt_h = 1 - div(rho_h)``."""
    mesh, space, ren, groups, M = setup_b(field, N, quad, cut_quad, ren)
    rhs = invariant_rhs(ren, space, groups)
    x, report = Factorization(SparseSystem(M, rhs, mean_zero_constraints(space))).solve(tol=tol)
    rho = FeFunction(space, x)
    rt = ElementConstant(mesh, 1.0 - rho.divergence())
    mass = 0.0
    for grp in groups:
        mass += float(np.sum(grp.weights * ren.eval_gamma(grp.points)
                             * rt.values[grp.elements][:, None]))
    if not mass > 0:
        raise InvalidInvariantError(f"int gamma * rt_h = {mass:.3e} is not positive")
    neg = rt.values < 0
    if neg.any():
        log.warning("rt_h is negative on %d triangles (min %.3e)", int(neg.sum()),
                    float(rt.values.min()))
    return InvariantMeasureB(rho_h=rho, rtilde_h=rt, mass_gamma=mass,
                             r_h=PiecewiseDensity(mesh, ren, rt.values, mass),
                             report=report, ren=ren, matrix=M,
                             negative_count=int(neg.sum()),
                             negative_min=float(min(rt.values.min(), 0.0)))


def solve_nonhomogeneous_b(field: CoefficientField, F: Callable, N, quad=None, cut_quad=None,
                           tol=1e-10):
    """``u_h = -div(rho_h)`` with ``B2(rho_h, w) = -int F . w``.

    Returns ``(u_h, rho_h, SolveReport)``; ``u_h`` is elementwise constant
    and solves the renormalized problem (multiply by ``gamma`` for the
    original one).
    """
    mesh, space, ren, groups, M = setup_b(field, N, quad, cut_quad)
    rhs = force_rhs(F, space, groups)
    x, report = Factorization(SparseSystem(M, rhs, mean_zero_constraints(space))).solve(tol=tol)
    rho = FeFunction(space, x)
    return ElementConstant(mesh, -rho.divergence()), rho, report
