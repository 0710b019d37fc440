"""Periodic correctors ``chi_j`` and the centering check.

Setting A solves for ``chi_j`` directly in the weighted form

    int r_h A grad(chi) . grad(v) - int v beta_h . grad(chi) = int r_h b_j v,
    beta_h = r_h b - (r_h div A + A grad r_h),

while Setting B approximates ``xi_j = grad(chi_j)`` with the adjoint of the
vector form used for the invariant measure.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from .assembly import scatter_matrix, scatter_vector
from .coefficients import CoefficientField
from .errors import ConfigurationError
from .fem import SCALAR, FeFunction, build_space
from .linalg import Factorization, SolveReport, SparseSystem
from .mesh import build_periodic_mesh
from .quadrature import integration_groups
from .setting_a import _require_a, mean_zero_constraints
from .setting_b import divergence_rhs, setup_b

log = logging.getLogger(__name__)

CENTERING_TOL = 1e-8


def _density_at(r, grp, mesh):
    """Values ``(E, q)`` and gradients ``(E, q, 2)`` of a density at ``grp``.

    ``r`` is a scalar :class:`FeFunction` (on ``mesh`` or any other mesh)
    or an analytic field with ``quad_values``/``quad_gradients``.
    """
    if isinstance(r, FeFunction):
        if r.mesh.n_side == mesh.n_side:
            return r.quad_values(grp), r.quad_gradients(grp)
        elem, _ = r.mesh.locate(grp.points)
        return r.eval(grp.points), r.element_gradients()[elem]
    return r.quad_values(grp), r.quad_gradients(grp)


def check_centering(field: CoefficientField, invariant, quad=None, N_quad=64, cut_quad=None,
                    warn=True):
    """``<b> = int b r`` over the cell.

    ``invariant`` may be anything exposing ``quad_values`` (discrete or
    analytic density) or a plain callable of points ``(..., 2)``. The
    check is advisory: a warning is logged when ``|<b>|`` exceeds
    ``CENTERING_TOL``.
    """
    mesh = build_periodic_mesh(N_quad)
    total = np.zeros(2)
    for grp in integration_groups(mesh, field.discontinuity_lines, quad, cut_quad):
        if hasattr(invariant, "quad_values"):
            r = invariant.quad_values(grp)
        else:
            r = np.asarray(invariant(grp.points), dtype=float)
        total += np.einsum("eq,eq,eqi->i", grp.weights, r, field.eval_b(grp.points))
    if warn and np.max(np.abs(total)) > CENTERING_TOL:
        log.warning("centering condition fails: <b> = (%.3e, %.3e)", *total)
    return total


@dataclass(eq=False)
class CorrectorA:
    chi_h: List[FeFunction]
    reports: List[SolveReport]
    matrix: object = None

    @property
    def report(self):
        return self.reports[0]


@dataclass(eq=False)
class CorrectorB:
    xi_h: List[FeFunction]
    reports: List[SolveReport]
    matrix: object = None

    @property
    def report(self):
        return self.reports[0]


def assemble_corrector_a(field, space, r_h, quad=None, cut_quad=None):
    """Matrix and the two right-hand sides (columns ``j = 1, 2``)."""
    mesh = space.mesh
    G = mesh.basis_gradients
    blocks, loads, dofs = [], [], []
    for grp in integration_groups(mesh, field.discontinuity_lines, quad, cut_quad):
        A = field.eval_A(grp.points)
        b = field.eval_b(grp.points)
        r, dr = _density_at(r_h, grp, mesh)
        beta = r[..., None] * (b - field.eval_divA(grp.points)) - np.einsum("eqij,eqj->eqi", A, dr)
        g = G[grp.elements]
        w = grp.weights * r
        K = np.einsum("eq,eqij,ebj,eai->eab", w, A, g, g)
        K -= np.einsum("eq,qa,eqi,ebi->eab", grp.weights, grp.bary, beta, g)
        blocks.append(K)
        loads.append(np.einsum("eq,eqj,qa->eaj", w, b, grp.bary))
        dofs.append(mesh.triangles[grp.elements])
    dofs = np.concatenate(dofs)
    M = scatter_matrix(dofs, np.concatenate(blocks), space.dof_count)
    return M, scatter_vector(dofs, np.concatenate(loads), space.dof_count)


def solve_correctors_a(field: CoefficientField, r_h, N, quad=None, cut_quad=None,
                       tol=1e-10) -> CorrectorA:
    """Both correctors with one factorization."""
    _require_a(field)
    space = build_space(build_periodic_mesh(N), SCALAR, mean_zero=True)
    M, rhs = assemble_corrector_a(field, space, r_h, quad, cut_quad)
    fac = Factorization(SparseSystem(M, rhs[:, 0], mean_zero_constraints(space)))
    chis, reports = [], []
    for j in range(2):
        x, rep = fac.solve(rhs[:, j], tol=tol)
        chis.append(FeFunction(space, x))
        reports.append(rep)
    return CorrectorA(chis, reports, M)


def solve_corrector_a(field: CoefficientField, r_h, j, N, quad=None, cut_quad=None,
                      tol=1e-10) -> FeFunction:
    """Corrector ``chi_j`` (``j`` in ``{1, 2}``)."""
    _check_j(j)
    return solve_correctors_a(field, r_h, N, quad, cut_quad, tol).chi_h[j - 1]


def _check_j(j):
    if j not in (1, 2):
        raise ConfigurationError(f"component j must be 1 or 2, got {j!r}")


def solve_correctors_b(field: CoefficientField, N, quad=None, cut_quad=None, tol=1e-10,
                       ren=None) -> CorrectorB:
    """``xi_j`` with ``B2(w, xi_j) = -int bt_j div(w)`` for every ``w``.

    The unknown sits in the second slot, so the system matrix is the
    transpose of the invariant-measure matrix.
    """
    mesh, space, ren, groups, M = setup_b(field, N, quad, cut_quad, ren)
    MT = M.T.tocsr()
    rhs = divergence_rhs(lambda g: ren.eval_btilde(g.points), space, groups)
    fac = Factorization(SparseSystem(MT, rhs[:, 0], mean_zero_constraints(space)))
    xis, reports = [], []
    for j in range(2):
        x, rep = fac.solve(rhs[:, j], tol=tol)
        xis.append(FeFunction(space, x))
        reports.append(rep)
    return CorrectorB(xis, reports, MT)


def solve_corrector_b(field: CoefficientField, j, N, quad=None, cut_quad=None,
                      tol=1e-10) -> FeFunction:
    _check_j(j)
    return solve_correctors_b(field, N, quad, cut_quad, tol).xi_h[j - 1]
