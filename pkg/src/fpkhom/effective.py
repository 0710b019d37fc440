"""Effective (homogenized) diffusion matrix ``int r [I + X] A [I + X]^T``.

``X`` has row ``j`` equal to ``grad chi_j`` (Setting A) or ``xi_j``
(Setting B), so ``[I + X]_{jk} = delta_jk + X_jk``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientField
from .errors import ConfigurationError, InvalidInvariantError
from .quadrature import integration_groups


@dataclass(frozen=True, eq=False)
class EffectiveMatrix:
    value: np.ndarray
    setting: str
    mesh_N: int
    asymmetry: float
    spd_check: float

    @property
    def spd(self):
        return self.spd_check > 0


def _integrate(field, mesh, density, rows, quad, cut_quad):
    """``int r (I + X) A (I + X)^T`` with ``rows(grp)`` giving ``X`` as ``(E, q, 2, 2)``."""
    total = np.zeros((2, 2))
    for grp in integration_groups(mesh, field.discontinuity_lines, quad, cut_quad):
        M = np.eye(2) + rows(grp)
        A = field.eval_A(grp.points)
        MAMt = np.einsum("eqij,eqjk,eqlk->eqil", M, A, M)
        total += np.einsum("eq,eq,eqil->il", grp.weights, density(grp), MAMt)
    return total


def _result(value, setting, N):
    asym = float(np.linalg.norm(value - value.T))
    lam = float(np.linalg.eigvalsh(0.5 * (value + value.T)).min())
    return EffectiveMatrix(value=value, setting=setting, mesh_N=N, asymmetry=asym, spd_check=lam)


def _same_mesh(mesh, *functions):
    for f in functions:
        if f.mesh.n_side != mesh.n_side:
            raise ConfigurationError(
                f"mesh mismatch: N={f.mesh.n_side} vs N={mesh.n_side}")


def effective_matrix_a(field: CoefficientField, r_h, chi, quad=None,
                       cut_quad=None) -> EffectiveMatrix:
    """Setting A: ``r_h`` is P1, ``grad chi_{j,h}`` elementwise constant."""
    chi_h = chi.chi_h
    mesh = chi_h[0].mesh
    _same_mesh(mesh, r_h, *chi_h)
    D = np.stack([c.element_gradients() for c in chi_h], axis=1)  # (E, 2, 2)

    def rows(grp):
        return np.repeat(D[grp.elements][:, None], grp.bary.shape[0], axis=1)

    value = _integrate(field, mesh, r_h.quad_values, rows, quad, cut_quad)
    return _result(value, "A", mesh.n_side)


def effective_matrix_b(field: CoefficientField, inv, xi, quad=None,
                       cut_quad=None) -> EffectiveMatrix:
    """Setting B: normalized ``r_h = gamma rt_h / int gamma rt_h`` and P1 ``xi_{j,h}``."""
    if not inv.mass_gamma > 0:
        raise InvalidInvariantError(f"int gamma * rt_h = {inv.mass_gamma:.3e} is not positive")
    xi_h = xi.xi_h
    mesh = xi_h[0].mesh
    _same_mesh(mesh, inv.rho_h, *xi_h)

    def rows(grp):
        return np.stack([x.quad_values(grp) for x in xi_h], axis=2)

    value = _integrate(field, mesh, inv.r_h.quad_values, rows, quad, cut_quad)
    return _result(value, "B", mesh.n_side)
