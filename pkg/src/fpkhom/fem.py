"""P1 periodic finite element spaces, functions and error norms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .mesh import PeriodicMesh
from .quadrature import QuadratureRule, integration_groups

SCALAR = "scalar"
VECTOR2 = "vector2"


@dataclass(frozen=True, eq=False)
class FeSpace:
    """Continuous periodic piecewise-affine functions on ``mesh``.

    Vector-valued dofs are interleaved: dof ``2*k + c`` is component ``c`` at
    vertex ``k``. With ``mean_zero`` the solvers impose ``int v = 0`` per
    component through Lagrange multipliers; the basis itself is unchanged.
    """

    mesh: PeriodicMesh
    rank: str = SCALAR
    mean_zero: bool = False

    @property
    def ncomp(self):
        return 1 if self.rank == SCALAR else 2

    @property
    def dof_count(self):
        return self.ncomp * self.mesh.n_vertices

    def hat_integrals(self):
        """``int phi_k`` for every vertex hat function."""
        m = self.mesh
        out = np.zeros(m.n_vertices)
        np.add.at(out, m.triangles.ravel(), np.repeat(m.areas / 3.0, 3))
        return out

    def mean_constraint_rows(self):
        """Rows ``c`` with ``c @ coeffs = int v`` (one per component)."""
        w = self.hat_integrals()
        if self.ncomp == 1:
            return [w]
        rows = []
        for c in range(2):
            row = np.zeros(self.dof_count)
            row[c::2] = w
            rows.append(row)
        return rows

    def element_dofs(self, component=0):
        """Global dof numbers of the three local vertices, shape ``(E, 3)``."""
        t = self.mesh.triangles
        return t if self.ncomp == 1 else 2 * t + component

    def interpolate(self, g):
        """Nodal interpolant of ``g`` (maps ``(n, 2)`` points to values)."""
        vals = np.asarray(g(self.mesh.vertices), dtype=float)
        if self.ncomp == 1:
            coeffs = vals.reshape(-1)
        else:
            coeffs = vals.reshape(-1, 2).ravel()
        return FeFunction(self, coeffs)

    def zero(self):
        return FeFunction(self, np.zeros(self.dof_count))

    def project_mean_zero(self, f):
        """Subtract the mean of each component (exact for P1 functions)."""
        coeffs = f.coeffs.copy()
        total = self.hat_integrals().sum()
        for c, row in enumerate(self.mean_constraint_rows()):
            mean = row @ coeffs / total
            if self.ncomp == 1:
                coeffs -= mean
            else:
                coeffs[c::2] -= mean
        return FeFunction(FeSpace(self.mesh, self.rank, True), coeffs)


def build_space(mesh, rank=SCALAR, mean_zero=False) -> FeSpace:
    if rank not in (SCALAR, VECTOR2):
        raise ConfigurationError(f"unknown rank {rank!r}")
    return FeSpace(mesh=mesh, rank=rank, mean_zero=mean_zero)


@dataclass(eq=False)
class FeFunction:
    """Coefficient vector over an :class:`FeSpace`."""

    space: FeSpace
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.space.dof_count,):
            raise ConfigurationError(
                f"expected {self.space.dof_count} coefficients, got {self.coeffs.shape}")

    @property
    def mesh(self):
        return self.space.mesh

    def nodal(self):
        """Vertex values, shape ``(V,)`` or ``(V, 2)``."""
        if self.space.ncomp == 1:
            return self.coeffs
        return self.coeffs.reshape(-1, 2)

    def local_values(self):
        """Vertex values per element, shape ``(E, 3)`` or ``(E, 3, 2)``."""
        return self.nodal()[self.mesh.triangles]

    def __call__(self, points):
        return self.eval(points)

    def eval(self, points):
        pts = np.asarray(points, dtype=float)
        elem, bary = self.mesh.locate(pts)
        loc = self.local_values()[elem]
        if self.space.ncomp == 1:
            return np.einsum("...a,...a->...", loc, bary)
        return np.einsum("...ac,...a->...c", loc, bary)

    def element_gradients(self):
        """Per-element constant gradient, ``(E, 2)``; vector fields give
        the Jacobian ``(E, 2, 2)`` with row ``c`` the gradient of component ``c``."""
        g = self.mesh.basis_gradients
        loc = self.local_values()
        if self.space.ncomp == 1:
            return np.einsum("ea,ead->ed", loc, g)
        return np.einsum("eac,ead->ecd", loc, g)

    def grad_on_element(self, t):
        return self.element_gradients()[t]

    def divergence(self):
        """Piecewise-constant divergence of a vector field, ``(E,)``."""
        if self.space.ncomp != 2:
            raise ConfigurationError("divergence needs a vector2 function")
        D = self.element_gradients()
        return D[:, 0, 0] + D[:, 1, 1]

    def mean(self):
        total = self.space.hat_integrals().sum()
        return np.array([row @ self.coeffs / total
                         for row in self.space.mean_constraint_rows()])

    def quad_values(self, group):
        loc = self.local_values()[group.elements]
        if self.space.ncomp == 1:
            return np.einsum("ea,qa->eq", loc, group.bary)
        return np.einsum("eac,qa->eqc", loc, group.bary)

    def quad_gradients(self, group):
        g = self.element_gradients()[group.elements]
        q = group.bary.shape[0]
        return np.repeat(g[:, None], q, axis=1)


@dataclass(eq=False)
class AnalyticField:
    """Reference function with optional gradient and known breakpoints.

    ``value`` maps points ``(..., 2)`` to ``(...)`` or ``(..., k)``;
    ``grad`` maps to ``(..., 2)`` or ``(..., k, 2)``.
    """

    value: Callable[[np.ndarray], np.ndarray]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    breakpoints: Sequence[float] = ()

    def quad_values(self, group):
        return self.value(group.points)

    def quad_gradients(self, group):
        if self.grad is None:
            raise ConfigurationError("reference has no gradient")
        return self.grad(group.points)


def constant_field(c):
    c = np.asarray(c, dtype=float)

    def value(y):
        return np.broadcast_to(c, y.shape[:-1] + c.shape).copy()

    def grad(y):
        return np.zeros(y.shape[:-1] + c.shape + (2,))

    return AnalyticField(value, grad)


def integrate(f, mesh, lines=(), rule=None, cut_rule=None):
    """Quadrature of ``f`` (anything with ``quad_values``) over the cell."""
    total = 0.0
    for grp in integration_groups(mesh, lines, rule, cut_rule):
        v = f.quad_values(grp)
        total = total + np.tensordot(grp.weights, v, axes=([0, 1], [0, 1]))
    return float(total) if np.ndim(total) == 0 else total


def _pointwise_norm(v, extra_dims):
    if extra_dims == 0:
        return np.abs(v)
    axes = tuple(range(-extra_dims, 0))
    return np.sqrt((v * v).sum(axis=axes))


NORMS = ("L", "W1", "H1semi")


def parse_norm(norm):
    """Accept ``("L", p)``, ``("W1", p)``, ``"H1semi"``, ``"L2"``, ``"H1"``, ``"W13"``..."""
    if isinstance(norm, tuple):
        kind, p = norm
        return kind, float(p)
    s = str(norm)
    if s == "H1semi":
        return "H1semi", 2.0
    if s == "H1":
        return "W1", 2.0
    if s.startswith("W1"):
        return "W1", float(s[2:])
    if s.startswith("L"):
        return "L", float(s[1:])
    raise ConfigurationError(f"unknown norm {norm!r}")


def error_norm(f_h, f_ref, norm, quad: Optional[QuadratureRule] = None,
               cut_quad: Optional[QuadratureRule] = None, lines=None, mesh=None):
    """Norm of ``f_h - f_ref`` by element quadrature.

    Elements crossing any of ``lines`` (default: the reference's breakpoints)
    use ``cut_quad``. ``f_h`` is any discrete field with ``quad_values`` (and
    ``quad_gradients`` for Sobolev norms).
    """
    kind, p = parse_norm(norm)
    if p < 1:
        raise ConfigurationError("norm exponent p must be >= 1")
    mesh = mesh or f_h.mesh
    if lines is None:
        lines = tuple(getattr(f_ref, "breakpoints", ()))
    val_sum = 0.0
    grad_sum = 0.0
    for grp in integration_groups(mesh, lines, quad, cut_quad):
        if kind in ("L", "W1"):
            d = f_h.quad_values(grp) - f_ref.quad_values(grp)
            val_sum += float(np.sum(grp.weights * _pointwise_norm(d, d.ndim - 2) ** p))
        if kind in ("W1", "H1semi"):
            d = f_h.quad_gradients(grp) - f_ref.quad_gradients(grp)
            grad_sum += float(np.sum(grp.weights * _pointwise_norm(d, d.ndim - 2) ** p))
    if kind == "L":
        return val_sum ** (1 / p)
    if kind == "H1semi":
        return grad_sum ** 0.5
    return (val_sum + grad_sum) ** (1 / p)
