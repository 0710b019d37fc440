"""Triangle quadrature rules and per-element integration groups.

Rules live on the reference triangle ``(0,0), (1,0), (0,1)`` (area 1/2).
A composite rule splits the reference triangle into ``s^2`` congruent
subtriangles and applies the base rule on each.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

_SQ15 = np.sqrt(15.0)


def _base_rule(order):
    if order == 2:
        pts = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
        w = np.full(3, 1 / 6)
    elif order == 5:
        a = (6 - _SQ15) / 21
        b = (6 + _SQ15) / 21
        wa = (155 - _SQ15) / 1200
        wb = (155 + _SQ15) / 1200
        pts = np.array([[1 / 3, 1 / 3],
                        [a, a], [1 - 2 * a, a], [a, 1 - 2 * a],
                        [b, b], [1 - 2 * b, b], [b, 1 - 2 * b]])
        w = 0.5 * np.array([9 / 40, wa, wa, wa, wb, wb, wb])
    else:
        raise ConfigurationError(f"unsupported quadrature order {order}; use 2 or 5")
    return pts, w


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    points: np.ndarray   # (q, 2) reference coordinates
    weights: np.ndarray  # (q,), sum = 1/2
    order: int
    subdivision: int = 1

    @property
    def barycentric(self):
        xi, eta = self.points[:, 0], self.points[:, 1]
        return np.stack([1 - xi - eta, xi, eta], axis=-1)

    def integrate_reference(self, f):
        """Integrate ``f(xi, eta)`` over the reference triangle."""
        return float(np.dot(self.weights, f(self.points[:, 0], self.points[:, 1])))


def quadrature(order=5, subdivision=1) -> QuadratureRule:
    """Symmetric triangle rule of the given order, composited on ``s^2`` pieces."""
    if subdivision < 1:
        raise ConfigurationError("subdivision must be >= 1")
    pts, w = _base_rule(order)
    s = int(subdivision)
    if s == 1:
        return QuadratureRule(points=pts, weights=w, order=order)
    all_p, all_w = [], []
    scale = 1.0 / s
    for i in range(s):
        for j in range(s - i):
            # upright subtriangle with corner (i, j)/s
            all_p.append(np.array([i, j]) * scale + pts * scale)
            all_w.append(w * scale ** 2)
            if i + j < s - 1:
                # inverted subtriangle with corner (i+1, j+1)/s, edges -1/s
                all_p.append(np.array([i + 1, j + 1]) * scale - pts * scale)
                all_w.append(w * scale ** 2)
    return QuadratureRule(points=np.concatenate(all_p), weights=np.concatenate(all_w),
                          order=order, subdivision=s)


DEFAULT_RULE = quadrature(5, 1)
DEFAULT_CUT_RULE = quadrature(5, 8)


@dataclass(frozen=True, eq=False)
class QuadGroup:
    """Elements sharing one reference rule, with mapped points and weights.

    ``points`` has shape ``(E, q, 2)`` (unwrapped physical coordinates) and
    ``weights`` shape ``(E, q)`` (physical, summing to the element areas).
    """

    elements: np.ndarray
    bary: np.ndarray
    points: np.ndarray
    weights: np.ndarray

    @property
    def flat_points(self):
        return self.points.reshape(-1, 2)


def integration_groups(mesh, lines=(), rule=None, cut_rule=None):
    """Split the mesh into uncut / cut element groups, each with its rule."""
    rule = rule or DEFAULT_RULE
    cut_rule = cut_rule or DEFAULT_CUT_RULE
    cut = mesh.cut_elements(lines) if len(lines) else np.zeros(mesh.n_triangles, bool)
    groups = []
    for mask, r in ((~cut, rule), (cut, cut_rule)):
        elems = np.flatnonzero(mask)
        if elems.size == 0:
            continue
        bary = r.barycentric
        pts = np.einsum("qa,ead->eqd", bary, mesh.tri_coords[elems])
        w = 2.0 * mesh.areas[elems][:, None] * r.weights[None, :]
        groups.append(QuadGroup(elements=elems, bary=bary, points=pts, weights=w))
    return groups
