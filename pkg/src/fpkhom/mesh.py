"""Structured periodic triangulation of the unit cell."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError

# vertex offsets (in units of h) of the two triangles of a square cell,
# both split along the diagonal from (0, 0) to (1, 1)
_LOWER = np.array([[0, 0], [1, 0], [1, 1]])
_UPPER = np.array([[0, 0], [1, 1], [0, 1]])


@dataclass(frozen=True, eq=False)
class PeriodicMesh:
    """Uniform ``N x N`` periodic mesh with ``2 N^2`` right triangles.

    Vertex ``(i, j)`` sits at ``(i/N, j/N)`` and has index ``i + N*j``.
    Cell ``(i, j)`` owns triangles ``2c`` (below the diagonal) and ``2c + 1``
    (above), with ``c = i + N*j``. ``tri_coords`` holds the *unwrapped*
    vertex coordinates, so elements touching ``y = 1`` reach past the cell;
    ``triangles`` holds the periodic vertex indices.
    """

    n_side: int
    vertices: np.ndarray
    triangles: np.ndarray
    tri_coords: np.ndarray

    @property
    def h(self):
        return 1.0 / self.n_side

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    @cached_property
    def signed_areas(self):
        p = self.tri_coords
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def areas(self):
        return np.abs(self.signed_areas)

    @cached_property
    def basis_gradients(self):
        """Constant gradients of the three local hat functions, shape ``(E, 3, 2)``."""
        p = self.tri_coords
        J = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=-1)  # columns = edges
        Jinv = np.linalg.inv(J)
        ref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        # grad phi_a = J^{-T} grad_ref phi_a
        return np.einsum("kd,edc->ekc", ref, Jinv)

    def periodic_map(self, i, j):
        """Vertex index of the grid point ``(i, j)`` after periodic identification."""
        N = self.n_side
        return np.mod(i, N) + N * np.mod(j, N)

    def cut_elements(self, lines):
        """Boolean mask of triangles whose interior meets some ``{y1 = c}``."""
        x = self.tri_coords[:, :, 0]
        lo, hi = x.min(axis=1), x.max(axis=1)
        mask = np.zeros(self.n_triangles, dtype=bool)
        eps = 1e-12
        for c in lines:
            c = float(c) % 1.0
            # element x-range may extend to 1 + h; test c and c + 1
            for cc in (c, c + 1.0):
                mask |= (lo + eps < cc) & (cc < hi - eps)
        return mask

    def locate(self, points):
        """Element index and barycentric coordinates of (wrapped) points."""
        N = self.n_side
        y = np.mod(np.asarray(points, dtype=float), 1.0)
        y[y >= 1.0] = 0.0
        s = y[..., 0] * N
        t = y[..., 1] * N
        i = np.minimum(np.floor(s).astype(int), N - 1)
        j = np.minimum(np.floor(t).astype(int), N - 1)
        s -= i
        t -= j
        lower = t <= s
        cell = i + N * j
        elem = 2 * cell + (~lower)
        bary = np.where(lower[..., None],
                        np.stack([1.0 - s, s - t, t], axis=-1),
                        np.stack([1.0 - t, s, t - s], axis=-1))
        return elem, bary


def build_periodic_mesh(N) -> PeriodicMesh:
    if int(N) != N or N < 2:
        raise ConfigurationError(f"mesh size N must be an integer >= 2, got {N!r}")
    N = int(N)
    h = 1.0 / N
    ii, jj = np.meshgrid(np.arange(N), np.arange(N), indexing="xy")
    i = ii.ravel()  # cell index c = i + N*j in row-major (j outer) order
    j = jj.ravel()
    vertices = np.stack([i * h, j * h], axis=-1)
    tris = np.empty((2 * N * N, 3), dtype=np.int64)
    coords = np.empty((2 * N * N, 3, 2))
    for k, offs in enumerate((_LOWER, _UPPER)):
        for a in range(3):
            di, dj = offs[a]
            tris[k::2, a] = np.mod(i + di, N) + N * np.mod(j + dj, N)
            coords[k::2, a, 0] = (i + di) * h
            coords[k::2, a, 1] = (j + dj) * h
    return PeriodicMesh(n_side=N, vertices=vertices, triangles=tris, tri_coords=coords)
