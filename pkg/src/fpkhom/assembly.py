"""Scatter element contributions into global sparse arrays."""

import numpy as np
import scipy.sparse as sp


def scatter_matrix(dofs, local, n):
    """Sum local ``(E, k, k)`` blocks into an ``n x n`` CSR matrix.

    ``local[e, a, b]`` lands at row ``dofs[e, a]``, column ``dofs[e, b]``.
    Duplicates are summed in a fixed order, so results are reproducible.
    """
    k = dofs.shape[1]
    rows = np.repeat(dofs, k, axis=1).ravel()
    cols = np.tile(dofs, (1, k)).ravel()
    M = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M.sum_duplicates()
    return M


def scatter_vector(dofs, local, n):
    """Sum local ``(E, k)`` or ``(E, k, m)`` contributions into a global array."""
    if local.ndim == 2:
        out = np.zeros(n)
        np.add.at(out, dofs.ravel(), local.ravel())
        return out
    m = local.shape[2]
    out = np.zeros((n, m))
    np.add.at(out, dofs.ravel(), local.reshape(-1, m))
    return out


def vector_dofs(triangles):
    """Interleaved vector dofs per element: local index ``2*a + c``."""
    return np.stack([2 * triangles, 2 * triangles + 1], axis=-1).reshape(len(triangles), 6)
