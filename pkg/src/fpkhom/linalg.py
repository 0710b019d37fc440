"""Sparse saddle-point solves with mean-value constraints."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolveError

DEFAULT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Constraint:
    row: np.ndarray
    target: float = 0.0


@dataclass(eq=False)
class SparseSystem:
    """``M x = rhs`` subject to ``c_i . x = tau_i``.

    ``rhs`` may be 2-D with one column per right-hand side; all columns share
    the constraints. The solver receives the bordered matrix
    ``[[M, C^T], [C, 0]]``.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    constraints: list = field(default_factory=list)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def augmented(self):
        M = sp.csr_matrix(self.matrix)
        m = len(self.constraints)
        rhs = np.asarray(self.rhs, dtype=float)
        if m == 0:
            return M, rhs
        C = sp.csr_matrix(np.vstack([c.row for c in self.constraints]))
        K = sp.bmat([[M, C.T], [C, None]], format="csc")
        tau = np.array([c.target for c in self.constraints], dtype=float)
        if rhs.ndim == 2:
            tau = np.repeat(tau[:, None], rhs.shape[1], axis=1)
        return K, np.concatenate([rhs, tau])


@dataclass(frozen=True)
class SolveReport:
    method: str
    relative_residual: float
    iterations: int
    wall_time: float

    def same_as(self, other):
        """Equality ignoring wall time."""
        return (self.method, self.relative_residual, self.iterations) == \
            (other.method, other.relative_residual, other.iterations)


def _relres(K, z, f):
    r = K @ z - f
    num = np.linalg.norm(r)
    den = np.linalg.norm(f)
    return float(num / den) if den > 0 else float(num)


def residual(system: SparseSystem, x, multipliers=None):
    """Relative Euclidean residual of the bordered system.

    Without explicit multipliers the least-squares optimal ones are used,
    i.e. the residual of ``x`` itself.
    """
    K, f = system.augmented()
    n = system.dimension
    x = np.asarray(x, dtype=float)
    m = len(system.constraints)
    if m == 0:
        return _relres(K, x, f)
    if multipliers is None:
        C = np.vstack([c.row for c in system.constraints])
        r = np.asarray(system.rhs, dtype=float) - system.matrix @ x
        multipliers = np.linalg.lstsq(C.T, r, rcond=None)[0]
    z = np.concatenate([x, np.asarray(multipliers, dtype=float)])
    return _relres(K, z, f)


class Factorization:
    """Reusable sparse LU of a bordered system (for several right-hand sides)."""

    def __init__(self, system: SparseSystem):
        self.system = system
        self.K, _ = system.augmented()
        t0 = time.perf_counter()
        try:
            self.lu = spla.splu(sp.csc_matrix(self.K))
        except RuntimeError as exc:
            raise SolveError(f"sparse LU failed ({exc}); mesh may be too coarse "
                             "for the discrete problem to be uniquely solvable") from exc
        self.factor_time = time.perf_counter() - t0

    def solve(self, rhs=None, tol=DEFAULT_TOL):
        system = self.system
        if rhs is not None:
            system = SparseSystem(system.matrix, rhs, system.constraints)
        _, f = system.augmented()
        t0 = time.perf_counter()
        z = self.lu.solve(f)
        rel = _relres(self.K, z, f)
        report = SolveReport("direct_lu", rel, 0, self.factor_time + time.perf_counter() - t0)
        if not np.all(np.isfinite(z)) or rel > tol:
            raise SolveError(f"direct solve residual {rel:.3e} exceeds tolerance {tol:.1e}; "
                             "mesh may be too coarse for unique solvability", rel)
        return z[: system.dimension], report


def _solve_iterative(system, tol, maxiter=2000, restart=100):
    K, f = system.augmented()
    t0 = time.perf_counter()
    d = K.diagonal()
    d = np.where(np.abs(d) > 0, d, 1.0)
    P = spla.LinearOperator(K.shape, matvec=lambda v: v / d)
    cols = f if f.ndim == 2 else f[:, None]
    out = np.empty_like(cols)
    iters = 0
    for k in range(cols.shape[1]):
        count = [0]

        def cb(_):
            count[0] += 1

        z, info = spla.gmres(K, cols[:, k], rtol=tol * 0.1, atol=0.0, restart=restart,
                             maxiter=maxiter, M=P, callback=cb, callback_type="pr_norm")
        out[:, k] = z
        iters += count[0]
    z = out if f.ndim == 2 else out[:, 0]
    rel = _relres(K, z, f)
    report = SolveReport("iterative", rel, iters, time.perf_counter() - t0)
    if not np.all(np.isfinite(z)) or rel > tol:
        raise SolveError(f"GMRES residual {rel:.3e} exceeds tolerance {tol:.1e}", rel)
    return z[: system.dimension], report


def solve(system: SparseSystem, tol=DEFAULT_TOL, method="direct"):
    """Solve the constrained system; the multipliers are discarded.

    Returns ``(x, SolveReport)``. Raises :class:`SolveError` when the
    bordered matrix is singular or the residual exceeds ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if method == "direct":
        return Factorization(system).solve(tol=tol)
    if method == "iterative":
        return _solve_iterative(system, tol)
    raise ValueError(f"unknown method {method!r}")
