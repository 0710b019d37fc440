"""Semi-analytic reference solutions for the two built-in non-constant problems.

For coefficients depending on ``y1`` only, the invariant measure and the
correctors reduce to one-dimensional integrals of

    K(t) = int_0^t b1(x) / a11(x) dx,

namely ``r = exp(K) / (C1 a11)`` and ``chi_j' = exp(-K) / C2 - 1``. All
integrals are evaluated by composite Gauss-Legendre quadrature on the smooth
pieces between fixed breakpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coefficients import CoefficientField, make_builtin_problem, sample_grid
from .errors import ConfigurationError, FpkError
from .fem import AnalyticField, constant_field

GAUSS_POINTS = 10
MAX_LEVEL = 20
TABLE_SIZE = 2 ** 14

BREAKPOINTS = {
    "setting_a_paper": (0.0, 0.5, 1.0),
    "setting_b_paper": (0.0, 0.25, 0.5, 0.75, 1.0),
}


_A11_PRIME = {
    # d/dt [1 + arcsin(sin^2(pi t))]
    "setting_a_paper": lambda t: (2 * np.pi * np.sin(np.pi * t) * np.sign(np.cos(np.pi * t))
                                  / np.sqrt(1.0 + np.sin(np.pi * t) ** 2)),
    # d/dt [2 + sign(cos(pi t)) sin(pi t)]
    "setting_b_paper": lambda t: np.sign(np.cos(np.pi * t)) * np.pi * np.cos(np.pi * t),
}


class QuadratureNotConverged(FpkError, ArithmeticError):
    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


_GL = np.polynomial.legendre.leggauss(GAUSS_POINTS)


def _composite(f, a, b, m):
    """Gauss-Legendre on ``m`` equal panels of ``[a, b]``."""
    x, w = _GL
    edges = np.linspace(a, b, m + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(f(pts.ravel()), dtype=float)
    vals = vals.reshape((m, len(x)) + vals.shape[1:])
    return np.tensordot(half[:, None] * w[None, :], vals, axes=([0, 1], [0, 1]))


def quad1d(f, breakpoints=(0.0, 1.0), tol=1e-10, a=None, b=None):
    """Integral of a piecewise-smooth (possibly vector-valued) ``f``.

    ``breakpoints`` must include the endpoints and every location where
    ``f`` is not smooth; duplicates are ignored. Each piece is refined
    dyadically until two successive estimates differ by less than ``tol``.
    """
    if tol <= 0:
        raise ConfigurationError("tol must be positive")
    bp = np.unique(np.asarray(breakpoints, dtype=float))
    lo = bp[0] if a is None else a
    hi = bp[-1] if b is None else b
    cuts = np.unique(np.concatenate([[lo, hi], bp[(bp > lo) & (bp < hi)]]))
    total = 0.0
    n_pieces = len(cuts) - 1
    for p, q in zip(cuts[:-1], cuts[1:]):
        prev = _composite(f, p, q, 1)
        for level in range(1, MAX_LEVEL + 1):
            cur = _composite(f, p, q, 2 ** level)
            if np.max(np.abs(cur - prev)) < tol / n_pieces:
                break
            prev = cur
        else:
            raise QuadratureNotConverged(
                f"quad1d did not converge on [{p}, {q}] after {MAX_LEVEL} levels", cur)
        total = total + cur
    return total


class CumulativeIntegral:
    """``t -> int_0^t g`` on ``[0, 1]``, tabulated on a fine grid.

    The table holds exact (to quadrature accuracy) values at ``TABLE_SIZE``
    nodes per smooth piece; between nodes a fixed Gauss-Legendre panel from
    the nearest node to ``t`` finishes the integral.
    """

    def __init__(self, g, breakpoints, tol=1e-12, size=TABLE_SIZE):
        self.g = g
        bp = np.unique(np.asarray(breakpoints, dtype=float))
        nodes = [np.linspace(p, q, size + 1)[:-1] for p, q in zip(bp[:-1], bp[1:])]
        self.nodes = np.concatenate(nodes + [bp[-1:]])
        self.pieces = bp
        x, w = _GL
        # panel integrals between consecutive nodes (never straddle a breakpoint)
        a, b = self.nodes[:-1], self.nodes[1:]
        half = 0.5 * (b - a)
        pts = 0.5 * (a + b)[:, None] + half[:, None] * x[None, :]
        panels = (g(pts.ravel()).reshape(pts.shape) * w[None, :]).sum(axis=1) * half
        self.table = np.concatenate([[0.0], np.cumsum(panels)])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        tt = np.clip(t, 0.0, 1.0)
        k = np.clip(np.searchsorted(self.nodes, tt, side="right") - 1, 0, len(self.nodes) - 2)
        a = self.nodes[k]
        x, w = _GL
        half = 0.5 * (tt - a)
        pts = (a + half)[..., None] + half[..., None] * x
        # evaluate g on the side of the piece containing [a, t]
        return self.table[k] + (self.g(pts.reshape(-1)).reshape(pts.shape) * w).sum(axis=-1) * half


@dataclass(eq=False)
class ReferenceSolution:
    """Exact ``r``, ``chi`` (``chi_1 = chi_2``) and ``Abar`` of a built-in non-constant problem."""

    which: str
    field: CoefficientField
    K: Callable
    neg_exp_cum: Callable
    a11_prime: Callable
    C1: float
    C2: float
    c: float
    Abar: np.ndarray
    breakpoints: tuple
    tol: float

    def a11(self, t):
        t = np.asarray(t, dtype=float)
        return self.field.eval_A(np.stack([t, np.zeros_like(t)], axis=-1))[..., 0, 0]

    def b1(self, t):
        t = np.asarray(t, dtype=float)
        return self.field.eval_b(np.stack([t, np.zeros_like(t)], axis=-1))[..., 0]

    def r(self, t):
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        return np.exp(self.K(t)) / (self.C1 * self.a11(t))

    def r_prime(self, t):
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        a = self.a11(t)
        da = self.a11_prime(t)
        return np.exp(self.K(t)) * (self.b1(t) - da) / (self.C1 * a * a)

    def chi_prime(self, t):
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        return np.exp(-self.K(t)) / self.C2 - 1.0

    def chi_second(self, t):
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        return -self.b1(t) / self.a11(t) * np.exp(-self.K(t)) / self.C2

    def chi(self, t):
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        return self.neg_exp_cum(t) / self.C2 - t + self.c

    # 2-D views (functions of y1 only) ---------------------------------

    def r_field(self):
        def grad(y):
            g = np.zeros(y.shape)
            g[..., 0] = self.r_prime(y[..., 0])
            return g
        return AnalyticField(lambda y: self.r(y[..., 0]), grad, breakpoints=(0.5,))

    def chi_field(self):
        def grad(y):
            g = np.zeros(y.shape)
            g[..., 0] = self.chi_prime(y[..., 0])
            return g
        return AnalyticField(lambda y: self.chi(y[..., 0]), grad, breakpoints=(0.5,))

    def grad_chi_field(self):
        """``grad chi_j = (chi', 0)`` with Jacobian ``[[chi'', 0], [0, 0]]``."""
        def value(y):
            v = np.zeros(y.shape)
            v[..., 0] = self.chi_prime(y[..., 0])
            return v

        def grad(y):
            g = np.zeros(y.shape + (2,))
            g[..., 0, 0] = self.chi_second(y[..., 0])
            return g
        return AnalyticField(value, grad, breakpoints=(0.5,))


def _problem_key(which):
    key = str(which).replace("-", "_")
    if key not in BREAKPOINTS:
        raise ConfigurationError(f"no reference solution for {which!r}")
    return key


def reference_solution(which, tol=1e-10) -> ReferenceSolution:
    key = _problem_key(which)
    field = make_builtin_problem(key)
    bp = BREAKPOINTS[key]

    def pts(t):
        return np.stack([t, np.zeros_like(t)], axis=-1)

    def a11(t):
        return field.eval_A(pts(t))[..., 0, 0]

    def b1(t):
        return field.eval_b(pts(t))[..., 0]

    K = CumulativeIntegral(lambda t: b1(t) / a11(t), bp)
    C1 = float(quad1d(lambda t: np.exp(K(t)) / a11(t), bp, tol))
    C2 = float(quad1d(lambda t: np.exp(-K(t)), bp, tol))
    E = CumulativeIntegral(lambda t: np.exp(-K(t)), bp)
    # chi = int_0^t e^{-K}/C2 - t + c with int_0^1 chi = 0
    c = -float(quad1d(lambda t: E(t) / C2 - t, bp, tol))
    ref = ReferenceSolution(which=key, field=field, K=K, neg_exp_cum=E,
                            a11_prime=_A11_PRIME[key], C1=C1, C2=C2, c=c,
                            Abar=np.zeros((2, 2)), breakpoints=bp, tol=tol)
    ref.Abar = reference_effective_matrix(ref, field, tol)
    return ref


def reference_effective_matrix(ref: ReferenceSolution, field=None, tol=None):
    """``Abar = int_0^1 r M A M^T`` with ``M = [[1 + chi', 0], [chi', 1]]``."""
    field = field or ref.field
    tol = tol or ref.tol

    def integrand(t):
        y = np.stack([t, np.zeros_like(t)], axis=-1)
        A = field.eval_A(y)
        cp = ref.chi_prime(t)
        M = np.zeros(t.shape + (2, 2))
        M[..., 0, 0] = 1.0 + cp
        M[..., 1, 0] = cp
        M[..., 1, 1] = 1.0
        MAMt = np.einsum("...ij,...jk,...lk->...il", M, A, M)
        return (ref.r(t)[..., None, None] * MAMt).reshape(t.shape + (4,))

    return np.asarray(quad1d(integrand, ref.breakpoints, tol)).reshape(2, 2)


@dataclass(eq=False)
class ConstantReference:
    """Exact data for constant ``A`` and ``b = 0``: ``r = 1``, ``chi = 0``, ``Abar = A``."""

    Abar: np.ndarray

    def r_field(self):
        return constant_field(1.0)

    def chi_field(self):
        return constant_field(0.0)

    def grad_chi_field(self):
        return constant_field(np.zeros(2))


def trivial_reference(field: CoefficientField, grid_n=16) -> ConstantReference:
    """Reference for a constant, drift-free field (checked on a sample grid)."""
    y = sample_grid(grid_n)
    A = field.eval_A(y)
    if np.max(np.abs(field.eval_b(y))) > 0 or np.max(np.abs(A - A[0])) > 0:
        raise ConfigurationError(f"no exact reference for {field.name!r}")
    return ConstantReference(Abar=A[0].copy())


def reference_for(field: CoefficientField, tol=1e-10):
    """Oracle for a built-in non-constant problem, else the constant-coefficient reference."""
    if field.name in BREAKPOINTS:
        return reference_solution(field.name, tol)
    return trivial_reference(field)
