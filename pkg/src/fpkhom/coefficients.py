"""Periodic coefficient fields, built-in test problems and Cordes diagnostics.

All evaluators are vectorized: they accept an array of points with trailing
dimension 2 and return arrays of shape ``(..., 2, 2)`` for matrices and
``(..., 2)`` for vectors. Coordinates are reduced modulo 1 before evaluation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, EvaluationError, InvalidCoefficientError

MatrixFn = Callable[[np.ndarray], np.ndarray]
VectorFn = Callable[[np.ndarray], np.ndarray]

BUILTIN_NAMES = ("setting_a_paper", "setting_b_paper", "identity", "const_diag")


def wrap(points):
    """Reduce coordinates to the unit cell ``[0, 1)``."""
    y = np.mod(np.asarray(points, dtype=float), 1.0)
    # np.mod(-tiny, 1.0) rounds to 1.0
    y[y >= 1.0] = 0.0
    return y


@dataclass(frozen=True)
class CoefficientField:
    """Pair ``(A, b)`` of 1-periodic coefficients on the plane.

    ``discontinuity_lines`` lists the values ``c`` of vertical lines
    ``{y1 = c}`` across which ``A``, ``b`` (or ``div A``) jump or kink.
    """

    name: str
    A_fn: MatrixFn
    b_fn: VectorFn
    divA_fn: Optional[VectorFn] = None
    discontinuity_lines: tuple = ()
    supports_setting_a: bool = False
    supports_setting_b: bool = False
    dim: int = 2

    def __post_init__(self):
        if self.supports_setting_a and self.divA_fn is None:
            raise ConfigurationError(
                f"field {self.name!r} claims Setting A support but has no div(A)")

    def eval_A(self, points):
        return self.A_fn(wrap(points))

    def eval_b(self, points):
        return self.b_fn(wrap(points))

    def eval_divA(self, points):
        if self.divA_fn is None:
            raise ConfigurationError(f"field {self.name!r} provides no div(A)")
        return self.divA_fn(wrap(points))

    @property
    def has_divA(self):
        return self.divA_fn is not None


def _mat(a11, a12, a22):
    out = np.empty(a11.shape + (2, 2))
    out[..., 0, 0] = a11
    out[..., 0, 1] = a12
    out[..., 1, 0] = a12
    out[..., 1, 1] = a22
    return out


def _vec(v1, v2):
    return np.stack(np.broadcast_arrays(v1, v2), axis=-1)


def _const_diag(a1, a2, name):
    def A(y):
        shape = y.shape[:-1]
        return _mat(np.full(shape, float(a1)), np.zeros(shape), np.full(shape, float(a2)))

    def zero(y):
        return np.zeros(y.shape)

    return CoefficientField(name=name, A_fn=A, b_fn=zero, divA_fn=zero,
                            supports_setting_a=True, supports_setting_b=True)


def _paper_a():
    def A(y):
        y1 = y[..., 0]
        s = np.sin(np.pi * y1)
        a11 = 1.0 + np.arcsin(s * s)
        return _mat(a11, 0.5 * np.sin(2 * np.pi * y1), 2.0 + np.cos(np.pi * y1) ** 2)

    def b(y):
        s = np.sign(np.sin(2 * np.pi * y[..., 0]))
        return _vec(s, s)

    def divA(y):
        y1 = y[..., 0]
        s = np.sin(np.pi * y1)
        # d/dy1 arcsin(sin^2(pi y1)) with 1 - s^4 = cos^2 (1 + s^2) factored out
        d11 = 2 * np.pi * s * np.sign(np.cos(np.pi * y1)) / np.sqrt(1.0 + s * s)
        return _vec(d11, np.pi * np.cos(2 * np.pi * y1))

    return CoefficientField(name="setting_a_paper", A_fn=A, b_fn=b, divA_fn=divA,
                            discontinuity_lines=(0.5,),
                            supports_setting_a=True, supports_setting_b=True)


def _paper_b():
    def A(y):
        y1 = y[..., 0]
        a11 = 2.0 + np.sign(np.cos(np.pi * y1)) * np.sin(np.pi * y1)
        return _mat(a11, 0.5 * np.sin(2 * np.pi * y1), 2.0 + np.cos(np.pi * y1) ** 2)

    def b(y):
        s = 0.25 + 0.75 * np.sign(np.sin(2 * np.pi * y[..., 0]))
        return _vec(s, s)

    return CoefficientField(name="setting_b_paper", A_fn=A, b_fn=b,
                            discontinuity_lines=(0.5,),
                            supports_setting_a=False, supports_setting_b=True)


def make_builtin_problem(name, *params):
    """Return one of the built-in coefficient fields.

    Accepted names are ``setting_a_paper``, ``setting_b_paper``, ``identity``
    and ``const_diag`` (with two diagonal entries as extra parameters). The
    CLI spellings ``setting-a-paper`` and ``const-diag:a1,a2`` are accepted
    too.
    """
    key = str(name).strip().lower().replace("-", "_")
    m = re.fullmatch(r"const_diag:\s*([^,]+),\s*(.+)", key)
    if m:
        key = "const_diag"
        params = (m.group(1), m.group(2))
    if key == "identity":
        return _const_diag(1.0, 1.0, "identity")
    if key == "const_diag":
        if len(params) != 2:
            raise ConfigurationError("const_diag needs two diagonal entries")
        try:
            a1, a2 = (float(p) for p in params)
        except ValueError as exc:
            raise ConfigurationError(f"bad const_diag entries {params!r}") from exc
        if not (a1 > 0 and a2 > 0):
            raise ConfigurationError("const_diag entries must be positive")
        return _const_diag(a1, a2, f"const_diag({a1:g},{a2:g})")
    if key == "setting_a_paper":
        return _paper_a()
    if key == "setting_b_paper":
        return _paper_b()
    raise ConfigurationError(f"unknown problem {name!r}; expected one of {BUILTIN_NAMES}")


def sample_grid(grid_n):
    """Cell-centred ``grid_n x grid_n`` sample points of the unit cell."""
    if grid_n < 2:
        raise ConfigurationError("grid_n must be >= 2")
    t = (np.arange(grid_n) + 0.5) / grid_n
    y1, y2 = np.meshgrid(t, t, indexing="ij")
    return np.stack([y1.ravel(), y2.ravel()], axis=-1)


@dataclass(frozen=True)
class EllipticityReport:
    lambda_min: float
    Lambda_max: float
    sample_grid: int
    b_sup: float = 0.0

    @property
    def uniformly_elliptic(self):
        return self.lambda_min > 0


def check_ellipticity(field: CoefficientField, grid_n=64) -> EllipticityReport:
    """Sampled eigenvalue extremes of ``A`` (and sup of ``|b|``)."""
    pts = sample_grid(grid_n)
    eig = np.linalg.eigvalsh(field.eval_A(pts))
    b = field.eval_b(pts)
    return EllipticityReport(lambda_min=float(eig.min()), Lambda_max=float(eig.max()),
                             sample_grid=grid_n,
                             b_sup=float(np.sqrt((b * b).sum(axis=-1)).max()))


@dataclass(frozen=True)
class CordesReport:
    ratio_max: float
    delta_max: float
    admissible_b: bool
    admissible_classical: bool
    kappa: float
    b_vanishes: bool
    sample_grid: int
    dim: int = 2

    @property
    def admissible(self):
        return self.admissible_b or self.admissible_classical

    @property
    def delta_threshold(self):
        n = self.dim
        return n / (n + math.pi ** 2)


def cordes_ratio(field: CoefficientField, points):
    """Pointwise ``(|A|^2 + |b|^2) / tr(A)^2``."""
    A = field.eval_A(points)
    b = field.eval_b(points)
    tr = np.trace(A, axis1=-2, axis2=-1)
    if np.any(tr <= 0):
        raise InvalidCoefficientError("tr(A) <= 0 at a sample point")
    return ((A * A).sum(axis=(-2, -1)) + (b * b).sum(axis=-1)) / tr ** 2


def check_cordes(field: CoefficientField, grid_n=64) -> CordesReport:
    """Grid certificate of the drift-augmented Cordes condition."""
    n = field.dim
    pts = sample_grid(grid_n)
    ratio_max = float(cordes_ratio(field, pts).max())
    delta = 1.0 / ratio_max - (n - 1)
    b_vanishes = bool(np.all(field.eval_b(pts) == 0))
    threshold = n / (n + math.pi ** 2)
    if b_vanishes:
        kappa = delta
    else:
        kappa = (delta - threshold) * (n + math.pi ** 2) / math.pi ** 2
    return CordesReport(ratio_max=ratio_max, delta_max=delta,
                        admissible_b=bool(delta > threshold and delta <= 1 + 1e-12),
                        admissible_classical=bool(b_vanishes and delta > 0),
                        kappa=float(kappa), b_vanishes=b_vanishes,
                        sample_grid=grid_n, dim=n)


@dataclass(frozen=True)
class RenormalizedField:
    """``gamma = tr(A) / (|A|^2 + |b|^2)`` together with ``gamma A`` and ``gamma b``."""

    base: CoefficientField
    gamma_lower: float
    gamma_upper: float
    cordes: Optional[CordesReport] = field(default=None, compare=False)

    def eval_gamma(self, points):
        A = self.base.eval_A(points)
        b = self.base.eval_b(points)
        denom = (A * A).sum(axis=(-2, -1)) + (b * b).sum(axis=-1)
        if np.any(denom == 0):
            raise EvaluationError("|A|^2 + |b|^2 vanishes at a queried point")
        return np.trace(A, axis1=-2, axis2=-1) / denom

    def eval_all(self, points):
        """Return ``(gamma, Atilde, btilde)`` at ``points`` in one pass."""
        A = self.base.eval_A(points)
        b = self.base.eval_b(points)
        denom = (A * A).sum(axis=(-2, -1)) + (b * b).sum(axis=-1)
        if np.any(denom == 0):
            raise EvaluationError("|A|^2 + |b|^2 vanishes at a queried point")
        g = np.trace(A, axis1=-2, axis2=-1) / denom
        return g, g[..., None, None] * A, g[..., None] * b

    def eval_Atilde(self, points):
        return self.eval_all(points)[1]

    def eval_btilde(self, points):
        return self.eval_all(points)[2]


def renormalize(field: CoefficientField, grid_n=64, require_admissible=True,
                cordes: Optional[CordesReport] = None) -> RenormalizedField:
    """Build the renormalized coefficients; bounds come from a sampled report.

    Raises ConfigurationError if the Cordes-type condition fails on the
    sample grid, unless ``require_admissible`` is False.
    """
    if cordes is None:
        cordes = check_cordes(field, grid_n)
    if require_admissible and not cordes.admissible:
        raise ConfigurationError(
            f"field {field.name!r} fails the Cordes condition on a {grid_n}^2 grid "
            f"(delta_max={cordes.delta_max:.4g})")
    ell = check_ellipticity(field, grid_n)
    n = field.dim
    lam, Lam = ell.lambda_min, ell.Lambda_max
    return RenormalizedField(base=field,
                             gamma_lower=n * lam / (n * Lam ** 2 + ell.b_sup ** 2),
                             gamma_upper=Lam / lam ** 2, cordes=cordes)
