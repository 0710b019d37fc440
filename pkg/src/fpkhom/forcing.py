"""Built-in right-hand sides ``F`` for the nonhomogeneous problem.

Each entry pairs ``F`` with the exact mean-zero solution of
``-Laplace(u) = div(F)`` (identity coefficients), when one is known.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError
from .fem import AnalyticField

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class Forcing:
    name: str
    F: Callable
    exact_identity: Optional[AnalyticField] = None


def _cos_mode(scale):
    def F(y):
        out = np.zeros(np.shape(y))
        out[..., 0] = -scale * np.cos(TWO_PI * y[..., 0])
        return out

    # -Laplace(u) = div F = 2 pi scale sin(2 pi y1)  =>  u = scale sin(2 pi y1) / (2 pi)
    amp = scale / TWO_PI

    def u(y):
        return amp * np.sin(TWO_PI * y[..., 0])

    def grad(y):
        g = np.zeros(np.shape(y))
        g[..., 0] = amp * TWO_PI * np.cos(TWO_PI * y[..., 0])
        return g

    return F, AnalyticField(u, grad)


def _constant(y):
    out = np.empty(np.shape(y))
    out[..., 0] = 1.0
    out[..., 1] = 0.5
    return out


def _zero(y):
    return np.zeros(np.shape(y))


def builtin_forcing(name) -> Forcing:
    """``cos-mode`` (``F = -(cos 2 pi y1, 0) / (2 pi)``), ``cos-mode-unit``
    (``F = -(cos 2 pi y1, 0)``), ``constant`` or ``zero``."""
    key = str(name).strip().lower().replace("_", "-")
    if key == "cos-mode":
        return Forcing(key, *_cos_mode(1.0 / TWO_PI))
    if key == "cos-mode-unit":
        return Forcing(key, *_cos_mode(1.0))
    if key == "constant":
        return Forcing(key, _constant, AnalyticField(lambda y: np.zeros(y.shape[:-1]),
                                                     lambda y: np.zeros(y.shape)))
    if key == "zero":
        return Forcing(key, _zero, AnalyticField(lambda y: np.zeros(y.shape[:-1]),
                                                 lambda y: np.zeros(y.shape)))
    raise ConfigurationError(
        f"unknown right-hand side {name!r}; expected cos-mode, cos-mode-unit, constant or zero")


FORCING_NAMES = ("cos-mode", "cos-mode-unit", "constant", "zero")
