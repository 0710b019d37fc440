"""Mesh-refinement studies against the reference solutions.

A study runs, for every mesh size, the invariant-measure solver of one
setting, both correctors and the effective matrix, and records errors
against the oracle. Quantities are selected by name:

``L2``, ``L3``, ``H1``, ``W13``, ``H1semi``
    error of the invariant measure ``r_h`` (Setting B: Lebesgue norms only);
``corrector``
    ``|chi - chi_h|_{H1}`` (Setting A) or ``||grad chi - xi_h||_{H1}``
    (Setting B), maximum over ``j = 1, 2``;
``Abar``
    Frobenius norm of ``Abar - Abar_h``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .coefficients import make_builtin_problem
from .correctors import solve_correctors_a, solve_correctors_b
from .effective import effective_matrix_a, effective_matrix_b
from .errors import ConfigurationError, FpkError
from .fem import error_norm, integrate, parse_norm
from .oracle import reference_for
from .quadrature import quadrature
from .setting_a import solve_invariant_a
from .setting_b import solve_invariant_b

log = logging.getLogger(__name__)

CSV_HEADER = ("N", "h", "norm", "value", "parity")
EXACT_TOL = 1e-12
SPECIAL = ("corrector", "Abar")


def _fmt(x):
    return format(float(x), ".17g")


def parity_of(N):
    return "even" if N % 2 == 0 else "odd"


@dataclass
class StudyConfig:
    problem: str
    setting: str = "A"
    mesh_list: List[int] = field(default_factory=lambda: [8, 16, 32, 64, 128])
    parity_split: bool = True
    norms: List[str] = field(default_factory=lambda: ["L2", "H1", "corrector", "Abar"])
    quad_order: int = 5
    quad_subdivision: int = 1
    cut_subdivision: int = 8
    output_dir: str = "."
    name: Optional[str] = None
    tol: float = 1e-10

    def __post_init__(self):
        self.setting = str(self.setting).upper()
        if self.setting not in ("A", "B"):
            raise ConfigurationError(f"setting must be A or B, got {self.setting!r}")
        self.mesh_list = [int(n) for n in self.mesh_list]
        if len(self.mesh_list) < 3:
            raise ConfigurationError("at least three meshes are needed for rate fitting")
        if any(b <= a for a, b in zip(self.mesh_list, self.mesh_list[1:])):
            raise ConfigurationError("mesh_list must be strictly increasing")
        if min(self.mesh_list) < 2:
            raise ConfigurationError("every mesh size must be >= 2")
        if self.parity_split and len({n % 2 for n in self.mesh_list}) > 1:
            raise ConfigurationError("with parity_split, mesh_list must have a single parity")
        self.norms = [str(s) for s in self.norms]
        if not self.norms:
            raise ConfigurationError("norms must not be empty")
        for s in self.norms:
            if s in SPECIAL:
                continue
            kind, _ = parse_norm(s)
            if self.setting == "B" and kind != "L":
                raise ConfigurationError(
                    f"norm {s!r}: the Setting B density is piecewise constant, use Lp norms")
        make_builtin_problem(self.problem)  # fail early on unknown names

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigurationError(f"unknown config keys: {sorted(extra)}")
        if "problem" not in data:
            raise ConfigurationError("config needs a 'problem'")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")
        return cls.from_dict(data)

    @property
    def meshes(self):
        """All mesh sizes of the study (both families with ``parity_split``)."""
        if not self.parity_split:
            return list(self.mesh_list)
        return sorted(set(self.mesh_list) | {n + 1 for n in self.mesh_list})

    @property
    def stem(self):
        return self.name or f"{self.problem.replace(':', '_').replace(',', '_')}_{self.setting}"

    def rules(self):
        return (quadrature(self.quad_order, self.quad_subdivision),
                quadrature(self.quad_order, self.cut_subdivision))


@dataclass
class StudyRow:
    N: int
    h: float
    norm: str
    value: float
    parity: str
    exact: bool = False
    note: str = ""


@dataclass
class RateFit:
    norm: str
    parity: str
    slope: Optional[float]
    pairwise: List[float]
    note: str = ""


@dataclass
class StudyResult:
    config: Optional[StudyConfig]
    rows: List[StudyRow] = field(default_factory=list)
    diagnostics: Dict[int, dict] = field(default_factory=dict)
    rates: Dict[tuple, RateFit] = field(default_factory=dict)
    wall_time: float = 0.0

    def rate(self, norm, parity):
        fit = self.rates.get((norm, parity))
        return None if fit is None else fit.slope

    def errors(self, norm, parity):
        rows = [r for r in self.rows if r.norm == norm and r.parity == parity]
        return np.array([r.N for r in rows]), np.array([r.value for r in rows])


def fit_rate(h, err):
    """Least-squares slope of ``log(err)`` against ``log(h)``."""
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def pairwise_orders(h, err):
    """``log(e_i / e_{i+1}) / log(h_i / h_{i+1})`` for consecutive meshes."""
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    return list(np.log(err[:-1] / err[1:]) / np.log(h[:-1] / h[1:]))


def fit_rates(rows: Sequence[StudyRow]) -> Dict[tuple, RateFit]:
    """Fitted and pairwise orders per ``(norm, parity)`` family.

    Families with fewer than three usable (finite, positive, not exact)
    errors get ``slope=None`` and a note.
    """
    groups = {}
    for r in rows:
        groups.setdefault((r.norm, r.parity), []).append(r)
    out = {}
    for key, grp in groups.items():
        grp = sorted(grp, key=lambda r: r.h, reverse=True)
        use = [r for r in grp if not r.exact and math.isfinite(r.value) and r.value > 0]
        if len(use) < 3:
            reason = "exact" if any(r.exact for r in grp) else "too few usable errors"
            out[key] = RateFit(key[0], key[1], None, [], note=reason)
            continue
        h = [r.h for r in use]
        e = [r.value for r in use]
        out[key] = RateFit(key[0], key[1], fit_rate(h, e), pairwise_orders(h, e))
    return out


def _run_row(cfg: StudyConfig, field_, ref, N):
    quad, cut = cfg.rules()
    values, diag = {}, {}
    want_corr = any(s in SPECIAL for s in cfg.norms)
    if cfg.setting == "A":
        inv = solve_invariant_a(field_, N, quad, cut, tol=cfg.tol)
        r_h = inv.r_h
        diag.update(min_vertex_value=inv.min_vertex_value,
                    residual=inv.report.relative_residual)
        if want_corr:
            corr = solve_correctors_a(field_, r_h, N, quad, cut, tol=cfg.tol)
            chi_err = max(error_norm(c, ref.chi_field(), "H1semi", quad, cut)
                          for c in corr.chi_h)
            eff = effective_matrix_a(field_, r_h, corr, quad, cut)
    else:
        inv = solve_invariant_b(field_, N, quad, cut, tol=cfg.tol)
        r_h = inv.r_h
        diag.update(rtilde_mass=inv.rtilde_mass,
                    r_mass=integrate(r_h, r_h.mesh, field_.discontinuity_lines, quad, cut),
                    negative_count=inv.negative_count, negative_min=inv.negative_min,
                    residual=inv.report.relative_residual)
        if want_corr:
            corr = solve_correctors_b(field_, N, quad, cut, tol=cfg.tol, ren=inv.ren)
            chi_err = max(error_norm(x, ref.grad_chi_field(), "H1", quad, cut)
                          for x in corr.xi_h)
            eff = effective_matrix_b(field_, inv, corr, quad, cut)
    for s in cfg.norms:
        if s == "corrector":
            values[s] = chi_err
        elif s == "Abar":
            values[s] = float(np.linalg.norm(eff.value - ref.Abar))
        else:
            values[s] = error_norm(r_h, ref.r_field(), s, quad, cut, mesh=r_h.mesh)
    if want_corr:
        diag.update(Abar_h=eff.value.tolist(), asymmetry=eff.asymmetry)
    return values, diag


def _thread_cap():
    raw = os.environ.get("FPKHOM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigurationError(f"FPKHOM_THREADS must be an integer, got {raw!r}")


def run_convergence(config: StudyConfig) -> StudyResult:
    """Run the study; solver failures are recorded per row and the study goes on."""
    t0 = time.perf_counter()
    field_ = make_builtin_problem(config.problem)
    ref = reference_for(field_)

    def task(N):
        try:
            return N, _run_row(config, field_, ref, N), ""
        except FpkError as exc:
            log.warning("N=%d failed: %s", N, exc)
            return N, None, f"{type(exc).__name__}: {exc}"

    meshes = config.meshes
    workers = min(_thread_cap(), len(meshes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(task, meshes))
    else:
        outcomes = [task(N) for N in meshes]

    result = StudyResult(config=config)
    for N, out, reason in outcomes:
        values, diag = out if out is not None else ({}, {"failure": reason})
        result.diagnostics[N] = diag
        for s in config.norms:
            v = values.get(s, math.nan)
            result.rows.append(StudyRow(N=N, h=1.0 / N, norm=s, value=v, parity=parity_of(N),
                                        exact=bool(math.isfinite(v) and v <= EXACT_TOL),
                                        note=reason))
    result.rates = fit_rates(result.rows)
    result.wall_time = time.perf_counter() - t0
    return result


def write_csv(result: StudyResult, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in result.rows:
            w.writerow([r.N, _fmt(r.h), r.norm, _fmt(r.value), r.parity])


def _series(result):
    out = []
    for (norm, parity), fit in result.rates.items():
        rows = [r for r in result.rows if r.norm == norm and r.parity == parity
                and not r.exact and math.isfinite(r.value) and r.value > 0]
        if len(rows) < 2:
            continue
        out.append(dict(norm=norm, parity=parity, h=[r.h for r in rows],
                        err=[r.value for r in rows], slope=fit.slope))
    return out


def emit(result: StudyResult, output_dir=None, formats=("csv", "svg"), stem=None):
    """Write the study as CSV and/or SVG; returns the written paths.

    An empty result gives a header-only CSV and no figure.
    """
    cfg = result.config
    out = Path(output_dir if output_dir is not None else (cfg.output_dir if cfg else "."))
    out.mkdir(parents=True, exist_ok=True)
    stem = stem or (cfg.stem if cfg else "study")
    paths = []
    for fmt in formats:
        if fmt not in ("csv", "svg"):
            raise ConfigurationError(f"unknown output format {fmt!r}")
    if "csv" in formats:
        p = out / f"{stem}.csv"
        write_csv(result, p)
        paths.append(p)
    series = _series(result)
    if "svg" in formats and series:
        from .plotting import convergence_figure, save_svg
        title = f"{cfg.problem}, setting {cfg.setting}" if cfg else None
        p = out / f"{stem}.svg"
        save_svg(convergence_figure(series, title), p)
        paths.append(p)
    return paths


def rate_table(result: StudyResult):
    """Rows ``(norm, parity, slope, pairwise, note)`` for printing."""
    return [(f.norm, f.parity, f.slope, f.pairwise, f.note)
            for f in sorted(result.rates.values(), key=lambda f: (f.norm, f.parity))]


def config_to_json(cfg: StudyConfig):
    return json.dumps(asdict(cfg), indent=2, sort_keys=True)
