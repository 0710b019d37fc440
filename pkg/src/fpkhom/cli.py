"""Command-line interface.

Exit codes: 0 on success, 1 on solver failure, 2 on configuration errors
(including bad arguments).
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .coefficients import check_cordes, check_ellipticity, make_builtin_problem
from .correctors import check_centering, solve_correctors_a, solve_correctors_b
from .effective import effective_matrix_a, effective_matrix_b
from .errors import ConfigurationError, FpkError
from .fem import error_norm, integrate
from .forcing import FORCING_NAMES, builtin_forcing
from .harness import StudyConfig, emit, rate_table, run_convergence
from .setting_a import solve_invariant_a, solve_nonhomogeneous_a
from .setting_b import solve_invariant_b, solve_nonhomogeneous_b

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _matrix(M):
    return "\n".join("  [" + "  ".join(f"{v: .12f}" for v in row) + "]" for row in M)


def _mesh_arg(p):
    p.add_argument("--mesh", "-N", type=int, default=32, help="cells per side (default 32)")


def _setting_arg(p):
    p.add_argument("--setting", choices=("a", "b", "A", "B"), default="a")


def cmd_check_cordes(args):
    field = make_builtin_problem(args.problem)
    rep = check_cordes(field, args.grid)
    ell = check_ellipticity(field, args.grid)
    print(f"problem        {field.name}")
    print(f"sample grid    {args.grid} x {args.grid}")
    print(f"lambda_min     {ell.lambda_min:.12g}")
    print(f"Lambda_max     {ell.Lambda_max:.12g}")
    print(f"ratio_max      {rep.ratio_max:.12g}")
    print(f"delta_max      {rep.delta_max:.12g}")
    print(f"kappa          {rep.kappa:.12g}")
    print(f"admissible_b   {str(rep.admissible_b).lower()}")
    print(f"admissible_classical {str(rep.admissible_classical).lower()}")
    print("admissible" if rep.admissible else "not admissible")
    return EXIT_OK


def cmd_invariant(args):
    field = make_builtin_problem(args.problem)
    if args.setting.upper() == "A":
        inv = solve_invariant_a(field, args.mesh)
        print(f"setting A, N={args.mesh}")
        print(f"mean r_h          {integrate(inv.r_h, inv.r_h.mesh):.12g}")
        print(f"min vertex value  {inv.min_vertex_value:.12g}")
        r_h = inv.r_h
    else:
        inv = solve_invariant_b(field, args.mesh)
        print(f"setting B, N={args.mesh}")
        print(f"int rt_h          {inv.rtilde_mass:.12g}")
        print(f"int gamma rt_h    {inv.mass_gamma:.12g}")
        print(f"negative rt_h     {inv.negative_count}")
        r_h = inv.r_h
    print(f"residual          {inv.report.relative_residual:.3e}")
    c = check_centering(field, r_h, N_quad=args.mesh, warn=False)
    print(f"<b> (discrete r)  ({c[0]:.3e}, {c[1]:.3e})")
    return EXIT_OK


def cmd_corrector(args):
    field = make_builtin_problem(args.problem)
    j = args.j - 1
    if args.setting.upper() == "A":
        inv = solve_invariant_a(field, args.mesh)
        corr = solve_correctors_a(field, inv.r_h, args.mesh)
        f = corr.chi_h[j]
        g = f.element_gradients()
        print(f"setting A, N={args.mesh}, j={args.j}")
        print(f"max |chi_h|        {np.abs(f.coeffs).max():.12g}")
        print(f"||grad chi_h||_L2  {np.sqrt(np.dot(f.mesh.areas, (g * g).sum(1))):.12g}")
    else:
        corr = solve_correctors_b(field, args.mesh)
        f = corr.xi_h[j]
        print(f"setting B, N={args.mesh}, j={args.j}")
        print(f"max |xi_h|         {np.abs(f.coeffs).max():.12g}")
        print(f"mean xi_h          ({f.mean()[0]:.3e}, {f.mean()[1]:.3e})")
    print(f"residual           {corr.reports[j].relative_residual:.3e}")
    return EXIT_OK


def cmd_effective(args):
    field = make_builtin_problem(args.problem)
    if args.setting.upper() == "A":
        inv = solve_invariant_a(field, args.mesh)
        eff = effective_matrix_a(field, inv.r_h, solve_correctors_a(field, inv.r_h, args.mesh))
    else:
        inv = solve_invariant_b(field, args.mesh)
        eff = effective_matrix_b(field, inv, solve_correctors_b(field, args.mesh, ren=inv.ren))
    print(f"setting {eff.setting}, N={eff.mesh_N}")
    print("Abar_h =")
    print(_matrix(eff.value))
    print(f"asymmetry          {eff.asymmetry:.3e}")
    print(f"smallest eigenvalue {eff.spd_check:.12g}")
    return EXIT_OK


def cmd_convergence(args):
    cfg = StudyConfig.from_json(args.config)
    if args.output_dir:
        cfg.output_dir = args.output_dir
    result = run_convergence(cfg)
    paths = emit(result)
    for norm, parity, slope, pairwise, note in rate_table(result):
        s = "n/a" if slope is None else f"{slope:.4f}"
        pw = " ".join(f"{p:.3f}" for p in pairwise)
        print(f"{norm:10s} {parity:5s} rate {s:>8s}  pairwise [{pw}] {note}".rstrip())
    for p in paths:
        print(f"wrote {p}")
    failed = [N for N, d in result.diagnostics.items() if "failure" in d]
    if failed:
        print(f"solver failures at N = {failed}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_nonhomogeneous(args):
    field = make_builtin_problem(args.problem)
    forcing = builtin_forcing(args.rhs)
    if args.setting.upper() == "A":
        u, rep = solve_nonhomogeneous_a(field, forcing.F, args.mesh)
        label = "u_h"
    else:
        u, _, rep = solve_nonhomogeneous_b(field, forcing.F, args.mesh)
        label = "ut_h"
    zero = builtin_forcing("zero").exact_identity
    print(f"setting {args.setting.upper()}, N={args.mesh}, rhs={forcing.name}")
    print(f"||{label}||_L2      {error_norm(u, zero, 'L2'):.12g}")
    print(f"mean {label}        {integrate(u, u.mesh):.3e}")
    if field.name == "identity" and forcing.exact_identity is not None:
        print(f"L2 error vs exact  {error_norm(u, forcing.exact_identity, 'L2'):.12g}")
    print(f"residual           {rep.relative_residual:.3e}")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="fpkhom", description="Periodic Fokker-Planck solvers and homogenization.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("check-cordes", help="sample ellipticity and the Cordes condition")
    s.add_argument("problem")
    s.add_argument("--grid", type=int, default=256)
    s.set_defaults(func=cmd_check_cordes)

    s = sub.add_parser("invariant", help="discrete invariant measure")
    s.add_argument("problem")
    _setting_arg(s)
    _mesh_arg(s)
    s.set_defaults(func=cmd_invariant)

    s = sub.add_parser("corrector", help="discrete corrector chi_j (A) or xi_j (B)")
    s.add_argument("problem")
    _setting_arg(s)
    _mesh_arg(s)
    s.add_argument("-j", type=int, choices=(1, 2), default=1)
    s.set_defaults(func=cmd_corrector)

    s = sub.add_parser("effective-matrix", help="homogenized diffusion matrix")
    s.add_argument("problem")
    _setting_arg(s)
    _mesh_arg(s)
    s.set_defaults(func=cmd_effective)

    s = sub.add_parser("convergence", help="mesh-refinement study (CSV + SVG)")
    s.add_argument("--config", required=True)
    s.add_argument("--output-dir", default=None)
    s.set_defaults(func=cmd_convergence)

    s = sub.add_parser("nonhomogeneous", help="nonhomogeneous problem with a built-in F")
    s.add_argument("problem")
    _setting_arg(s)
    _mesh_arg(s)
    s.add_argument("--rhs", required=True, choices=FORCING_NAMES)
    s.set_defaults(func=cmd_nonhomogeneous)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FpkError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
