import numpy as np
import pytest

from fpkhom.coefficients import make_builtin_problem
from fpkhom.errors import ConfigurationError
from fpkhom.oracle import (QuadratureNotConverged, quad1d, reference_effective_matrix,
                           reference_for, reference_solution, trivial_reference)

# Frozen oracle output (tol 1e-10; identical at tol 1e-12).
ABAR_A = np.array([[1.4967322489303303, -8.326672684688674e-17],
                   [-8.326672684688674e-17, 2.585252478660447]])
ABAR_B = np.array([[1.7222999228830136, -0.10812346213907292],
                   [-0.10812346213907294, 2.447533646251645]])
CONSTANTS = {
    "setting_a_paper": (0.8113129714225615, 0.8235073206358157),
    "setting_b_paper": (0.6366480005086927, 0.9119937003233246),
}


def test_quad1d_examples():
    assert quad1d(lambda x: np.ones_like(x)) == pytest.approx(1.0, abs=1e-14)
    assert abs(quad1d(lambda x: np.sign(np.sin(2 * np.pi * x)), (0, 0.5, 1))) <= 1e-14
    val = quad1d(lambda x: np.sign(np.cos(np.pi * x)) * np.sin(np.pi * x), (0, 0.5, 1))
    assert abs(val) <= 1e-12


def test_quad1d_breakpoint_duplication_and_vectors():
    f = lambda x: np.exp(x) * (x > 0.3)  # noqa: E731
    a = quad1d(f, (0, 0.3, 1))
    b = quad1d(f, (0, 0.3, 0.3, 0.3, 1))
    assert a == b
    assert a == pytest.approx(np.e - np.exp(0.3), abs=1e-12)
    v = quad1d(lambda x: np.stack([x, x * x], axis=-1), (0, 1))
    assert np.allclose(v, [0.5, 1 / 3], atol=1e-14)


def test_quad1d_errors():
    with pytest.raises(ConfigurationError):
        quad1d(lambda x: x, tol=0)
    # an unresolved jump inside a piece never settles below the tolerance
    with pytest.raises(QuadratureNotConverged) as info:
        quad1d(lambda x: np.where(x < 1 / 3, 0.0, 1.0), (0, 1), tol=1e-15)
    assert info.value.estimate == pytest.approx(2 / 3, abs=1e-3)


@pytest.mark.parametrize("which", ["setting_a_paper", "setting_b_paper"])
def test_reference_invariants(which, request):
    ref = request.getfixturevalue("ref_a" if which == "setting_a_paper" else "ref_b")
    assert abs(ref.K(0.0)) <= 1e-14
    assert abs(ref.K(1.0)) <= 1e-10
    assert quad1d(ref.r, ref.breakpoints) == pytest.approx(1.0, abs=1e-10)
    assert abs(quad1d(ref.chi, ref.breakpoints)) <= 1e-10
    t = np.linspace(0, 1, 10001)
    assert ref.r(t).min() > 0
    assert np.allclose(ref.chi_prime(t), np.exp(-ref.K(t)) / ref.C2 - 1)
    C1, C2 = CONSTANTS[which]
    assert ref.C1 == pytest.approx(C1, rel=1e-12)
    assert ref.C2 == pytest.approx(C2, rel=1e-12)


@pytest.mark.parametrize("which", ["setting_a_paper", "setting_b_paper"])
def test_derivatives_match_finite_differences(which, request):
    ref = request.getfixturevalue("ref_a" if which == "setting_a_paper" else "ref_b")
    t = np.array([0.07, 0.2, 0.33, 0.45, 0.6, 0.71, 0.9])
    h = 1e-6
    assert np.allclose((ref.r(t + h) - ref.r(t - h)) / (2 * h), ref.r_prime(t), atol=1e-6)
    assert np.allclose((ref.chi(t + h) - ref.chi(t - h)) / (2 * h), ref.chi_prime(t),
                       atol=1e-6)
    assert np.allclose((ref.chi_prime(t + h) - ref.chi_prime(t - h)) / (2 * h),
                       ref.chi_second(t), atol=1e-5)


def test_frozen_effective_matrices(ref_a, ref_b):
    assert np.allclose(ref_a.Abar, ABAR_A, rtol=0, atol=1e-12)
    assert np.allclose(ref_b.Abar, ABAR_B, rtol=0, atol=1e-12)
    for A in (ref_a.Abar, ref_b.Abar):
        assert np.abs(A - A.T).max() <= 1e-12
        assert np.linalg.eigvalsh(A).min() > 0


def test_tolerance_halving(ref_b):
    fine = reference_solution("setting_b_paper", tol=0.5e-10)
    assert abs(fine.C1 - ref_b.C1) < 1e-10
    assert abs(fine.C2 - ref_b.C2) < 1e-10
    assert abs(fine.c - ref_b.c) < 1e-10
    assert np.abs(fine.Abar - ref_b.Abar).max() < 1e-10


def test_reference_effective_matrix_reuses_field(ref_a):
    A = reference_effective_matrix(ref_a, make_builtin_problem("setting_a_paper"))
    assert np.array_equal(A, ref_a.Abar)


def test_trivial_references():
    ref = trivial_reference(make_builtin_problem("identity"))
    assert np.array_equal(ref.Abar, np.eye(2))
    assert np.array_equal(reference_for(make_builtin_problem("const-diag:1,3")).Abar,
                          np.diag([1.0, 3.0]))
    y = np.random.default_rng(0).random((5, 2))
    assert np.all(ref.r_field().value(y) == 1.0)
    assert np.all(ref.chi_field().value(y) == 0.0)
    with pytest.raises(ConfigurationError):
        trivial_reference(make_builtin_problem("setting_b_paper"))
    with pytest.raises(ConfigurationError):
        reference_solution("identity")
