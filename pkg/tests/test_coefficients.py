import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpkhom.coefficients import (CoefficientField, check_cordes, check_ellipticity,
                                 make_builtin_problem, renormalize, sample_grid, wrap)
from fpkhom.errors import ConfigurationError, EvaluationError, InvalidCoefficientError

# Essential infimum / supremum of the eigenvalues of the Setting B matrix,
# from a closed-form 2x2 eigenvalue scan at 10^6 points in y1.
LAMBDA_MIN_B = 0.9697318645215424
LAMBDA_MAX_B = 3.114514485396919

coord = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
# dyadic coordinates, so that y + 1 is exact in floating point
dyadic = st.integers(min_value=-3 * 2 ** 20, max_value=3 * 2 ** 20).map(lambda k: k / 2 ** 20)
BUILTINS = ["setting_a_paper", "setting_b_paper", "identity", "const-diag:1,3"]


def test_identity_values():
    f = make_builtin_problem("identity")
    y = np.array([0.3, 0.7])
    assert np.array_equal(f.eval_A(y), np.eye(2))
    assert np.array_equal(f.eval_b(y), np.zeros(2))
    assert np.array_equal(f.eval_divA(y), np.zeros(2))


def test_builtin_drifts():
    a = make_builtin_problem("setting_a_paper")
    assert np.array_equal(a.eval_b(np.array([0.25, 0.9])), [1.0, 1.0])
    b = make_builtin_problem("setting_b_paper")
    assert np.allclose(b.eval_b(np.array([0.25, 0.0])), [1.0, 1.0])
    assert np.allclose(b.eval_b(np.array([0.75, 0.0])), [-0.5, -0.5])


def test_cli_spellings_and_errors():
    assert make_builtin_problem("setting-b-paper").name == "setting_b_paper"
    f = make_builtin_problem("const-diag:1,3")
    assert np.array_equal(f.eval_A(np.array([0.1, 0.2])), np.diag([1.0, 3.0]))
    assert make_builtin_problem("const_diag", 2, 5).eval_A(np.zeros(2))[1, 1] == 5.0
    for bad in ("nope", "const-diag:1", "const-diag:-1,2"):
        with pytest.raises(ConfigurationError):
            make_builtin_problem(bad)


def test_setting_a_divergence_matches_closed_form():
    f = make_builtin_problem("setting_a_paper")
    t = np.linspace(0.01, 0.99, 97)
    t = t[np.abs(t - 0.5) > 1e-3]
    y = np.stack([t, np.full_like(t, 0.3)], axis=-1)
    d = f.eval_divA(y)
    s = np.sin(np.pi * t)
    assert np.allclose(d[:, 0], np.pi * np.sin(2 * np.pi * t) / np.sqrt(1 - s ** 4), atol=1e-12)
    assert np.allclose(d[:, 1], np.pi * np.cos(2 * np.pi * t), atol=1e-12)
    # one-sided limits at y1 = 1/2 are finite (+-sqrt(2) pi)
    eps = 1e-9
    left = f.eval_divA(np.array([0.5 - eps, 0.0]))[0]
    right = f.eval_divA(np.array([0.5 + eps, 0.0]))[0]
    assert left == pytest.approx(math.sqrt(2) * math.pi, rel=1e-6)
    assert right == pytest.approx(-math.sqrt(2) * math.pi, rel=1e-6)


def test_setting_a_divergence_matches_finite_differences():
    f = make_builtin_problem("setting_a_paper")
    t = np.array([0.1, 0.23, 0.37, 0.61, 0.84])
    h = 1e-6
    y = np.stack([t, np.zeros_like(t)], axis=-1)
    e = np.array([h, 0.0])
    dA = (f.eval_A(y + e) - f.eval_A(y - e)) / (2 * h)
    # row-wise divergence: (div A)_i = sum_k d_k A_ik, only d_1 is nonzero
    assert np.allclose(f.eval_divA(y), dA[:, :, 0], atol=1e-6)


@pytest.mark.parametrize("name", BUILTINS)
@given(y1=dyadic, y2=dyadic)
def test_periodicity(name, y1, y2):
    f = make_builtin_problem(name)
    y = np.array([y1, y2])
    for e in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
        assert np.array_equal(f.eval_A(y + e), f.eval_A(y))
        assert np.array_equal(f.eval_b(y + e), f.eval_b(y))


@pytest.mark.parametrize("name", BUILTINS)
@given(y1=coord, y2=coord)
def test_symmetry(name, y1, y2):
    A = make_builtin_problem(name).eval_A(np.array([y1, y2]))
    assert np.array_equal(A, A.T)


def test_wrap_stays_in_unit_cell():
    y = wrap(np.array([[-1e-20, 1.0], [2.5, -0.25]]))
    assert np.all((y >= 0) & (y < 1))
    assert np.allclose(y[1], [0.5, 0.75])


def test_ellipticity_reports():
    r = check_ellipticity(make_builtin_problem("identity"), 16)
    assert r.lambda_min == r.Lambda_max == 1.0
    r = check_ellipticity(make_builtin_problem("const-diag:1,3"), 8)
    assert (r.lambda_min, r.Lambda_max) == (1.0, 3.0)
    r = check_ellipticity(make_builtin_problem("setting_b_paper"), 256)
    assert r.lambda_min > 0 and r.uniformly_elliptic
    # the sampled extremes approach the essential bounds from inside
    assert LAMBDA_MIN_B <= r.lambda_min < LAMBDA_MIN_B + 1e-4
    assert LAMBDA_MAX_B - 1e-4 < r.Lambda_max <= LAMBDA_MAX_B
    with pytest.raises(ConfigurationError):
        check_ellipticity(make_builtin_problem("identity"), 1)


def test_non_elliptic_flag():
    f = CoefficientField("neg", lambda y: np.broadcast_to(np.diag([1.0, -1.0]),
                                                           y.shape[:-1] + (2, 2)),
                         lambda y: np.zeros(y.shape))
    assert not check_ellipticity(f, 4).uniformly_elliptic


def test_cordes_identity():
    r = check_cordes(make_builtin_problem("identity"), 16)
    assert r.ratio_max == 0.5
    assert abs(r.delta_max - 1.0) <= 1e-12
    assert abs(r.kappa - 1.0) <= 1e-12
    assert r.admissible_b and r.admissible_classical


def test_cordes_const_diag():
    r = check_cordes(make_builtin_problem("const-diag:1,3"), 16)
    assert r.ratio_max == pytest.approx(5 / 8, abs=1e-15)
    assert r.delta_max == pytest.approx(3 / 5, abs=1e-14)
    assert r.admissible_classical and r.b_vanishes
    assert r.kappa == pytest.approx(3 / 5, abs=1e-14)


def test_cordes_setting_b_paper():
    r = check_cordes(make_builtin_problem("setting_b_paper"), 256)
    assert r.delta_max >= 0.25
    assert r.admissible_b and not r.admissible_classical
    assert 0 < r.kappa <= 1
    expected = (r.delta_max - 2 / (2 + math.pi ** 2)) * (2 + math.pi ** 2) / math.pi ** 2
    assert r.kappa == pytest.approx(expected, rel=1e-14)
    assert r.delta_max == pytest.approx(1 / r.ratio_max - 1, rel=1e-15)


def test_cordes_rejects_nonpositive_trace():
    f = CoefficientField("bad", lambda y: np.broadcast_to(-np.eye(2), y.shape[:-1] + (2, 2)),
                         lambda y: np.zeros(y.shape))
    with pytest.raises(InvalidCoefficientError):
        check_cordes(f, 4)


def test_renormalize_identity_and_const_diag():
    ren = renormalize(make_builtin_problem("identity"))
    y = sample_grid(4)
    g, At, bt = ren.eval_all(y)
    assert np.all(g == 1.0) and np.all(At == np.eye(2)) and np.all(bt == 0)
    ren = renormalize(make_builtin_problem("const-diag:1,3"))
    g, At, _ = ren.eval_all(np.array([0.2, 0.4]))
    assert g == pytest.approx(0.4, abs=1e-15)
    assert np.allclose(At, np.diag([0.4, 1.2]), atol=1e-15)


def _constant_field(A, b):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    return CoefficientField("const", lambda y: np.broadcast_to(A, y.shape[:-1] + (2, 2)),
                            lambda y: np.broadcast_to(b, y.shape))


def test_gamma_arithmetic():
    # tr = 5, |A|^2 = 9 + 4 + 2/4, |b|^2 = 2
    ren = renormalize(_constant_field([[3, 0.5], [0.5, 2]], [1, 1]), require_admissible=False)
    assert ren.eval_gamma(np.array([0.1, 0.1])) == pytest.approx(5 / 15.5, rel=1e-15)


def test_gamma_setting_b_paper_quarter():
    ren = renormalize(make_builtin_problem("setting_b_paper"))
    a11, a12, a22 = 2 + math.sqrt(0.5), 0.5, 2.5
    expected = (a11 + a22) / (a11 ** 2 + 2 * a12 ** 2 + a22 ** 2 + 2.0)
    assert ren.eval_gamma(np.array([0.25, 0.0])) == pytest.approx(expected, rel=1e-14)


def test_renormalize_errors():
    f = _constant_field(np.zeros((2, 2)), [0, 0])
    ren = renormalize(make_builtin_problem("identity"))
    bad = type(ren)(base=f, gamma_lower=1, gamma_upper=1)
    with pytest.raises(EvaluationError):
        bad.eval_gamma(np.array([0.5, 0.5]))
    with pytest.raises(ConfigurationError):
        renormalize(_constant_field(np.eye(2), [3, 3]))


@pytest.mark.parametrize("name", ["setting_b_paper", "setting_a_paper", "identity",
                                  "const-diag:1,3"])
def test_renormalized_closeness_to_identity(name):
    f = make_builtin_problem(name)
    ren = renormalize(f, grid_n=128)
    delta = ren.cordes.delta_max
    g, At, bt = ren.eval_all(sample_grid(128))
    lhs = ((At - np.eye(2)) ** 2).sum(axis=(-2, -1)) + (bt ** 2).sum(axis=-1)
    assert lhs.max() <= 1 - delta + 1e-12
    assert np.all(g >= ren.gamma_lower - 1e-12)
    assert np.all(g <= ren.gamma_upper + 1e-12)
