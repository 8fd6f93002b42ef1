import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewgram.errors import ComplexRoots, ImaginaryResidue, NegativeDiscriminant, NotHermitian
from skewgram.linalg import (
    QuarticCoefficients,
    char_poly,
    durand_kerner,
    general_eig_small,
    hermitian_eig,
    is_hermitian,
    matrix_rank,
    null_space,
    solve_biquadratic,
    solve_cubic,
    solve_quartic,
)

from helpers import remark_pair, unitary


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


# -- Jacobi -------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 12])
def test_hermitian_eig_matches_numpy(rng, n):
    for _ in range(5):
        a = random_hermitian(rng, n)
        w, v = hermitian_eig(a)
        np.testing.assert_allclose(w, np.linalg.eigvalsh(a)[::-1], atol=1e-12 * np.linalg.norm(a))
        np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-12)
        np.testing.assert_allclose(a @ v, v * w, atol=1e-12 * np.linalg.norm(a))


def test_hermitian_eig_descending_and_real_symmetric(rng):
    a = rng.standard_normal((6, 6))
    a = a + a.T
    w, v = hermitian_eig(a)
    assert np.all(np.diff(w) <= 0)
    np.testing.assert_allclose(v @ np.diag(w) @ v.conj().T, a, atol=1e-12)


def test_hermitian_eig_degenerate_clusters(rng):
    u = unitary(rng, 7)
    lam = np.array([2.0, 2.0, 2.0, -1.0, -1.0, 0.0, 0.5])
    a = u @ np.diag(lam) @ u.conj().T
    w, v = hermitian_eig(a)
    np.testing.assert_allclose(w, np.sort(lam)[::-1], atol=1e-13)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(7), atol=1e-12)
    np.testing.assert_allclose(a @ v, v * w, atol=1e-12)


def test_hermitian_eig_trivial_inputs():
    w, v = hermitian_eig(np.zeros((3, 3)))
    np.testing.assert_array_equal(w, 0.0)
    np.testing.assert_allclose(v, np.eye(3))
    w, _ = hermitian_eig(np.diag([3.0, -1.0, 2.0]))
    np.testing.assert_allclose(w, [3.0, 2.0, -1.0])


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))
    assert not is_hermitian([[1, 1j], [1j, 1]])
    assert is_hermitian([[1, 1j], [-1j, 1]])


@given(st.lists(st.floats(-10, 10), min_size=9, max_size=9), st.lists(st.floats(-10, 10), min_size=9, max_size=9))
def test_hermitian_eig_reconstructs(re, im):
    a = np.array(re).reshape(3, 3) + 1j * np.array(im).reshape(3, 3)
    a = 0.5 * (a + a.conj().T)
    w, v = hermitian_eig(a)
    scale = max(np.linalg.norm(a), 1e-300)
    assert np.linalg.norm(v @ np.diag(w) @ v.conj().T - a) <= 1e-12 * scale + 1e-300
    assert abs(np.sum(w) - np.trace(a).real) <= 1e-12 * scale + 1e-300


def test_matrix_rank(rng):
    a = rng.standard_normal((8, 3)) @ rng.standard_normal((3, 8))
    assert matrix_rank(a) == 3
    assert matrix_rank(np.zeros((4, 4))) == 0
    assert matrix_rank(np.eye(5)) == 5
    assert matrix_rank(rng.standard_normal((6, 2))) == 2


# -- characteristic polynomial --------------------------------------------------


def test_char_poly_matches_numpy(rng):
    for n in (1, 2, 4, 7, 10):
        a = random_hermitian(rng, n)
        np.testing.assert_allclose(char_poly(a), np.poly(a).real, atol=1e-10 * np.linalg.norm(a) ** n)


def test_char_poly_triangular_exact():
    a = np.array([[1.0, 5.0, -2.0], [0.0, 2.0, 7.0], [0.0, 0.0, 3.0]])
    np.testing.assert_allclose(char_poly(a), [1.0, -6.0, 11.0, -6.0], atol=1e-12)


def test_char_poly_flags_complex_spectrum():
    with pytest.raises(ImaginaryResidue):
        char_poly(np.diag([1j, 2.0]))


def test_char_poly_of_skew_gram_is_real(rng):
    # skew Gram matrices are not Hermitian but have a real spectrum
    gamma = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
    g = gamma.conj().T @ gamma
    gs = g.copy()
    gs[:2] *= -1
    c = char_poly(gs)
    np.testing.assert_allclose(np.sort(np.roots(c).real), np.sort(np.linalg.eigvals(gs).real), atol=1e-9)


# -- roots ----------------------------------------------------------------------


def test_solve_cubic_known_roots():
    roots = solve_cubic(-6.0, 11.0, -6.0)
    np.testing.assert_allclose(sorted(z.real for z in roots), [1.0, 2.0, 3.0], atol=1e-12)
    roots = solve_cubic(0.0, 0.0, -8.0)  # x^3 = 8
    assert any(abs(z - 2.0) < 1e-12 for z in roots)
    assert sum(1 for z in roots if abs(z.imag) > 1.0) == 2


@pytest.mark.parametrize(
    "roots",
    [
        [1.0, 2.0, 3.0, 4.0],
        [-0.380307, -0.0174054, 0.0263829, 0.570885],
        [-0.5, -0.1, 0.1, 0.5],  # biquadratic
        [-1.0, -1.0, 1.0, 1.0],
        [0.0, 0.0, 0.2, 0.7],
    ],
)
def test_solve_quartic_known_roots(roots):
    c = np.poly(roots)
    got = solve_quartic(QuarticCoefficients(*c[1:]))
    np.testing.assert_allclose(got, sorted(roots), atol=1e-7)


def test_solve_quartic_complex_roots_raise():
    with pytest.raises(ComplexRoots):
        solve_quartic(QuarticCoefficients(0.0, 0.0, 0.0, 1.0))


@given(st.lists(st.floats(-1.0, 1.0), min_size=4, max_size=4, unique=True))
def test_solve_quartic_recovers_separated_roots(roots):
    r = np.sort(roots)
    if np.min(np.diff(r)) < 1e-3:
        return
    got = solve_quartic(QuarticCoefficients(*np.poly(r)[1:]))
    np.testing.assert_allclose(got, r, atol=1e-9)


def test_quartic_coefficients_as_poly():
    c = QuarticCoefficients(1.0, 2.0, 3.0, 4.0)
    np.testing.assert_array_equal(c.as_poly(), [1.0, 1.0, 2.0, 3.0, 4.0])


def test_solve_biquadratic():
    # eta^2 in {1/4, 1/100}: eta^4 - (H/4) eta^2 + L/16
    a, b = 0.25, 0.01
    H, L = 4 * (a + b), 16 * a * b
    np.testing.assert_allclose(solve_biquadratic(H, L), [-0.5, -0.1, 0.1, 0.5], atol=1e-14)
    np.testing.assert_allclose(solve_biquadratic(1.0, 0.0), [-0.5, 0.0, 0.0, 0.5], atol=1e-14)
    with pytest.raises(NegativeDiscriminant):
        solve_biquadratic(1.0, 1.0)
    with pytest.raises(ComplexRoots):
        solve_biquadratic(-1.0, 0.1)


def test_durand_kerner_degree_six():
    roots = np.array([-2.0, -1.0, -0.3, 0.4, 1.5, 3.0])
    got = np.sort(durand_kerner(np.poly(roots)).real)
    np.testing.assert_allclose(got, roots, atol=1e-10)


def test_durand_kerner_complex_roots():
    got = durand_kerner([1.0, 0.0, 1.0])
    np.testing.assert_allclose(sorted(got, key=lambda z: z.imag), [-1j, 1j], atol=1e-12)


def test_general_eig_small_matches_numpy(rng):
    for k in (2, 3, 4, 5, 6):
        gamma = rng.standard_normal((8, k)) + 1j * rng.standard_normal((8, k))
        gs = gamma.conj().T @ gamma
        gs[: k // 2] *= -1
        np.testing.assert_allclose(general_eig_small(gs), np.sort(np.linalg.eigvals(gs).real), atol=1e-9)


def test_general_eig_small_deflates_exact_zeros():
    gp, _ = remark_pair()
    np.testing.assert_allclose(general_eig_small(gp.skew_gram), [-0.25, 0.0, 0.0, 0.25], atol=1e-14)
    np.testing.assert_array_equal(general_eig_small(np.zeros((3, 3))), 0.0)


def test_null_space(rng):
    a = rng.standard_normal((5, 2)) @ rng.standard_normal((2, 6)) + 0j
    n = null_space(a)
    assert n.shape == (6, 4)
    np.testing.assert_allclose(a @ n, 0.0, atol=1e-12)
    np.testing.assert_allclose(n.conj().T @ n, np.eye(4), atol=1e-12)
    assert null_space(np.eye(3)).shape == (3, 0)
    before = a.copy()
    null_space(a)
    np.testing.assert_array_equal(a, before)


def test_null_space_of_remark_skew_gram():
    gp, _ = remark_pair()
    n = null_space(gp.skew_gram)
    assert n.shape[1] == 1
    theta = n[:, 0] / n[0, 0]
    np.testing.assert_allclose(theta, [1.0, 0.0, -1.0, 0.0], atol=1e-14)
    assert math.isclose(np.linalg.norm(gp.state_matrix @ n[:, 0]), 0.0, abs_tol=1e-15)


def test_char_poly_determinant_probes(rng):
    for n in (3, 6, 9):
        gamma = rng.standard_normal((n + 2, n)) + 1j * rng.standard_normal((n + 2, n))
        gs = gamma.conj().T @ gamma
        gs[: n // 2] *= -1
        c = char_poly(gs)
        for eta in rng.uniform(-3, 3, 5):
            det = np.linalg.det(eta * np.eye(n) - gs)
            assert abs(np.polyval(c, eta) - det) <= 1e-8 * max(1.0, abs(det))


def test_matrix_rank_unitary_invariance(rng):
    for k in (1, 2, 4):
        a = (rng.standard_normal((7, k)) + 1j * rng.standard_normal((7, k))) @ rng.standard_normal((k, 7))
        u = unitary(rng, 7)
        assert matrix_rank(a) == matrix_rank(u @ a) == k


def test_matrix_rank_of_outer_product(rng):
    v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    assert matrix_rank(np.outer(v, v.conj())) == 1


def test_quartic_round_trip_residuals(rng):
    worst = 0.0
    for _ in range(1000):
        r = np.sort(rng.uniform(-2, 2, 4))
        c = QuarticCoefficients(*np.poly(r)[1:])
        got = solve_quartic(c)
        res = np.max(np.abs(np.polyval(c.as_poly(), got)))
        worst = max(worst, res / max(1.0, np.max(np.abs(c.as_poly()))))
        assert np.max(np.abs(got - r)) < 1e-5  # near-double roots are ill-conditioned
    assert worst <= 1e-8


def test_general_eig_small_triple_root():
    # pure state against a uniform mixture of four kets: q1/h has multiplicity 3
    from skewgram.reports import comparison_instance
    from skewgram import ComparisonSpec, build_gram_pair, comparison_eigenvalues, sgm_solve

    ov = [0.2, 0.3j, -0.1 + 0.1j, 0.25]
    gp = build_gram_pair(comparison_instance(0.3, ov))
    want = comparison_eigenvalues(ComparisonSpec.from_overlaps(0.3, ov))
    # root finding near a triple root converges slowly; these are estimates
    np.testing.assert_allclose(general_eig_small(gp.skew_gram), want, atol=1e-6)
    # the cluster refinement in sgm_solve recovers full accuracy
    np.testing.assert_allclose(sgm_solve(gp, 0.3).nonzero_eigenvalues, want, atol=1e-12)


def test_general_eig_small_examples():
    np.testing.assert_allclose(general_eig_small(np.diag([-1.0, 2.0])), [-1.0, 2.0])
    from skewgram.closedform import pure_skew_gram

    got = general_eig_small(pure_skew_gram(0.4, 0.04089))
    np.testing.assert_allclose(got, [-0.399599, 0.599599], atol=5e-7)
