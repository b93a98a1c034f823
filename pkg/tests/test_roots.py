import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toricmle.roots import (analytic_roots, companion_matrix, companion_roots, cross_check,
                            cubic_roots, quartic_roots, real_roots)


def test_companion_matrix_shape_and_eigenvalues():
    M = companion_matrix([1, -6, 11, -6])
    assert M.shape == (3, 3)
    assert np.allclose(sorted(np.linalg.eigvals(M).real), [1, 2, 3])


def test_real_roots_of_cubic():
    assert real_roots([1, -6, 11, -6]) == pytest.approx([1, 2, 3], abs=1e-12)
    # x^3 - 1 has one real root
    assert real_roots([1, 0, 0, -1]) == pytest.approx([1.0])


def test_leading_zeros_trimmed_and_zero_polynomial():
    assert real_roots([0, 1, -3]) == pytest.approx([3.0])
    with pytest.raises(ValueError):
        companion_roots([0, 0])


def test_cardano_and_ferrari():
    r = cubic_roots(2, -12, 22, -12)
    assert np.allclose(sorted(z.real for z in r), [1, 2, 3])
    r = quartic_roots(1, 0, -5, 0, 4)  # (x^2-1)(x^2-4)
    assert np.allclose(sorted(z.real for z in r), [-2, -1, 1, 2])
    r = quartic_roots(1, -10, 35, -50, 24)  # roots 1..4, q != 0 branch
    assert np.allclose(sorted(z.real for z in r), [1, 2, 3, 4])


def test_analytic_roots_degree_check():
    with pytest.raises(ValueError):
        analytic_roots([1, 0, 1])


def test_cross_check_on_likelihood_quartic():
    # a quartic of the shape produced by the 4c closed form
    assert cross_check([-55, 12, 0.3, -0.02, 0.001]) < 1e-8


def separated(roots, gap=0.05):
    r = sorted(roots)
    return all(b - a >= gap for a, b in zip(r, r[1:]))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=-3, max_value=3), min_size=3, max_size=4).filter(separated))
def test_companion_agrees_with_analytic(roots):
    coeffs = np.poly(roots)
    assert cross_check(coeffs) < 1e-6
    got = real_roots(coeffs)
    assert len(got) == len(roots)
    for r in roots:
        assert min(abs(r - g) for g in got) < 1e-8


def test_double_root_is_kept():
    # the eigenvalue solver splits a double root into a pair with imaginary part ~ 5e-9
    got = real_roots(np.poly([0.0, 0.375, 0.375]))
    assert got == pytest.approx([0.0, 0.375, 0.375], abs=1e-7)


def test_triple_root_accuracy_is_cube_root_of_epsilon():
    got = real_roots(np.poly([1.0, 1.0, 1.0]))
    assert len(got) >= 1
    assert all(abs(g - 1.0) < 1e-4 for g in got)


def test_complex_pair_is_dropped():
    # x^2 + 1 times (x - 2)
    assert real_roots([1, -2, 1, -2]) == pytest.approx([2.0])
