import random
from fractions import Fraction

import numpy as np
import pytest

from toricmle import delpezzo
from toricmle.ipf import ipf_solve
from toricmle.model import evaluate_binomial, parametrize


def test_catalog_has_sixteen_labels_in_order():
    labels = [e.label for e in delpezzo.catalog()]
    assert labels == ["3", "4a", "4b", "4c", "5a", "5b", "6a", "6b", "6c", "6d",
                      "7a", "7b", "8a", "8b", "8c", "9"]


def test_cubic_entry():
    e = delpezzo.entry("3")
    assert [str(g) for g in e.generators] == ["p1*p2*p3 - p4^3"]
    assert (e.degree, e.ml_degree) == (3, 3)
    assert e.matrix.tolist() == [[2, 1, 0, 1], [1, 2, 0, 1]]


def test_quintic_and_nonic_entries():
    e5 = delpezzo.entry("5a")
    assert len(e5.generators) == 5 and {g.degree for g in e5.generators} == {2}
    assert (e5.degree, e5.ml_degree) == (5, 3)
    e9 = delpezzo.entry("9")
    assert len(e9.generators) == 27 and {g.degree for g in e9.generators} == {2}
    assert (e9.degree, e9.ml_degree) == (9, 9)
    assert delpezzo.ml_degree("5b") == 5


def test_unknown_label():
    with pytest.raises(delpezzo.UnknownLabelError):
        delpezzo.entry("10")


def test_boundary_points_of_a_square():
    assert delpezzo.boundary_point_count([(0, 0), (2, 0), (0, 2), (2, 2), (1, 1)]) == 8


@pytest.mark.parametrize("label", [e.label for e in delpezzo.catalog()])
def test_generators_vanish_on_the_model(label, rng):
    e = delpezzo.entry(label)
    for _ in range(5):
        theta = [Fraction(rng.choice([-3, -2, -1, 1, 2, 5]), rng.randint(1, 4))
                 for _ in range(2)]
        p = parametrize(e.matrix, None, Fraction(7, 3), theta)
        assert all(evaluate_binomial(g, p) == 0 for g in e.generators)
    assert delpezzo.boundary_point_count(e.polytope.points) == e.degree


def test_cubic_coefficients_follow_reference_formula():
    u = (5, 7, 2, 9)
    a, b, c = delpezzo.coefficients("3", u)
    assert (a, b, c) == (Fraction(3, 23), Fraction(5, 23), Fraction(15, 23))
    # 28 x^3 + ((a+b) - 27c) x^2 + (ab + 9c^2) x - c^3
    assert delpezzo.likelihood_polynomial("3", a, b, c) == (
        28, a + b - 27 * c, a * b + 9 * c * c, -c ** 3)


def test_cubic_uniform_data():
    res = delpezzo.closed_form_mle("3", (1, 1, 1, 1))
    assert res.x == pytest.approx(0.25)
    assert np.allclose(res.estimate.values, 0.25)


def test_closed_form_permutations():
    assert delpezzo.closed_form_permutation("3") == (0, 1, 2, 3)
    for label in delpezzo.CLOSED_FORM_LABELS:
        perm = delpezzo.closed_form_permutation(label)
        cols = delpezzo.closed_form(label).design_matrix.columns()
        pts = delpezzo.entry(label).polytope.points
        # same polygon up to a lattice translation
        shift = np.array(cols[0]) - np.array(pts[perm[0]])
        assert all(tuple(np.array(pts[k]) + shift) == tuple(c) for k, c in zip(perm, cols))


@pytest.mark.parametrize("label", ["3", "4a", "4b", "4c", "5a"])
def test_closed_form_matches_ipf(label):
    rng = random.Random(hash(label) % 1000)
    A = delpezzo.closed_form(label).design_matrix
    for _ in range(5):
        u = [rng.randint(1, 300) for _ in range(A.n_cols)]
        res = delpezzo.closed_form_mle(label, u)
        ref = ipf_solve(A, u, )
        assert np.allclose(res.estimate.values, ref.estimate.values, atol=1e-8)
        assert res.residual.max() < 1e-10
        assert len(res.polynomial) - 1 == delpezzo.ml_degree(label)


def test_delpezzo_mle_catalog_order_round_trip():
    u = (11, 3, 8, 20, 6)
    est, method, res = delpezzo.delpezzo_mle("4c", u)
    assert method == "closed_form"
    ref = ipf_solve(delpezzo.entry("4c").matrix, u)
    assert np.allclose(est.values, ref.estimate.values, atol=1e-8)


def test_delpezzo_mle_falls_back_to_ipf():
    e = delpezzo.entry("6a")
    u = tuple(range(1, len(e.polytope) + 1))
    est, method, res = delpezzo.delpezzo_mle("6a", u)
    assert method == "ipf" and res.converged
    assert res.generator_residual < 1e-8
    with pytest.raises(ValueError):
        delpezzo.delpezzo_mle("6a", u, order="closed_form")


def test_closed_form_rejects_zero_counts():
    with pytest.raises(ValueError):
        delpezzo.closed_form_mle("3", (0, 1, 1, 1))
