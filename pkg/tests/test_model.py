import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from toricmle.model import (Binomial, DataVector, DesignMatrix, DomainError, LatticePolytope,
                            ProbVector, Representation, Scaling, birch_residual,
                            evaluate_binomial, log_likelihood, parametrize, polytope_to_matrix)


def test_cubic_polytope_matrix():
    A = polytope_to_matrix(LatticePolytope(((2, 1), (1, 2), (0, 0), (1, 1))))
    assert A.tolist() == [[2, 1, 0, 1], [1, 2, 0, 1]]
    assert A.column(3) == (1, 1)


def test_tripod_matrix_is_3x4():
    A = polytope_to_matrix(LatticePolytope(((0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1))))
    assert (A.n_rows, A.n_cols) == (3, 4)
    assert A.columns() == [(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)]


def test_polytope_validation():
    with pytest.raises(ValueError):
        LatticePolytope(((0, 0), (0, 0)))
    with pytest.raises(ValueError):
        LatticePolytope(((0, 0), (1,)))
    with pytest.raises(ValueError):
        LatticePolytope(())


def test_data_vector_validation():
    assert DataVector((1, 2, 3)).total == 6
    assert DataVector((1, 3)).normalized() == (Fraction(1, 4), Fraction(3, 4))
    for bad in ((1, -1), (0, 0), (1.5, 2)):
        with pytest.raises(ValueError):
            DataVector(bad)


def test_prob_vector_representations():
    p = ProbVector.exact((Fraction(1, 3), Fraction(2, 3)))
    assert p.representation is Representation.EXACT
    with pytest.raises(ValueError):
        ProbVector.exact((Fraction(1, 3), Fraction(1, 3)))
    q = ProbVector.floating((0.25, 0.75))
    assert q.representation is Representation.FLOAT
    with pytest.raises(ValueError):
        ProbVector.floating((0.5, 0.6))
    with pytest.raises(ValueError):
        ProbVector.exact((Fraction(3, 2), Fraction(-1, 2)))
    assert ProbVector.exact((Fraction(3, 2), Fraction(-1, 2)), distribution=False)[1] == Fraction(-1, 2)


def test_scaling_rejects_zero():
    with pytest.raises(ValueError):
        Scaling((1, 0))


def test_binomial_parse_and_print():
    g = Binomial.parse("p_1p_2p_3-p_4^3")
    assert g.degree == 3
    assert str(g) == "p1*p2*p3 - p4^3"
    assert g.variables() == {0, 1, 2, 3}
    with pytest.raises(ValueError):
        Binomial.parse("p_1 - p_2^2")


def test_binomial_zero_and_canonical():
    assert Binomial.from_variables([0, 1], [1, 0]).is_zero()
    g = Binomial.from_variables([0, 3], [1, 2])
    h = Binomial.from_variables([2, 1], [3, 0])
    assert g.canonical() == h.canonical()


def test_binomial_tuple_variables_print():
    g = Binomial.from_variables([(0, 1, 2)], [(1, 0, 0)])
    assert str(g) == "z(0,1,2) - z(1,0,0)"


def test_parametrize_and_generator():
    A = polytope_to_matrix(LatticePolytope(((2, 1), (1, 2), (0, 0), (1, 1))))
    p = parametrize(A, None, Fraction(3), (Fraction(2), Fraction(1, 5)))
    # p = s * (t1^2 t2, t1 t2^2, 1, t1 t2)
    assert p == (Fraction(12, 5), Fraction(6, 25), 3, Fraction(6, 5))
    g = Binomial.parse("p1*p2*p3 - p4^3")
    assert evaluate_binomial(g, p) == 0


def test_parametrize_domain_error():
    A = DesignMatrix(((-1, 1),))
    with pytest.raises(DomainError):
        parametrize(A, None, 1, (0,))
    assert parametrize(DesignMatrix(((1, 0),)), None, 1, (0,)) == (0, 1)


def test_log_likelihood():
    assert log_likelihood((0.5, 0.5), (1, 1)) == pytest.approx(2 * math.log(0.5))
    assert log_likelihood((0.0, 1.0), (1, 1)) == -math.inf
    assert log_likelihood((0.0, 1.0), (0, 3)) == 0.0
    # unnormalized p is renormalized
    assert log_likelihood((1.0, 1.0), (1, 1)) == pytest.approx(2 * math.log(0.5))


def test_birch_residual_exact_and_float():
    A = DesignMatrix(((1, 0), (0, 1)))
    u = (1, 3)
    exact = birch_residual((Fraction(1, 4), Fraction(3, 4)), u, A)
    assert exact.is_zero() and isinstance(exact.margin_residual, Fraction)
    off = birch_residual((0.3, 0.7), u, A)
    assert off.margin_residual == pytest.approx(0.05)
    with pytest.raises(ValueError):
        birch_residual((1,), u, A)


counts = st.lists(st.integers(min_value=0, max_value=30), min_size=2, max_size=6)


@given(counts)
def test_saturated_model_residual_zero_at_normalized_data(u):
    if sum(u) == 0:
        return
    n = len(u)
    A = DesignMatrix(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))
    p = [Fraction(x, sum(u)) for x in u]
    assert birch_residual(p, u, A).is_zero()


@given(st.lists(st.integers(min_value=0, max_value=5), min_size=1, max_size=4),
       st.lists(st.integers(min_value=0, max_value=5), min_size=1, max_size=4))
def test_binomial_text_round_trip(a, b):
    if sum(a) != sum(b) or sum(a) == 0:
        return
    plus = [i for i, e in enumerate(a) for _ in range(e)]
    minus = [i for i, e in enumerate(b) for _ in range(e)]
    g = Binomial.from_variables(plus, minus)
    if g.is_zero():
        return
    assert Binomial.parse(str(g)).canonical() == g.canonical()
