import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toricmle.ipf import (BOUNDARY, CONVERGED, MAX_ITERATIONS, IpfConfig, ipf_solve,
                          normalize_matrix)
from toricmle.model import Binomial, DesignMatrix, birch_residual

# 2x2 independence model: rows are row indicators then column indicators
INDEP = DesignMatrix(((1, 1, 0, 0), (0, 0, 1, 1), (1, 0, 1, 0), (0, 1, 0, 1)))


def test_independence_model_matches_product_of_margins():
    # row sums (30, 70), column sums (40, 60): p_ij = r_i c_j / 100^2
    res = ipf_solve(INDEP, (10, 20, 30, 40))
    assert res.converged and res.status == CONVERGED
    assert np.allclose(res.estimate.values, (0.12, 0.18, 0.28, 0.42), atol=1e-9)


def test_saturated_tripod_returns_normalized_data():
    A = DesignMatrix.from_columns(((0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)))
    res = ipf_solve(A, (44, 10, 21, 25))
    assert np.allclose(res.estimate.values, (0.44, 0.10, 0.21, 0.25), atol=1e-9)


def test_generator_residual_reported():
    g = Binomial.from_variables([0, 3], [1, 2])
    res = ipf_solve(INDEP, (3, 1, 4, 1), gens=(g,))
    assert res.generator_residual is not None and res.generator_residual < 1e-8


def test_boundary_status_with_zero_margin():
    res = ipf_solve(INDEP, (0, 0, 3, 5))
    assert res.status == BOUNDARY
    assert np.allclose(res.estimate.values, (0, 0, 3 / 8, 5 / 8), atol=1e-9)


def test_iteration_cap():
    res = ipf_solve(INDEP, (10, 20, 30, 40), IpfConfig(tolerance=1e-15, max_iterations=3))
    assert not res.converged and res.status == MAX_ITERATIONS and res.iterations == 3


def test_trace_is_nondecreasing():
    A = DesignMatrix(((2, 1, 0, 1), (1, 2, 0, 1)))
    res = ipf_solve(A, (3, 5, 7, 11))
    assert all(b >= a - 1e-12 for a, b in zip(res.trace, res.trace[1:]))


def test_normalize_matrix_shifts_and_adds_slack_row():
    A = DesignMatrix(((-1, 0, 1), (0, 2, 0)))
    N = normalize_matrix(A)
    assert N.entries[0] == (0, 1, 2)
    sums = [sum(r[j] for r in N.entries) for j in range(3)]
    assert len(set(sums)) == 1
    assert normalize_matrix(DesignMatrix(((0, 0),))).entries[-1] == (1, 1)


def test_input_validation():
    with pytest.raises(ValueError):
        ipf_solve(INDEP, (1, 2, 3))
    with pytest.raises(ValueError):
        ipf_solve(INDEP, (0, 0, 0, 0))
    with pytest.raises(ValueError):
        IpfConfig(tolerance=0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(min_value=1, max_value=200), min_size=4, max_size=4))
def test_birch_point_properties(u):
    A = DesignMatrix(((2, 1, 0, 1), (1, 2, 0, 1)))
    res = ipf_solve(A, u)
    assert res.converged
    assert math.isclose(sum(res.estimate.values), 1.0, abs_tol=1e-12)
    assert birch_residual(res.estimate.values, u, A).margin_residual <= 1e-9
    p = res.estimate.values
    # cubic relation p1 p2 p3 = p4^3 holds on the model
    assert abs(p[0] * p[1] * p[2] - p[3] ** 3) < 1e-9
