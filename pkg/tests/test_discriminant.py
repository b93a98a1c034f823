from fractions import Fraction

import pytest

from toricmle import discriminant as disc
from toricmle.model import DesignMatrix, LatticePolytope, Scaling, evaluate_binomial
from toricmle.qfield import QuadraticNumber


def test_triangle_faces():
    faces = disc.enumerate_faces([(0, 0), (1, 0), (0, 1)])
    dims = sorted(f.dim for f in faces)
    assert dims == [0, 0, 0, 1, 1, 1, 2]
    assert faces[-1].dim == 2


def test_veronese_faces_include_interior_points_of_edges():
    cfg = disc.ScaledConfig.build(LatticePolytope(disc.VERONESE_POINTS))
    edges = cfg.edges()
    assert len(edges) == 3
    assert sorted(len(f.indices) for f in edges) == [3, 3, 3]
    assert all(disc.lattice_length(f, cfg.matrix) == 2 for f in edges)


def test_edge_discriminants():
    A = DesignMatrix(((0, 1, 2),))
    face = disc.FaceConfig((0, 1, 2), 1)
    assert disc.edge_discriminant(face, (1, 2, 1), A) == 0      # (1 + x)^2
    assert disc.edge_discriminant(face, (1, 1, 1), A) == -3
    assert disc.edge_discriminant(disc.FaceConfig((0, 1), 1), (5, 7), A) == 1
    assert disc.edge_discriminant(disc.FaceConfig((1,), 0), (5,), A) == 1
    long = DesignMatrix(((0, 1, 2, 3),))
    with pytest.raises(disc.UnsupportedFaceError):
        disc.edge_discriminant(disc.FaceConfig((0, 1, 2, 3), 1), (1, 1, 1, 1), long)


def test_quintic_5a_fc_exact():
    cfg = disc.ScaledConfig.from_matrix(disc.QUINTIC_5A)
    x, y = Fraction(2), Fraction(-1, 3)
    val, grad = disc.f_c(cfg, (x, y))
    assert val == y + y * y + x + x * y * y + x * x * y + x * y
    assert grad == (1 + y * y + 2 * x * y + y, 1 + 2 * y + 2 * x * y + x * x + x)


def test_quintic_5a_witnesses_are_singular():
    cfg = disc.ScaledConfig.from_matrix(disc.QUINTIC_5A)
    for x, y in disc.quintic_5a_witnesses():
        assert x + y == 0 and y * y - y - 1 == 0
        assert disc.verify_singular_point(cfg, (x, y))
    assert not disc.verify_singular_point(cfg, (1, 1))


def test_quintic_5a_removal_points():
    gens = disc.quintic_5a_generators()
    ones = (1,) * 6
    for p in disc.quintic_5a_removal_points():
        assert all(evaluate_binomial(g, p) == 0 for g in gens)
        assert disc.removal_point_check(gens, disc.QUINTIC_5A, ones, p)
        # coordinates sum to zero, so the point is not a distribution
        assert sum(p) == 0
    assert not disc.removal_point_check(gens, disc.QUINTIC_5A, ones, ones)


def test_quintic_5b_long_edge():
    cfg = disc.ScaledConfig.from_matrix(disc.QUINTIC_5B)
    assert disc.f_c(cfg, (1, 1)) == (6, (5, 8))
    long = [f for f in cfg.edges() if disc.lattice_length(f, cfg.matrix) == 2]
    assert [disc.edge_discriminant(f, cfg.scaling.values, cfg.matrix) for f in long] == [-3]


def test_veronese_factors_row1():
    f = disc.veronese_EA(disc.VeroneseScaling(((2, 1, 1), (1, 2, 1), (1, 1, 2))))
    assert (f.det_C, f.d123, f.d356, f.d145) == (4, 3, 3, 3)
    assert f.product == 108


@pytest.mark.parametrize("row", range(7))
def test_veronese_reference_rows(row):
    C, pattern, mldeg = disc.VERONESE_REFERENCE[row]
    S = disc.VeroneseScaling(C)
    assert disc.veronese_EA(S).pattern() == pattern
    assert disc.predict_drop_veronese(S) == (mldeg < 4)


def test_veronese_scaling_round_trip():
    # points (0,0), (1,0), (2,0), (0,1), (0,2), (1,1)
    S = disc.VeroneseScaling.from_coefficients(1, 2, 3, 4, 5, 6)
    assert S.C == ((2, 2, 4), (2, 6, 6), (4, 6, 10))
    assert S.coefficients() == (1, 2, 3, 4, 5, 6)
    assert disc.VeroneseScaling.from_coefficients(*S.coefficients()) == S
    with pytest.raises(ValueError):
        disc.VeroneseScaling(((1, 2, 3), (0, 1, 0), (3, 0, 1)))


def test_rank_singularity_solves_the_quadric():
    # C (1, t1, t2)^T = 0 makes (t1, t2) a singular point of f_c = v^T C v / 2
    C = disc.VeroneseScaling(((17, 22, 27), (22, 29, 36), (27, 36, 45)))
    theta = disc.veronese_rank_singularity(C)
    assert theta == (-2, 1)
    assert disc.verify_singular_point(C.config(), theta)
    assert disc.veronese_rank_singularity(disc.VeroneseScaling(disc.VERONESE_REFERENCE[5][0])) is None
    assert disc.veronese_rank_singularity(disc.VeroneseScaling(disc.VERONESE_REFERENCE[0][0])) is None


def test_float_singular_point_uses_tolerance():
    C = disc.VeroneseScaling(((17, 22, 27), (22, 29, 36), (27, 36, 45)))
    assert disc.verify_singular_point(C.config(), (-2.0, 1.0))
    assert not disc.verify_singular_point(C.config(), (-2.0, 1.001))


def test_critical_linear_system_at_the_mle():
    # saturated simplex: the normalized data solves the linear system
    A = DesignMatrix(((1, 0, 0), (0, 1, 0)))
    u = (2, 3, 5)
    p = tuple(Fraction(x, 10) for x in u)
    forms = disc.critical_linear_system(A, (1, 1, 1), u)
    assert all(disc.evaluate_linear_form(f, p) == 0 for f in forms)


def test_quadratic_field_points_are_exact():
    y = QuadraticNumber(Fraction(1, 2), Fraction(1, 2))
    assert disc.verify_singular_point(disc.ScaledConfig.from_matrix(disc.QUINTIC_5A), (-y, y))
    assert Scaling((1, 1)).values == (1, 1)
