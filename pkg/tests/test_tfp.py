from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from toricmle import phylo, tfp
from toricmle.model import Binomial, evaluate_binomial


def tripod_pair():
    """Two tripods glued along their first edge, written out by hand.

    Homogenized tripod labelings (bits, 1) split by the shared bit; the
    projection sends (b, 1) to (b_0, 1 - b_0).
    """
    B = (((0, 0, 0, 1), (0, 1, 1, 1)), ((1, 1, 0, 1), (1, 0, 1, 1)))
    pi = ((1, 0, 0, 0), (-1, 0, 0, 1))
    return tfp.GradedConfig(((0, 1), (1, 0)), B, B, pi, pi)


def test_config_shape():
    cfg = tripod_pair()
    assert (cfg.r, cfg.s, cfg.t) == (2, (2, 2), (2, 2))
    assert cfg.indices()[:3] == [(0, 0, 0), (0, 0, 1), (0, 1, 0)]
    assert tfp.tfp_matrix(cfg).n_cols == 8


def test_config_validation():
    B = (((0, 0, 0, 1), (0, 1, 1, 1)), ((1, 1, 0, 1), (1, 0, 1, 1)))
    pi = ((1, 0, 0, 0), (-1, 0, 0, 1))
    with pytest.raises(tfp.GradingError):
        tfp.GradedConfig(((0, 1), (0, 2)), B, B, pi, pi)  # dependent grading
    with pytest.raises(tfp.GradingError):
        tfp.GradedConfig(((1, 0), (0, 1)), B, B, pi, pi)  # projection mismatch
    with pytest.raises(tfp.GradingError):
        tfp.GradedConfig(((0, 1), (1, 0)), B[:1], B, pi, pi)


def test_quads_of_two_tripods():
    cfg = tripod_pair()
    q = tfp.quad(cfg)
    assert [str(g) for g in q] == ["z(0,0,0)*z(0,1,1) - z(0,0,1)*z(0,1,0)",
                                   "z(1,0,0)*z(1,1,1) - z(1,0,1)*z(1,1,0)"]
    assert tfp.generators([], [], cfg) == q
    assert tfp.lift(Binomial.zero(), cfg) == []


def test_lift_counts_and_homogeneity():
    cfg = tripod_pair()
    f = Binomial.from_variables([(0, 0), (1, 1)], [(0, 1), (1, 0)])
    lifts = tfp.lift(f, cfg, "B")
    assert len(lifts) == 4
    assert str(lifts[0]) == "z(0,0,0)*z(1,1,0) - z(0,1,0)*z(1,0,0)"
    with pytest.raises(tfp.GradingError):
        tfp.lift(Binomial.from_variables([(0, 0), (0, 1)], [(1, 0), (1, 1)]), cfg)


def test_generators_vanish_on_composed_points(rng):
    T5 = phylo.caterpillar(5)
    sp = phylo.split_tree(T5, 4)
    T4 = phylo.subtree(T5, sp.left)
    pos = {l: (i, j) for i, blk in enumerate(sp.blocks_B) for j, l in enumerate(blk)}
    F = [g.relabel({n: pos[l] for n, l in enumerate(phylo.valid_labelings(T4))})
         for g in phylo.phylo_generators(T4)]
    gens = tfp.generators(F, [], sp.config)
    assert len(gens) == 20
    u = tfp.TfpVector.from_flat(sp.config, [rng.randint(1, 30) for _ in sp.config.indices()])
    p, _ = tfp.tfp_mle(sp.config, u, mle_B=lambda c: phylo_mle_flat(T4, sp, c))
    values = {ijk: p[ijk] for ijk in sp.config.indices()}
    assert all(evaluate_binomial(g, values) == 0 for g in gens)


def phylo_mle_flat(T4, sp, counts):
    flat = [l for blk in sp.blocks_B for l in blk]
    est = phylo.phylo_mle(T4, dict(zip(flat, counts)))
    by = dict(zip(phylo.valid_labelings(T4), est.values))
    return tuple(by[l] for l in flat)


def test_marginals_of_worked_data():
    cfg = tripod_pair()
    # slices u^0 = [[17, 27], [6, 19]] and u^1 = [[5, 5], [5, 16]]
    u = tfp.TfpVector((((17, 27), (6, 19)), ((5, 5), (5, 16))))
    uA, uB, uC = tfp.marginals(u)
    assert uA == (69, 31)
    assert uB == (44, 25, 10, 21) and uC == (23, 46, 10, 21)
    M = tfp.tfp_matrix(cfg)
    assert tuple(M.apply(u.flat())) == tuple(cfg.matrix_B().apply(uB)) + tuple(cfg.matrix_C().apply(uC))


def test_compose_critical_exact_and_errors():
    pA = (Fraction(1, 2), Fraction(1, 2))
    pB = ((Fraction(1, 4), Fraction(1, 4)), (Fraction(1, 8), Fraction(3, 8)))
    pC = ((Fraction(1, 3), Fraction(1, 6)), (Fraction(1, 2), Fraction(0)))
    p = tfp.compose_critical(pA, pB, pC)
    assert p[0, 0, 0] == Fraction(1, 6)
    assert sum(p.flat()) == 1
    assert all(m == 0 for m in tfp.slice_minors(p))
    with pytest.raises(tfp.MarginError):
        tfp.compose_critical(pA, pB, ((Fraction(1, 3), Fraction(1, 3)), (Fraction(1, 2), 0)))
    with pytest.raises(ZeroDivisionError):
        tfp.compose_critical((0, 1), ((0, 0), (1, 0)), ((0, 0), (0, 1)))


def test_compose_critical_float_tolerance():
    p = tfp.compose_critical((0.5, 0.5), ((0.25, 0.25 + 1e-12), (0.5, 0.0)),
                             ((0.5, 0.0), (0.25, 0.25)))
    assert abs(p[0, 0, 0] - 0.25) < 1e-9


def test_tfp_mle_tripods_is_exact_and_matches_worked_value():
    cfg = tripod_pair()
    u = tfp.TfpVector((((17, 27), (6, 19)), ((5, 5), (5, 16))))
    p, (pA, pB, pC) = tfp.tfp_mle(cfg, u)
    # p^0_{00} = (44/100)(23/100)/(69/100)
    assert p[0, 0, 0] == Fraction(44 * 23, 100 * 69)
    assert tfp.marginals(p) == (pA, pB, pC)


def test_tfp_mle_falls_back_to_ipf_for_non_saturated_factor():
    # the 4-leaf factor is not saturated, so its estimate comes from iterative scaling
    T5 = phylo.caterpillar(5)
    sp = phylo.split_tree(T5, 4)
    counts = list(range(1, 17))
    labels = [phylo.label_string(phylo._glue(T5, sp, sp.blocks_B[i][j], sp.blocks_C[i][k]))
              for i, j, k in sp.config.indices()]
    p, _ = tfp.tfp_mle(sp.config, counts)
    exact = phylo.mle_by_label(T5, phylo.phylo_mle(T5, dict(zip(labels, counts))))
    for ijk, lab in zip(sp.config.indices(), labels):
        assert abs(float(p[ijk]) - float(exact[lab])) < 1e-8


def test_mldeg_product():
    assert tfp.mldeg_product(1, 5) == 5
    assert tfp.mldeg_product(5, 5) == 25
    with pytest.raises(ValueError):
        tfp.mldeg_product(0, 3)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(min_value=1, max_value=50), min_size=8, max_size=8))
def test_composed_margins_reproduce_inputs(counts):
    cfg = tripod_pair()
    p, (pA, pB, pC) = tfp.tfp_mle(cfg, counts)
    assert tfp.marginals(p) == (pA, pB, pC)
    assert all(m == 0 for m in tfp.slice_minors(p))
    assert sum(p.flat()) == 1
