import math

import pytest

import lrp


def test_delta_and_rate():
    assert lrp.delta(1.5, 1) == pytest.approx(2.40942, abs=1e-5)
    assert lrp.chernoff_rate(0.25, 0.5) == pytest.approx(0.130812, abs=1e-6)
    with pytest.raises(ArithmeticError):
        lrp.delta(2.0, 1)
    with pytest.raises(ValueError):
        lrp.chernoff_rate(-1.0, 0.5)


def test_sample_and_distance():
    m = lrp.BondModel(dim=1, s=1.5, beta=0.0, nn_prob=1.0)
    g = lrp.sample_graph(m, 32, seed=3)
    assert g.site_count == 32
    assert g.edge_count == 31
    assert g.largest_component_fraction() == 1.0
    assert lrp.chemical_distance(g, [0], [31]) == 31
    assert g.edge_list_text().startswith("# lrp-edgelist v1")


def test_sampling_is_seeded():
    m = lrp.BondModel(dim=2, s=3.0, beta=1.0)
    a = lrp.sample_graph(m, 16, seed=9).edges()
    b = lrp.sample_graph(m, 16, seed=9, threads=4).edges()
    c = lrp.sample_graph(m, 16, seed=10).edges()
    assert a == b
    assert a != c


def test_theory_helpers():
    seq = lrp.scale_sequence(1, 1, 1.1, 1.5, 1, 0.5, 8)
    for t in seq["c0_terms_exact"]:
        assert t == pytest.approx(math.exp(-1.5), rel=1e-9)
    dist = lrp.complete_graph_exact_distribution(4, 0.7, 0.4)
    assert sum(dist) == pytest.approx(1.0)
    assert lrp.shell_sum(2, 2.0, 1.0, "below") == 5.0
    lhs, rhs, holds = lrp.gap_exponent_inequality(1.5, 1, 0.5, 1)
    assert lhs == rhs and holds


def test_run_experiment():
    rep = lrp.run("cluster-fraction", "--beta", 0, "--nn-prob", 1, "--sides", "16", "--trials", 2)
    assert rep["experiment"] == "cluster-fraction"
    assert rep["summary"][0]["p_below"] == 0.0
    with pytest.raises(RuntimeError):
        lrp.run("cluster-fraction", "--bogus")
