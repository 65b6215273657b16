import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fadesim import network as net
from fadesim.errors import ConfigError, ConnectivityError, WeightMatrixError


def test_connected_by_union():
    ens = net.EdgeSetEnsemble(3, [[(0, 1)], [(1, 2)]])
    assert net.check_average_connectivity(ens)


def test_disconnected_union():
    ens = net.EdgeSetEnsemble(4, [[(0, 1)], [(2, 3)]])
    assert not net.check_average_connectivity(ens)


def test_empty_edge_sets_single_node():
    assert net.check_average_connectivity(net.EdgeSetEnsemble(1, [[]]))


def test_self_loop_rejected():
    with pytest.raises(ValueError):
        net.make_edge_set([(1, 1)], 3)


def test_out_of_range_edge_rejected():
    with pytest.raises(ValueError):
        net.make_edge_set([(0, 3)], 3)


def test_zero_probability_rejected():
    with pytest.raises(ConnectivityError):
        net.EdgeSetEnsemble(2, [[(0, 1)], []], probs=[1.0, 0.0])


def test_probabilities_must_sum_to_one():
    with pytest.raises(ConnectivityError):
        net.EdgeSetEnsemble(2, [[(0, 1)], []], probs=[0.5, 0.4])


def test_metropolis_path():
    w = net.metropolis_weights(net.make_edge_set([(0, 1), (1, 2)], 3), 3).entries
    expected = np.array([[2 / 3, 1 / 3, 0], [1 / 3, 1 / 3, 1 / 3], [0, 1 / 3, 2 / 3]])
    np.testing.assert_allclose(w, expected, atol=1e-15)


def test_metropolis_single_edge_is_average():
    w = net.metropolis_weights(net.make_edge_set([(0, 1)], 2), 2).entries
    np.testing.assert_allclose(w, np.full((2, 2), 0.5), atol=1e-15)


def test_metropolis_empty_set_is_identity():
    w = net.metropolis_weights(frozenset(), 4).entries
    np.testing.assert_array_equal(w, np.eye(4))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.floats(0.05, 1.0), st.integers(0, 2**31))
def test_metropolis_always_valid(n, density, seed):
    g = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = g.random(iu.size) < density
    e = net.make_edge_set(zip(iu[keep], ju[keep]), n)
    w = net.metropolis_weights(e, n)
    assert net.weight_matrix_problems(w, e) == []
    assert np.all(w.entries.sum(axis=0) == pytest.approx(1.0, abs=1e-12))


def test_asymmetric_weight_matrix_rejected():
    e = net.make_edge_set([(0, 1), (1, 2)], 3)
    a = np.array([[0.5, 0.5, 0], [0.2, 0.5, 0.3], [0, 0.5, 0.5]])
    with pytest.raises(WeightMatrixError, match="symmetric"):
        net.validate_weight_matrix(net.WeightMatrix(a), e)


def test_weight_matrix_must_mirror_edges():
    e = net.make_edge_set([(0, 1)], 3)
    problems = net.weight_matrix_problems(net.WeightMatrix(np.full((3, 3), 1 / 3)), e)
    assert any("mirror" in p for p in problems)


def test_sampling_frequencies():
    ens = net.EdgeSetEnsemble(3, [[], [(0, 1)], [(1, 2)], [(0, 2)]], probs=[0.1, 0.2, 0.3, 0.4])
    draws = net.sample_edge_indices(ens, np.random.default_rng(7), 100_000)
    freq = np.bincount(draws, minlength=4) / draws.size
    assert np.max(np.abs(freq - ens.probs)) < 0.01
    assert 0.5 * np.abs(freq - ens.probs).sum() < 0.01


def test_batch_sampling_matches_single_draws():
    ens = net.EdgeSetEnsemble(3, [[], [(0, 1)], [(1, 2)]], probs=[0.2, 0.5, 0.3])
    batch = net.sample_edge_indices(ens, np.random.default_rng(1), 200)
    g = np.random.default_rng(1)
    single = [net.sample_edge_index(ens, g) for _ in range(200)]
    np.testing.assert_array_equal(batch, single)


def test_average_of_averaging_matrix_contracts_fully():
    n = 5
    ens = net.EdgeSetEnsemble(n, [[(i, j) for i in range(n) for j in range(i + 1, n)]])
    rep = net.average_matrices(ens, [net.WeightMatrix(np.full((n, n), 1 / n))])
    assert rep.rho_tilde == pytest.approx(0.0, abs=1e-12)
    assert rep.second_eig_bar == pytest.approx(0.0, abs=1e-12)


def test_identity_mixing_does_not_contract():
    ens = net.EdgeSetEnsemble(4, [[]])
    rep = net.average_matrices(ens, [net.WeightMatrix(np.eye(4))])
    assert rep.rho_tilde == pytest.approx(1.0, abs=1e-12)
    assert not rep.contraction
    assert not rep.connected


@settings(max_examples=120, deadline=None)
@given(st.integers(3, 20), st.integers(1, 8), st.integers(0, 2**31))
def test_connected_ensembles_contract(n, k, seed):
    g = np.random.default_rng(seed)
    ens = net.generate_random_ensemble(n, k, min(1.0, 2.5 / n + 0.1), g)
    probs = g.dirichlet(np.ones(k)) * 0.9 + 0.1 / k
    ens = net.EdgeSetEnsemble(n, ens.edge_sets, probs / probs.sum())
    weights = [net.metropolis_weights(e, n, i) for i, e in enumerate(ens.edge_sets)]
    rep = net.average_matrices(ens, weights)
    assert rep.rho_tilde < 1 - 1e-9
    assert rep.second_eig_bar < 1 - 1e-9
    w_bar = net.average_weight_matrix(ens, weights)
    np.testing.assert_allclose(w_bar.sum(axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(w_bar.sum(axis=1), 1.0, atol=1e-12)


def test_laplacian_of_path():
    lap = net.laplacian(net.make_edge_set([(0, 1), (1, 2)], 3), 3)
    np.testing.assert_array_equal(lap, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])


def test_ensemble_roundtrip(tmp_path):
    ens = net.EdgeSetEnsemble(4, [[(0, 1), (2, 3)], [], [(1, 2)]], probs=[0.1, 0.7, 0.2])
    path = tmp_path / "ens.txt"
    net.write_ensemble(ens, path)
    back = net.read_ensemble(path)
    assert back.nodes == 4 and back.edge_sets == ens.edge_sets
    np.testing.assert_array_equal(back.probs, ens.probs)


def test_ensemble_file_reports_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3 1\n1 1.0 1\n1 x\n")
    with pytest.raises(ConfigError, match="line 3"):
        net.read_ensemble(path)


def test_weights_roundtrip(tmp_path):
    sets = [net.make_edge_set([(0, 1)], 3), net.make_edge_set([(0, 2), (1, 2)], 3)]
    ws = [net.metropolis_weights(e, 3, k) for k, e in enumerate(sets)]
    path = tmp_path / "w.txt"
    net.write_weights(ws, path)
    for a, b in zip(ws, net.read_weights(path)):
        np.testing.assert_array_equal(a.entries, b.entries)


def test_generator_statistics():
    ens = net.generate_random_ensemble(50, 15, 0.1, np.random.default_rng(2))
    stats = net.ensemble_stats(ens)
    assert ens.size == 15 and net.check_average_connectivity(ens)
    assert 0.7 < stats["union_coverage"] < 0.85
    assert 4.0 < stats["mean_degree"] < 5.8


def test_generator_gives_up():
    with pytest.raises(ConnectivityError):
        net.generate_random_ensemble(30, 1, 0.01, np.random.default_rng(0), max_tries=5)
