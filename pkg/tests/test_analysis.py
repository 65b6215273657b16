import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fadesim.analysis import (
    MseAccumulator,
    decompose,
    efficiency_constant,
    empirical_mse,
    ml_mse_closed_form,
    off_consensus_norm,
)
from fadesim.model import SensingModel


def test_decompose_two_scalars():
    parts = decompose([3.0, 1.0], 2)
    np.testing.assert_allclose(parts.in_consensus, [2.0])
    np.testing.assert_allclose(parts.off_consensus, [1.0, -1.0])


def test_decompose_rejects_bad_length():
    with pytest.raises(ValueError):
        decompose(np.ones(5), 2)


vectors = arrays(np.float64, st.integers(1, 6).map(lambda k: 3 * k),
                 elements=st.floats(-1e3, 1e3, allow_nan=False))


@settings(max_examples=60, deadline=None)
@given(vectors, vectors, st.floats(-10, 10))
def test_decompose_linear_and_orthogonal(u, v, a):
    if u.size != v.size:
        v = np.resize(v, u.size)
    n = u.size // 3
    pu, pv = decompose(u, n, 3), decompose(v, n, 3)
    pw = decompose(a * u + v, n, 3)
    np.testing.assert_allclose(pw.in_consensus, a * pu.in_consensus + pv.in_consensus, atol=1e-8)
    np.testing.assert_allclose(pw.off_consensus, a * pu.off_consensus + pv.off_consensus, atol=1e-8)
    np.testing.assert_allclose(pu.reconstruct(), u, atol=1e-9)
    inner = np.tile(pu.in_consensus, n) @ pu.off_consensus
    assert abs(inner) <= 1e-9 * (1 + np.dot(u, u))


def test_off_consensus_norm_zero_at_consensus():
    x = np.tile([1.0, 2.0], (4, 1))
    assert off_consensus_norm(x) == 0.0


def test_closed_form_two_unit_agents():
    model = SensingModel([[[1.0]], [[1.0]]])
    assert ml_mse_closed_form(model, 2) == pytest.approx(0.25)


def test_identity_sensing_constant_is_d_over_n():
    model = SensingModel([np.eye(3)] * 5)
    assert efficiency_constant(model) == pytest.approx(3 / 5)


def test_scaled_closed_form_is_constant(mixed_model):
    t = np.array([1, 10, 100, 5000])
    np.testing.assert_allclose(t * ml_mse_closed_form(mixed_model, t), efficiency_constant(mixed_model))


def test_closed_form_rejects_t0(mixed_model):
    with pytest.raises(ValueError):
        ml_mse_closed_form(mixed_model, 0)


def test_empirical_mse_needs_traces():
    with pytest.raises(ValueError):
        empirical_mse([], [0.0])


def test_empirical_scaled_mse_of_average_of_two():
    g = np.random.default_rng(3)
    model = SensingModel([[[1.0]], [[1.0]]])
    steps, runs = 50, 2000
    traces = []
    for _ in range(runs):
        y = g.standard_normal((steps, 2)) + 1.0
        est = np.cumsum(y.mean(axis=1)) / np.arange(1, steps + 1)
        traces.append(est[:, None])
    curve = empirical_mse(traces, [1.0], model=model)
    assert curve.scaled_mse[-1, 0] == pytest.approx(0.5, rel=0.1)
    np.testing.assert_allclose(curve.ml_mse * curve.times, 0.5)


def test_accumulator_single_run():
    acc = MseAccumulator([1, 2])
    err = np.array([[[1.0, 2.0]], [[0.0, -3.0]]])
    acc.add(err)
    res = acc.result()
    np.testing.assert_array_equal(res.mse[:, 0], [5.0, 9.0])
    np.testing.assert_array_equal(res.coord_mse[:, 0], err[:, 0] ** 2)
    assert np.all(np.isnan(res.mse_se))


def test_accumulator_standard_error():
    acc = MseAccumulator([1])
    for v in (1.0, 2.0, 3.0):
        acc.add(np.array([[[np.sqrt(v)]]]))
    res = acc.result()
    assert res.mse[0, 0] == pytest.approx(2.0)
    assert res.mse_se[0, 0] == pytest.approx(np.std([1, 2, 3], ddof=1) / np.sqrt(3))


def test_accumulator_rejects_shape_change():
    acc = MseAccumulator([1, 2])
    acc.add(np.zeros((2, 1, 1)))
    with pytest.raises(ValueError):
        acc.add(np.zeros((2, 2, 1)))
