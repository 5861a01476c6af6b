import math

import numpy as np
import pytest

import ngrc


def lorenz_series(samples, dt=0.025):
    system = ngrc.lorenz63()
    start = ngrc.settle(system, [1.0, 1.0, 1.0], 20.0, 1e-3, 1e-6)
    return ngrc.integrate(system, start, (samples - 1) * dt, dt=dt, rtol=1e-3, atol=1e-6)


def test_feature_lengths():
    assert ngrc.feature_length(ngrc.FeatureSpec(3, 2, 1, [2], True)) == 28
    assert ngrc.feature_length(ngrc.FeatureSpec(3, 2, 1, [3], False)) == 62
    assert len(ngrc.FeatureSpec(2, 4, 5, [2])) == 45
    assert ngrc.monomial_exponent_table(2, 2) == [[0, 0], [0, 1], [1, 1]]


def test_total_features_hand_example():
    spec = ngrc.FeatureSpec(1, 2, 1, [2], include_constant=False)
    out = ngrc.total_features(np.array([[2.0], [3.0]]), spec)
    np.testing.assert_array_equal(out, [2, 3, 4, 6, 9])


def test_ridge_fit_matches_closed_form():
    rng = np.random.default_rng(0)
    o = rng.uniform(-1, 1, (5, 40))
    y = rng.uniform(-1, 1, (2, 40))
    w = ngrc.ridge_fit(o, y, 1e-3)
    oracle = y @ o.T @ np.linalg.inv(o @ o.T + 1e-3 * np.eye(5))
    assert np.max(np.abs(w - oracle)) < 1e-10


def test_forecast_lorenz():
    data = lorenz_series(402 + 440)
    train = data.slice(0, 402)
    test = data.slice(402, 440)
    model = ngrc.train_forecaster(train, ngrc.FeatureSpec(3, 2, 1, [2]), 2.5e-6)
    assert model.weights.shape == (3, 28)
    assert model.mode == "forecast-delta"
    predicted = ngrc.forecast(model, train, 440)
    assert predicted.values.shape == (440, 3)
    assert predicted.time(0) == pytest.approx(test.time(0))
    scale = lorenz_series(4000).stddev()
    assert ngrc.valid_time(predicted, test, scale, 0.5, 1.1) > 1.0
    assert ngrc.nrmse(predicted.slice(0, 44), test.slice(0, 44), scale) < 0.1

    estimates = ngrc.estimate_model_uss(model, ngrc.lorenz_uss())
    for est, truth in zip(estimates, ngrc.lorenz_uss()):
        assert est is not None
        assert np.linalg.norm((est - truth) / scale) < 2e-2


def test_inference_shape_and_accuracy():
    system = ngrc.lorenz63()
    start = ngrc.settle(system, [1.0, 1.0, 1.0], 20.0)
    data = ngrc.integrate(system, start, 1000 * 0.05, dt=0.05)
    train = data.slice(0, 415)
    model = ngrc.train_inferrer(train, [0, 1], 2, ngrc.FeatureSpec(2, 4, 5, [2]), 1e-3)
    assert model.weights.shape == (1, 45)
    test = data.slice(415, 500)
    z = ngrc.infer(model, test.select([0, 1]))
    truth = test.select([2]).slice(15, 485)
    assert ngrc.nrmse(z, truth, [data.stddev()[2]]) < 0.05


def test_serialization_round_trip():
    model = ngrc.train_forecaster(lorenz_series(402), ngrc.FeatureSpec(3, 2, 1, [2]), 2.5e-6)
    back = ngrc.deserialize(model.serialize())
    np.testing.assert_array_equal(back.weights, model.weights)
    assert back.spec == model.spec


def test_double_scroll_origin_is_exact():
    system = ngrc.double_scroll()
    start = ngrc.settle(system, [0.1, 0.1, 0.1], 20.0, 1e-3, 1e-6)
    data = ngrc.integrate(system, start, 401 * 0.25, dt=0.25, rtol=1e-3, atol=1e-6)
    model = ngrc.train_forecaster(data, ngrc.FeatureSpec(3, 2, 1, [3], False), 1e-2)
    assert model.weights.shape == (3, 62)
    np.testing.assert_array_equal(model.apply(np.zeros(6)), np.zeros(3))


def test_exponential_decay_and_errors():
    decay = ngrc.make_system("decay", 1, lambda x: -x)
    s = ngrc.integrate(decay, [1.0], 1.0, dt=0.1)
    assert abs(s.values[-1, 0] - math.exp(-1)) < 1e-6
    with pytest.raises(ngrc.InvalidArgument):
        ngrc.ridge_fit(np.ones((2, 3)), np.ones((1, 3)), -1.0)
    with pytest.raises(ngrc.NgrcError):
        ngrc.train_forecaster(lorenz_series(2), ngrc.FeatureSpec(3, 2, 1, [2]), 1.0)


def test_return_map_of_sine():
    t = np.arange(0, 100.0001, 0.05)
    m = ngrc.extract_return_map(ngrc.TimeSeries(np.sin(t)[:, None], dt=0.05), 0, 1000.0)
    assert np.allclose(m.maxima, 1.0, atol=1e-6)
    assert ngrc.return_map_deviation(m, m) == 0.0


def test_cost_estimate():
    ng = ngrc.CostParams(train_steps=400, total_features=28, nonlinear=21)
    rc = ngrc.CostParams(warmup_steps=1000, train_steps=1000, total_features=100, nodes=100,
                         density=0.01)
    assert ngrc.estimate_cost(ng, rc) == pytest.approx(33, rel=0.1)


def test_config_and_experiment():
    resolved, errors = ngrc.resolve_config("task = forecast-lorenz\nalpha = -1\n")
    assert resolved is None
    assert len(errors) == 1 and errors[0].startswith("alpha")
    resolved, errors = ngrc.resolve_config("task = complexity\n")
    assert errors == [] and "task = complexity" in resolved

    summary, files = ngrc.run_experiment({"task": "forecast-lorenz", "segments": 2,
                                          "return_map_window": 100})
    assert summary["feature_dim"] == 28
    assert summary["readout_shape"] == [3, 28]
    assert "resolved.cfg" in files and "forecast.csv" in files
    again, _ = ngrc.run_experiment(files["resolved.cfg"])
    assert again == summary


def test_integrator_agrees_with_scipy_rk23():
    scipy_integrate = pytest.importorskip("scipy.integrate")
    system = ngrc.lorenz63()
    x0 = [1.0, 1.0, 1.0]
    dt = 0.025
    ours = ngrc.integrate(system, x0, 5.0, dt=dt, rtol=1e-3, atol=1e-6)
    ref = scipy_integrate.solve_ivp(lambda t, x: system.rhs(x), (0.0, 5.0), x0, method="RK23",
                                    t_eval=ours.times(), rtol=1e-3, atol=1e-6)
    assert np.max(np.abs(ours.values - ref.y.T)) < 1e-9
