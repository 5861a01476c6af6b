#include "ngrc/experiment.hpp"

#include "ngrc/baseline.hpp"
#include "ngrc/error.hpp"
#include "ngrc/features.hpp"
#include "ngrc/model.hpp"
#include "ngrc/regression.hpp"
#include "ngrc/systems.hpp"
#include "ngrc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

namespace ngrc {

namespace {

using json = nlohmann::ordered_json;

// A one-Lyapunov-time forecast whose scaled error exceeds the attractor's
// own spread has left the attractor; sweeps count it apart from the mean.
constexpr double kDivergedNrmse = 1.0;

// Samples of the noise-free reference used to scale the noise experiment.
constexpr Eigen::Index kScalingSamples = 8000;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(number(v(i)));
    }
    return out;
}

json stats_json(const std::vector<double>& values) {
    std::vector<double> finite;
    std::copy_if(values.begin(), values.end(), std::back_inserter(finite),
                 [](double v) { return std::isfinite(v); });
    json out;
    out["count"] = finite.size();
    out["nonfinite"] = values.size() - finite.size();
    if (finite.empty()) {
        for (const char* key : {"mean", "stddev", "median", "min", "max"}) {
            out[key] = nullptr;
        }
        return out;
    }
    const double n = static_cast<double>(finite.size());
    const double mean = std::accumulate(finite.begin(), finite.end(), 0.0) / n;
    double var = 0.0;
    for (double v : finite) {
        var += (v - mean) * (v - mean);
    }
    std::sort(finite.begin(), finite.end());
    const std::size_t mid = finite.size() / 2;
    const double median =
        finite.size() % 2 == 1 ? finite[mid] : 0.5 * (finite[mid - 1] + finite[mid]);
    out["mean"] = mean;
    out["stddev"] = std::sqrt(var / n);
    out["median"] = median;
    out["min"] = finite.front();
    out["max"] = finite.back();
    return out;
}

Eigen::Index steps_for(double lyapunov_times, double lyapunov_time, double dt) {
    return std::max<Eigen::Index>(1, std::lround(lyapunov_times * lyapunov_time / dt));
}

Eigen::VectorXd initial_state(const ExperimentConfig& c) {
    return Eigen::Map<const Eigen::VectorXd>(c.initial_state.data(),
                                             static_cast<Eigen::Index>(c.initial_state.size()));
}

Eigen::VectorXd settled_state(const SystemDef& system, const ExperimentConfig& c) {
    return settle(system, initial_state(c), c.transient, c.rtol, c.atol);
}

TimeSeries reference(const SystemDef& system, const ExperimentConfig& c, Eigen::Index samples) {
    IntegrationConfig ic;
    ic.dt = c.dt;
    ic.t_span = static_cast<double>(samples - 1) * c.dt;
    ic.initial_state = settled_state(system, c);
    ic.rtol = c.rtol;
    ic.atol = c.atol;
    return integrate(system, ic);
}

// Gaussian measurement noise on a copy of `series`, std measurement_noise
// times each component's scale.
TimeSeries with_measurement_noise(const TimeSeries& series, const ExperimentConfig& c,
                                  const ScalingVector& scaling, std::uint64_t stream) {
    if (c.measurement_noise == 0.0) {
        return series;
    }
    std::mt19937_64 rng(c.seed ^ stream);
    std::normal_distribution<double> normal(0.0, 1.0);
    TimeSeries noisy = series;
    for (Eigen::Index col = 0; col < noisy.components(); ++col) {
        for (Eigen::Index row = 0; row < noisy.samples(); ++row) {
            noisy.values(row, col) += c.measurement_noise * scaling.values()(col) * normal(rng);
        }
    }
    return noisy;
}

std::vector<std::string> component_names(const SystemDef& system) {
    if (system.name == "double-scroll") {
        return {"V1", "V2", "I"};
    }
    return {"x", "y", "z"};
}

FeatureSpec feature_spec(const ExperimentConfig& c, int d) {
    return FeatureSpec(d, c.k, c.s, c.degrees, c.include_constant, c.constant_value);
}

// Readout entries ranked by magnitude; ties keep row-major order.
json weight_snapshot(const NgrcModel& model, const std::vector<std::string>& outputs,
                     const std::vector<std::string>& inputs) {
    const auto labels = model.feature_map().labels(inputs);
    const Eigen::MatrixXd& w = model.readout().weights;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> order;
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index col = 0; col < w.cols(); ++col) {
            order.emplace_back(r, col);
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        return std::abs(w(a.first, a.second)) > std::abs(w(b.first, b.second));
    });
    json out = json::array();
    for (const auto& [r, col] : order) {
        json entry;
        entry["output"] = outputs[static_cast<std::size_t>(r)];
        entry["feature"] = labels[static_cast<std::size_t>(col)];
        entry["weight"] = number(w(r, col));
        out.push_back(std::move(entry));
    }
    return out;
}

// One-step predictions X_i + W O_i over the training columns, aligned with
// samples (k-1)s+1 .. n-1.
TimeSeries one_step_fit(const NgrcModel& model, const TimeSeries& train) {
    const Eigen::Index first = model.spec().first_valid_index();
    const Eigen::Index last = train.samples() - 2;
    const Eigen::MatrixXd features = model.feature_map().feature_block(train, first, last);
    const Eigen::MatrixXd current = train.values.middleRows(first, last - first + 1);
    Eigen::MatrixXd next =
        current + (model.readout().weights * features).transpose();
    return TimeSeries(train.dt, train.time(first + 1), std::move(next));
}

double raw_rmse(const TimeSeries& a, const TimeSeries& b) {
    if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols()) {
        throw ShapeMismatch("rmse: shapes differ");
    }
    return std::sqrt((a.values - b.values).array().square().mean());
}

std::string segments_csv(const std::vector<std::string>& columns,
                         const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out << (i ? "," : "") << columns[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << format_double(row[i]);
        }
        out << '\n';
    }
    return out.str();
}

json header(const ExperimentConfig& c, const SystemDef* system) {
    json out;
    out["task"] = to_string(c.task);
    if (system) {
        out["system"] = system->name;
        out["lyapunov_time"] = system->lyapunov_time;
        out["dt"] = c.dt;
    }
    return out;
}

// ---------------------------------------------------------------------------

// Median with non-finite entries ranked above every finite one.
double median_failures_high(std::vector<double> values) {
    for (double& v : values) {
        if (!std::isfinite(v)) {
            v = std::numeric_limits<double>::infinity();
        }
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

struct ReturnMaps {
    ReturnMap truth;
    std::optional<ReturnMap> model;  // empty when the free run diverges or stalls
};

// Return maps of one component over return_map_window time units: the
// model running free from the end of `train`, and the true flow from `state`.
ReturnMaps return_maps(const SystemDef& system, const ExperimentConfig& c,
                       const NgrcModel& model, const TimeSeries& train,
                       const Eigen::VectorXd& state, int component) {
    const Eigen::Index n_map = std::lround(c.return_map_window / c.dt);
    IntegrationConfig ic;
    ic.dt = c.dt;
    ic.t_start = train.time(train.samples() - 1);
    ic.t_span = static_cast<double>(n_map) * c.dt;
    ic.initial_state = state;
    ic.rtol = c.rtol;
    ic.atol = c.atol;
    ReturnMaps maps{extract_return_map(integrate(system, ic), component, c.return_map_window),
                    std::nullopt};
    const TimeSeries free_run = forecast(model, train, n_map);
    if (free_run.values.allFinite()) {
        try {
            maps.model = extract_return_map(free_run, component, c.return_map_window);
        } catch (const InsufficientData&) {
        }
    }
    return maps;
}

ExperimentResult run_forecast(const ExperimentConfig& c, const SystemDef& system) {
    ExperimentResult result;
    json& summary = result.summary;
    summary = header(c, &system);
    const auto names = component_names(system);
    const FeatureSpec spec = feature_spec(c, system.dim);
    const Eigen::Index train_samples = c.train_points + spec.warmup_samples();
    const Eigen::Index n_test = steps_for(c.test_horizon, system.lyapunov_time, c.dt);
    const Eigen::Index n_lyap = std::min(n_test, steps_for(1.0, system.lyapunov_time, c.dt));
    const Eigen::Index stride = train_samples + n_test;

    const TimeSeries truth = reference(system, c, c.segments * stride);
    const ScalingVector scaling = ScalingVector::from_series(truth);
    summary["feature_dim"] = feature_length(spec);
    summary["readout_shape"] = {system.dim, feature_length(spec)};
    summary["train_points"] = c.train_points;
    summary["test_steps"] = n_test;
    summary["valid_threshold"] = c.valid_threshold;
    summary["scaling"] = vector_json(scaling.values());

    std::vector<double> vts, test_errors, train_errors, origin_residuals, map_deviations;
    const int map_component = 2;
    std::optional<ReturnMaps> map_example;
    std::vector<std::vector<std::optional<Eigen::VectorXd>>> uss_estimates;
    std::vector<std::vector<double>> rows;
    json segments = json::array();
    for (int seg = 0; seg < c.segments; ++seg) {
        const Eigen::Index start = seg * stride;
        const TimeSeries train = with_measurement_noise(truth.slice(start, train_samples), c,
                                                        scaling, static_cast<std::uint64_t>(seg));
        const NgrcModel model = train_forecaster(train, spec, c.alpha);
        const TimeSeries fit = one_step_fit(model, train);
        const double train_nrmse =
            nrmse(fit, train.slice(spec.first_valid_index() + 1, fit.samples()), scaling);
        const TimeSeries predicted = forecast(model, train, n_test);
        const TimeSeries test = truth.slice(start + train_samples, n_test);
        const double vt =
            valid_time(predicted, test, scaling, c.valid_threshold, system.lyapunov_time);
        const double test_nrmse =
            nrmse(predicted.slice(0, n_lyap), test.slice(0, n_lyap), scaling);
        auto uss = estimate_model_uss(model, system.steady_states);
        const double origin_residual =
            model.apply(Eigen::VectorXd::Zero(spec.linear_length())).cwiseAbs().maxCoeff();

        json record;
        record["segment"] = seg;
        record["training_nrmse"] = number(train_nrmse);
        record["testing_nrmse"] = number(test_nrmse);
        record["valid_time"] = vt;
        json distances = json::array();
        std::vector<double> row{static_cast<double>(seg), train_nrmse, test_nrmse, vt};
        for (std::size_t j = 0; j < uss.size(); ++j) {
            const double dist = uss[j] ? scaling.distance(*uss[j], system.steady_states[j])
                                       : std::numeric_limits<double>::quiet_NaN();
            distances.push_back(number(dist));
            row.push_back(dist);
        }
        record["uss_distance"] = distances;
        record["origin_map_residual"] = number(origin_residual);
        row.push_back(origin_residual);
        if (c.return_map_window > 0.0) {
            ReturnMaps maps = return_maps(system, c, model, train,
                                          truth.values.row(start + train_samples - 1).transpose(),
                                          map_component);
            double relative = std::numeric_limits<double>::quiet_NaN();
            if (maps.model) {
                const auto [lo, hi] =
                    std::minmax_element(maps.truth.maxima.begin(), maps.truth.maxima.end());
                relative = return_map_deviation(*maps.model, maps.truth) / (*hi - *lo);
            }
            record["return_map_deviation"] = number(relative);
            row.push_back(relative);
            map_deviations.push_back(relative);
            if (!map_example && maps.model) {
                map_example = std::move(maps);
            }
        }
        segments.push_back(std::move(record));
        rows.push_back(std::move(row));

        vts.push_back(vt);
        test_errors.push_back(test_nrmse);
        train_errors.push_back(train_nrmse);
        origin_residuals.push_back(origin_residual);
        uss_estimates.push_back(std::move(uss));

        if (seg == 0) {
            summary["weights"] = weight_snapshot(model, names, names);
            result.artifacts.push_back({"model.txt", serialize(model)});
            result.artifacts.push_back({"truth.csv", to_csv(truth.slice(0, stride), names)});
            result.artifacts.push_back({"train.csv", to_csv(train, names)});
            result.artifacts.push_back({"train_fit.csv", to_csv(fit, names)});
            result.artifacts.push_back({"forecast.csv", to_csv(predicted, names)});

        }
    }

    summary["segments"] = std::move(segments);
    summary["valid_time"] = stats_json(vts);
    summary["testing_nrmse"] = stats_json(test_errors);
    summary["training_nrmse"] = stats_json(train_errors);
    summary["origin_map_residual"] = stats_json(origin_residuals);
    if (c.return_map_window > 0.0) {
        json map;
        map["component"] = names[map_component];
        map["window"] = c.return_map_window;
        const auto failed = std::count_if(map_deviations.begin(), map_deviations.end(),
                                          [](double v) { return !std::isfinite(v); });
        map["diverged"] = failed;
        map["relative_deviation"] = number(median_failures_high(map_deviations));
        map["relative_deviation_stats"] = stats_json(map_deviations);
        if (map_example) {
            map["example_model_maxima"] = map_example->model->maxima.size();
            map["example_truth_maxima"] = map_example->truth.maxima.size();
            result.artifacts.push_back({"return_map_truth.csv", to_csv(map_example->truth)});
            result.artifacts.push_back({"return_map_model.csv", to_csv(*map_example->model)});
        }
        summary["return_map"] = std::move(map);
    }

    const UssReport report = summarize_uss(system.steady_states, uss_estimates, scaling);
    json uss = json::array();
    for (const auto& entry : report.entries) {
        json e;
        e["truth"] = vector_json(entry.truth);
        e["mean_estimate"] = vector_json(entry.mean_estimate);
        e["mean_distance"] = number(entry.mean_distance);
        e["stddev_distance"] = number(entry.stddev_distance);
        e["median_distance"] = number(entry.median_distance);
        e["max_distance"] = number(entry.max_distance);
        e["converged"] = entry.converged;
        e["repeats"] = entry.repeats;
        uss.push_back(std::move(e));
    }
    summary["uss"] = std::move(uss);
    result.artifacts.push_back({"uss.csv", to_csv(report)});

    std::vector<std::string> columns{"segment", "training_nrmse", "testing_nrmse", "valid_time"};
    for (std::size_t j = 0; j < system.steady_states.size(); ++j) {
        columns.push_back("uss" + std::to_string(j) + "_distance");
    }
    columns.push_back("origin_map_residual");
    if (c.return_map_window > 0.0) {
        columns.push_back("return_map_deviation");
    }
    result.artifacts.push_back({"segments.csv", segments_csv(columns, rows)});
    return result;
}

ExperimentResult run_inference(const ExperimentConfig& c) {
    ExperimentResult result;
    const SystemDef system = lorenz63();
    json& summary = result.summary;
    summary = header(c, &system);
    const auto all_names = component_names(system);
    std::vector<std::string> inputs;
    for (int i : c.observed) {
        inputs.push_back(all_names[static_cast<std::size_t>(i)]);
    }
    const std::string target_name = all_names[static_cast<std::size_t>(c.target)];

    const FeatureSpec spec = feature_spec(c, static_cast<int>(c.observed.size()));
    const Eigen::Index lag = spec.first_valid_index();
    const Eigen::Index train_samples = c.train_points + lag;
    const Eigen::Index n_test = steps_for(c.test_horizon, system.lyapunov_time, c.dt);
    const Eigen::Index stride = train_samples + n_test;
    const TimeSeries truth = reference(system, c, c.segments * stride);
    const ScalingVector scaling = ScalingVector::from_series(truth);
    const ScalingVector target_scale(Eigen::VectorXd::Constant(1, scaling.values()(c.target)));

    summary["feature_dim"] = feature_length(spec);
    summary["readout_shape"] = {1, feature_length(spec)};
    summary["observed"] = inputs;
    summary["target"] = target_name;
    summary["train_points"] = c.train_points;
    summary["test_steps"] = n_test;

    std::vector<double> train_errors, test_errors, ratios;
    std::vector<std::vector<double>> rows;
    json segments = json::array();
    for (int seg = 0; seg < c.segments; ++seg) {
        const Eigen::Index start = seg * stride;
        const TimeSeries train = with_measurement_noise(truth.slice(start, train_samples), c,
                                                        scaling, static_cast<std::uint64_t>(seg));
        const NgrcModel model = train_inferrer(train, c.observed, c.target, spec, c.alpha);
        const TimeSeries train_out = infer(model, train.select(c.observed));
        const double train_nrmse =
            nrmse(train_out, train.slice(lag, c.train_points).select({c.target}), target_scale);
        const TimeSeries test_in =
            truth.slice(start + train_samples - lag, n_test + lag).select(c.observed);
        const TimeSeries test_out = infer(model, test_in);
        const TimeSeries test_truth = truth.slice(start + train_samples, n_test).select({c.target});
        const double test_nrmse = nrmse(test_out, test_truth, target_scale);
        const double ratio = test_nrmse / train_nrmse;

        json record;
        record["segment"] = seg;
        record["training_nrmse"] = number(train_nrmse);
        record["testing_nrmse"] = number(test_nrmse);
        record["ratio"] = number(ratio);
        segments.push_back(std::move(record));
        rows.push_back({static_cast<double>(seg), train_nrmse, test_nrmse, ratio});
        train_errors.push_back(train_nrmse);
        test_errors.push_back(test_nrmse);
        ratios.push_back(ratio);

        if (seg == 0) {
            summary["weights"] = weight_snapshot(model, {target_name}, inputs);
            result.artifacts.push_back({"model.txt", serialize(model)});
            result.artifacts.push_back({"truth.csv", to_csv(truth.slice(0, stride), all_names)});
            result.artifacts.push_back({"train_fit.csv", to_csv(train_out, {target_name})});
            result.artifacts.push_back({"inferred.csv", to_csv(test_out, {target_name})});
        }
    }
    summary["segments"] = std::move(segments);
    summary["training_nrmse"] = stats_json(train_errors);
    summary["testing_nrmse"] = stats_json(test_errors);
    summary["ratio"] = stats_json(ratios);
    result.artifacts.push_back(
        {"segments.csv",
         segments_csv({"segment", "training_nrmse", "testing_nrmse", "ratio"}, rows)});
    return result;
}

ExperimentResult run_sweep(const ExperimentConfig& c) {
    ExperimentResult result;
    const SystemDef system = lorenz63();
    json& summary = result.summary;
    summary = header(c, &system);
    const FeatureSpec spec = feature_spec(c, system.dim);
    const Eigen::Index warm = spec.warmup_samples();
    const Eigen::Index largest = c.sweep_sizes.back();
    const Eigen::Index n_test = steps_for(c.test_horizon, system.lyapunov_time, c.dt);
    const Eigen::Index stride = largest + warm + n_test;
    const TimeSeries truth = reference(system, c, c.segments * stride);
    const ScalingVector scaling = ScalingVector::from_series(truth);

    summary["segments"] = c.segments;
    summary["test_steps"] = n_test;
    summary["diverged_above"] = kDivergedNrmse;

    std::vector<std::vector<double>> rows;
    json sizes = json::array();
    for (int size : c.sweep_sizes) {
        std::vector<double> kept;
        int diverged = 0;
        for (int seg = 0; seg < c.segments; ++seg) {
            // Every size is tested on the same window, right after the
            // largest training window of the segment.
            const Eigen::Index test_start = seg * stride + largest + warm;
            const TimeSeries train = truth.slice(test_start - (size + warm), size + warm);
            const NgrcModel model = train_forecaster(train, spec, c.alpha);
            const TimeSeries predicted = forecast(model, train, n_test);
            const double e = nrmse(predicted, truth.slice(test_start, n_test), scaling);
            if (std::isfinite(e) && e <= kDivergedNrmse) {
                kept.push_back(e);
            } else {
                ++diverged;
            }
        }
        json s = stats_json(kept);
        json row;
        row["train_points"] = size;
        row["mean_nrmse"] = s["mean"];
        row["stddev_nrmse"] = s["stddev"];
        row["median_nrmse"] = s["median"];
        row["min_nrmse"] = s["min"];
        row["max_nrmse"] = s["max"];
        row["diverged"] = diverged;
        sizes.push_back(row);
        auto value = [](const json& v) {
            return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
        };
        rows.push_back({static_cast<double>(size), value(s["mean"]), value(s["stddev"]),
                        value(s["median"]), value(s["min"]), value(s["max"]),
                        static_cast<double>(diverged)});
    }
    summary["sizes"] = std::move(sizes);
    result.artifacts.push_back(
        {"sweep.csv", segments_csv({"train_points", "mean_nrmse", "stddev_nrmse", "median_nrmse",
                                    "min_nrmse", "max_nrmse", "diverged"},
                                   rows)});
    return result;
}

ExperimentResult run_noise(const ExperimentConfig& c) {
    ExperimentResult result;
    const SystemDef system = lorenz63();
    json& summary = result.summary;
    summary = header(c, &system);
    const auto names = component_names(system);
    const FeatureSpec spec = feature_spec(c, system.dim);
    const Eigen::Index train_samples = c.train_points + spec.warmup_samples();
    const Eigen::Index n_test = steps_for(c.test_horizon, system.lyapunov_time, c.dt);
    const Eigen::VectorXd start = settled_state(system, c);

    IntegrationConfig ref;
    ref.dt = c.dt;
    ref.t_span = static_cast<double>(kScalingSamples - 1) * c.dt;
    ref.initial_state = start;
    ref.rtol = c.rtol;
    ref.atol = c.atol;
    const ScalingVector scaling = ScalingVector::from_series(integrate(system, ref));

    summary["noise_rms"] = c.noise_rms;
    summary["substeps"] = c.substeps;
    summary["test_steps"] = n_test;
    summary["scaling"] = vector_json(scaling.values());

    std::vector<double> scaled, raw, train_errors;
    std::vector<std::vector<double>> rows;
    json runs = json::array();
    Eigen::VectorXd rms_sum = Eigen::VectorXd::Zero(system.dim);
    for (int j = 0; j < c.segments; ++j) {
        const std::uint64_t seed = c.seed ^ static_cast<std::uint64_t>(j);
        IntegrationConfig nc;
        nc.dt = c.dt;
        nc.t_span = static_cast<double>(train_samples - 1) * c.dt;
        nc.initial_state = start;
        nc.seed = seed;
        nc.noise_rms = c.noise_rms;
        nc.substeps = c.substeps;
        const TimeSeries noisy = integrate_noisy(system, nc);
        const NgrcModel model = train_forecaster(noisy, spec, c.alpha);
        const TimeSeries fit = one_step_fit(model, noisy);
        const double train_nrmse =
            nrmse(fit, noisy.slice(spec.first_valid_index() + 1, fit.samples()), scaling);
        const TimeSeries predicted = forecast(model, noisy, n_test);

        IntegrationConfig cc = nc;
        cc.t_start = noisy.time(noisy.samples() - 1);
        cc.t_span = static_cast<double>(n_test) * c.dt;
        cc.initial_state = noisy.values.row(noisy.samples() - 1).transpose();
        cc.seed.reset();
        cc.noise_rms = 0.0;
        const TimeSeries clean = integrate_fixed_rk2(system, cc).slice(1, n_test);
        const double e_scaled = nrmse(predicted, clean, scaling);
        const double e_raw = raw_rmse(predicted, clean);
        rms_sum += noisy.stddev();

        json record;
        record["seed"] = seed;
        record["training_nrmse"] = number(train_nrmse);
        record["scaled_rmse"] = number(e_scaled);
        record["rmse"] = number(e_raw);
        runs.push_back(std::move(record));
        rows.push_back({static_cast<double>(seed), train_nrmse, e_scaled, e_raw});
        scaled.push_back(e_scaled);
        raw.push_back(e_raw);
        train_errors.push_back(train_nrmse);

        if (j == 0) {
            result.artifacts.push_back({"noisy_train.csv", to_csv(noisy, names)});
            result.artifacts.push_back({"forecast.csv", to_csv(predicted, names)});
            result.artifacts.push_back({"clean.csv", to_csv(clean, names)});
        }
    }
    summary["training_component_std"] = vector_json(rms_sum / static_cast<double>(c.segments));
    summary["runs"] = std::move(runs);
    summary["scaled_rmse"] = stats_json(scaled);
    summary["rmse"] = stats_json(raw);
    summary["training_nrmse"] = stats_json(train_errors);
    result.artifacts.push_back(
        {"runs.csv", segments_csv({"seed", "training_nrmse", "scaled_rmse", "rmse"}, rows)});
    return result;
}

struct CostRow {
    const char* system;
    const char* label;
    baseline::CostParams rc;
    const char* quoted;
};

ExperimentResult run_complexity(const ExperimentConfig& c) {
    ExperimentResult result;
    json& summary = result.summary;
    summary = header(c, nullptr);

    auto ng_params = [](const FeatureSpec& spec) {
        baseline::CostParams p;
        p.warmup_steps = static_cast<double>(spec.warmup_samples());
        p.train_steps = 400;
        p.nonlinear = static_cast<double>(nonlinear_length(spec));
        p.total_features = static_cast<double>(feature_length(spec));
        return p;
    };
    const auto lorenz_ng = ng_params(FeatureSpec(3, 2, 1, {2}, true));
    const auto scroll_ng = ng_params(FeatureSpec(3, 2, 1, {3}, false));
    auto rc = [](double warmup, double train, double total, double nodes, double density) {
        baseline::CostParams p;
        p.warmup_steps = warmup;
        p.train_steps = train;
        p.total_features = total;
        p.nodes = nodes;
        p.density = density;
        return p;
    };
    const std::vector<CostRow> table{
        {"lorenz63", "low-connectivity RC, sigma_r=0.01", rc(1000, 1000, 100, 100, 0.01), "33-163"},
        {"lorenz63", "low-connectivity RC, sigma_r=0.05", rc(1000, 1000, 100, 100, 0.05), "33-163"},
        {"lorenz63", "intermediate RC", rc(0, 5000, 300, 300, 0.02), "1.5e3"},
        {"lorenz63", "high-accuracy RC", rc(1e5, 6e4, 4000, 2000, 0.02), "3.2e6"},
        {"double-scroll", "low-connectivity RC, sigma_r=0.01", rc(1000, 1000, 100, 100, 0.01),
         "8-41"},
        {"double-scroll", "low-connectivity RC, sigma_r=0.05", rc(1000, 1000, 100, 100, 0.05),
         "8-41"},
    };

    auto params_json = [](const baseline::CostParams& p) {
        json out;
        out["warmup_steps"] = p.warmup_steps;
        out["train_steps"] = p.train_steps;
        out["total_features"] = p.total_features;
        out["nonlinear"] = p.nonlinear;
        out["nodes"] = p.nodes;
        out["density"] = p.density;
        return out;
    };
    summary["ngrc"] = {{"lorenz63", params_json(lorenz_ng)},
                       {"double-scroll", params_json(scroll_ng)}};
    json rows = json::array();
    std::ostringstream csv;
    csv << "system,baseline,warmup_steps,train_steps,total_features,nodes,density,rc_cost,"
           "ngrc_cost,speedup,quoted_speedup\n";
    for (const auto& row : table) {
        const auto& ng = std::string(row.system) == "lorenz63" ? lorenz_ng : scroll_ng;
        const double rc_cost = baseline::rc_cost(row.rc);
        const double ng_cost = baseline::ngrc_cost(ng);
        const double speedup = baseline::estimate_cost(ng, row.rc);
        json r;
        r["system"] = row.system;
        r["baseline"] = row.label;
        r["params"] = params_json(row.rc);
        r["rc_cost"] = rc_cost;
        r["ngrc_cost"] = ng_cost;
        r["speedup"] = speedup;
        r["quoted_speedup"] = row.quoted;
        rows.push_back(std::move(r));
        csv << row.system << ',' << row.label << ',' << format_double(row.rc.warmup_steps) << ','
            << format_double(row.rc.train_steps) << ',' << format_double(row.rc.total_features)
            << ',' << format_double(row.rc.nodes) << ',' << format_double(row.rc.density) << ','
            << format_double(rc_cost) << ',' << format_double(ng_cost) << ','
            << format_double(speedup) << ',' << row.quoted << '\n';
    }
    summary["rows"] = std::move(rows);
    result.artifacts.push_back({"complexity.csv", csv.str()});
    return result;
}

ExperimentResult run_baseline(const ExperimentConfig& c) {
    ExperimentResult result;
    const SystemDef system = lorenz63();
    json& summary = result.summary;
    summary = header(c, &system);
    const auto names = component_names(system);

    baseline::ReservoirParams params;
    params.nodes = c.nodes;
    params.gamma = c.gamma;
    params.spectral_radius = c.spectral_radius;
    params.density = c.density;
    params.input_scale = c.input_scale;
    params.bias = c.bias;
    params.activation =
        c.activation == "linear" ? baseline::Activation::Linear : baseline::Activation::Tanh;
    params.seed = c.seed;

    const Eigen::Index warm = c.warmup_steps;
    const Eigen::Index n_train = c.train_points;
    const Eigen::Index n_test = steps_for(c.test_horizon, system.lyapunov_time, c.dt);
    const TimeSeries truth = reference(system, c, warm + n_train + 1 + n_test);
    const ScalingVector scaling = ScalingVector::from_series(truth);

    const baseline::Reservoir reservoir = baseline::build_reservoir(params, system.dim);
    const Eigen::MatrixXd states = reservoir.run(truth.slice(0, warm + n_train + 1));
    // Column i is the state after consuming X_i; it predicts X_{i+1}.
    TrainingBlock block;
    block.features =
        baseline::quadratic_readout_features(states.middleCols(warm, n_train));
    block.targets = truth.values.middleRows(warm + 1, n_train).transpose();
    const ReadoutMatrix readout = ridge_fit(block, c.alpha);
    const TimeSeries fit(c.dt, truth.time(warm + 1),
                         (readout.weights * block.features).transpose());
    const double train_nrmse = nrmse(fit, truth.slice(warm + 1, n_train), scaling);

    Eigen::VectorXd r = states.col(warm + n_train);
    Eigen::MatrixXd out(n_test, system.dim);
    for (Eigen::Index j = 0; j < n_test; ++j) {
        const Eigen::VectorXd x =
            readout.weights * baseline::quadratic_readout_features(r);
        out.row(j) = x.transpose();
        r = reservoir.step(r, x);
    }
    const TimeSeries predicted(c.dt, truth.time(warm + n_train + 1), std::move(out));
    const TimeSeries test = truth.slice(warm + n_train + 1, n_test);
    const Eigen::Index n_lyap = std::min(n_test, steps_for(1.0, system.lyapunov_time, c.dt));

    baseline::CostParams ng;
    ng.warmup_steps = 2;
    ng.train_steps = static_cast<double>(n_train);
    ng.nonlinear = 21;
    ng.total_features = 28;
    baseline::CostParams rc;
    rc.warmup_steps = static_cast<double>(warm);
    rc.train_steps = static_cast<double>(n_train);
    rc.total_features = 2.0 * c.nodes;
    rc.nodes = c.nodes;
    rc.density = c.density;

    summary["nodes"] = c.nodes;
    summary["readout_shape"] = {system.dim, 2 * c.nodes};
    summary["spectral_radius"] = baseline::spectral_radius(reservoir.adjacency());
    summary["adjacency_nonzeros"] = (reservoir.adjacency().array() != 0.0).count();
    summary["training_nrmse"] = number(train_nrmse);
    summary["testing_nrmse"] =
        number(nrmse(predicted.slice(0, n_lyap), test.slice(0, n_lyap), scaling));
    summary["valid_time"] =
        valid_time(predicted, test, scaling, c.valid_threshold, system.lyapunov_time);
    summary["estimated_speedup_of_ngrc"] = baseline::estimate_cost(ng, rc);
    result.artifacts.push_back({"truth.csv", to_csv(test, names)});
    result.artifacts.push_back({"forecast.csv", to_csv(predicted, names)});
    return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    const auto errors = validate(config);
    if (!errors.empty()) {
        throw InvalidArgument("experiment: " + errors.front());
    }
    ExperimentResult result;
    switch (config.task) {
        case Task::ForecastLorenz:
            result = run_forecast(config, lorenz63());
            break;
        case Task::ForecastDoubleScroll:
            result = run_forecast(config, double_scroll());
            break;
        case Task::InferLorenz:
            result = run_inference(config);
            break;
        case Task::SweepTrainSize:
            result = run_sweep(config);
            break;
        case Task::NoiseLorenz:
            result = run_noise(config);
            break;
        case Task::Complexity:
            result = run_complexity(config);
            break;
        case Task::BaselineRc:
            result = run_baseline(config);
            break;
    }
    result.artifacts.insert(result.artifacts.begin(), {"resolved.cfg", resolved_text(config)});
    json files = json::array({"summary.json"});
    for (const auto& artifact : result.artifacts) {
        files.push_back(artifact.name);
    }
    result.summary["files"] = std::move(files);
    return result;
}

void write_result(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write '" + (dir / name).string() + "'");
        }
        out << content;
    };
    write("summary.json", result.summary.dump(2) + "\n");
    for (const auto& artifact : result.artifacts) {
        write(artifact.name, artifact.content);
    }
}

}  // namespace ngrc
