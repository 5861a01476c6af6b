// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "ngrc/baseline.hpp"
#include "ngrc/experiment.hpp"
#include "ngrc/features.hpp"
#include "ngrc/model.hpp"
#include "ngrc/regression.hpp"
#include "ngrc/systems.hpp"
#include "ngrc/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace ngrc;
using json = nlohmann::ordered_json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = out.pass && elapsed < budget_s;
    if (out.pass && !pass) {
        out.detail += "; over the time budget";
    }
    failures += pass ? 0 : 1;
    std::printf("%s  %2d  %s: %s  [%.2f s, budget %g s]\n", pass ? "PASS" : "FAIL", id, title,
                out.detail.c_str(), elapsed, budget_s);
    std::fflush(stdout);
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = u(rng);
    }
    return m;
}

std::vector<std::vector<int>> brute_force_table(int n, int p) {
    std::set<std::vector<int>> unique;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (p == 2) {
                std::vector<int> t{a, b};
                std::sort(t.begin(), t.end());
                unique.insert(t);
                continue;
            }
            for (int c = 0; c < n; ++c) {
                std::vector<int> t{a, b, c};
                std::sort(t.begin(), t.end());
                unique.insert(t);
            }
        }
    }
    return {unique.begin(), unique.end()};
}

ExperimentConfig config_for(Task task) { return default_config(task); }

double median_of(const json& stats) { return stats["median"].get<double>(); }

}  // namespace

int main() {
    criterion(1, "feature counts", 1.0, [] {
        const std::size_t a = feature_length(FeatureSpec(3, 2, 1, {2}, true));
        const std::size_t b = feature_length(FeatureSpec(3, 2, 1, {3}, false));
        const std::size_t c = feature_length(FeatureSpec(2, 4, 5, {2}, true));
        return Outcome{a == 28 && b == 62 && c == 45,
                       fmt("%g / %g / %g (want 28 / 62 / 45)", static_cast<double>(a),
                           static_cast<double>(b), static_cast<double>(c))};
    });

    criterion(2, "ridge fit vs dense-inverse formula", 1.0, [] {
        std::mt19937_64 rng(99);
        std::uniform_int_distribution<int> dim(1, 60);
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const int f = dim(rng);
            const int n = f + 40;
            const TrainingBlock b{random_matrix(f, n, rng), random_matrix(3, n, rng)};
            const double alpha = 1e-3;
            const Eigen::MatrixXd gram = b.features * b.features.transpose() +
                                         alpha * Eigen::MatrixXd::Identity(f, f);
            const Eigen::MatrixXd oracle = b.targets * b.features.transpose() * gram.inverse();
            worst = std::max(worst, (ridge_fit(b, alpha).weights - oracle).cwiseAbs().maxCoeff());
        }
        return Outcome{worst < 1e-10, fmt("max |dW| = %.3g over 50 instances (< 1e-10)", worst)};
    });

    criterion(3, "monomial tables vs brute force", 1.0, [] {
        int mismatches = 0;
        for (int n = 1; n <= 12; ++n) {
            for (int p : {2, 3}) {
                mismatches += monomial_exponent_table(n, p) == brute_force_table(n, p) ? 0 : 1;
            }
        }
        return Outcome{mismatches == 0,
                       fmt("%g mismatching tables for n_vars <= 12, p in {2,3}", mismatches)};
    });

    // Criteria 4, 5 and 7 read one forecast-lorenz run, timed under criterion 4.
    json ls;
    criterion(4, "Lorenz63 forecast skill", 10.0, [&] {
        ls = run_experiment(config_for(Task::ForecastLorenz)).summary;
        const double vt = median_of(ls["valid_time"]);
        return Outcome{vt >= 3.0 && ls["segments"].size() == 10,
                       fmt("median valid time %.3g Lyapunov times over 10 segments, range "
                           "[%.3g, %.3g] (>= 3)",
                           vt, ls["valid_time"]["min"].get<double>(),
                           ls["valid_time"]["max"].get<double>())};
    });

    criterion(5, "Lorenz63 steady states", 30.0, [&] {
        bool ok = true;
        std::string detail;
        for (const auto& e : ls["uss"]) {
            const bool all = e["converged"] == e["repeats"];
            const double worst = e["max_distance"].is_null() ? INFINITY : e["max_distance"].get<double>();
            ok = ok && all && worst < 2e-2;
            detail += fmt("%.2e +- %.1e (max %.2e); ", e["mean_distance"].get<double>(),
                          e["stddev_distance"].get<double>(), worst);
        }
        return Outcome{ok, "scaled distances " + detail + "every segment < 2e-2"};
    });

    criterion(6, "double-scroll steady states", 30.0, [] {
        const ExperimentResult ds = run_experiment(config_for(Task::ForecastDoubleScroll));
        const json& s = ds.summary;
        const double origin = s["origin_map_residual"]["max"].get<double>();
        const double origin_dist = s["uss"][0]["max_distance"].get<double>();
        double worst = 0.0;
        bool converged = true;
        for (std::size_t j = 1; j < s["uss"].size(); ++j) {
            converged = converged && s["uss"][j]["converged"] == s["uss"][j]["repeats"];
            worst = std::max(worst, s["uss"][j]["max_distance"].get<double>());
        }
        return Outcome{origin < 1e-12 && origin_dist < 1e-12 && converged && worst < 2e-2,
                       fmt("max |W O(0)| = %.3g, origin estimate error %.3g (< 1e-12); nonzero "
                           "USS max distance %.3g (< 2e-2)",
                           origin, origin_dist, worst)};
    });

    criterion(7, "return map over 1000 time units", 120.0, [&] {
        const json& m = ls["return_map"];
        const double rel = m["relative_deviation"].is_null()
                               ? INFINITY
                               : m["relative_deviation"].get<double>();
        return Outcome{rel < 0.02 && m["window"].get<double>() >= 1000.0,
                       fmt("median deviation %.3g%% of the M range over 10 models, %g diverged "
                           "(< 2%%)",
                           100 * rel, m["diverged"].get<double>())};
    });

    criterion(8, "training-size sweep", 300.0, [] {
        const ExperimentResult sweep = run_experiment(config_for(Task::SweepTrainSize));
        double mean400 = NAN, mean1000 = NAN, median1000 = NAN, worst_ratio = 0.0;
        for (const auto& row : sweep.summary["sizes"]) {
            const int n = row["train_points"];
            if (n == 400) {
                mean400 = row["mean_nrmse"];
            }
            if (n == 1000) {
                mean1000 = row["mean_nrmse"];
                median1000 = row["median_nrmse"];
            }
        }
        for (const auto& row : sweep.summary["sizes"]) {
            if (row["train_points"].get<int>() >= 250) {
                worst_ratio = std::max(worst_ratio, row["median_nrmse"].get<double>() / median1000);
            }
        }
        const double ratio = mean400 / mean1000;
        return Outcome{ratio <= 1.5 && worst_ratio <= 1.5,
                       fmt("mean NRMSE(400)/mean NRMSE(1000) = %.3g (<= 1.5); worst median "
                           "NRMSE for sizes >= 250 is %.3g x the median at 1000 (<= 1.5)",
                           ratio, worst_ratio)};
    });

    criterion(9, "noise-driven Lorenz63", 120.0, [] {
        const ExperimentResult noise = run_experiment(config_for(Task::NoiseLorenz));
        const double med = median_of(noise.summary["scaled_rmse"]);
        const double ratio = med / 1.34e-2;
        return Outcome{ratio <= 5.0 && noise.summary["runs"].size() == 10,
                       fmt("10-seed median scaled RMSE %.3g = %.3g x 1.34e-2 (<= 5x)", med,
                           ratio)};
    });

    criterion(10, "inference of z", 10.0, [] {
        const ExperimentResult inf = run_experiment(config_for(Task::InferLorenz));
        const json& s = inf.summary;
        const bool shape = s["readout_shape"][0] == 1 && s["readout_shape"][1] == 45;
        const double ratio = median_of(s["ratio"]);
        return Outcome{shape && ratio <= 2.0,
                       std::string(shape ? "readout 1x45" : "wrong readout shape") +
                           fmt("; median testing/training NRMSE %.3g (<= 2), testing NRMSE "
                               "median %.3g",
                               ratio, median_of(s["testing_nrmse"]))};
    });

    criterion(11, "complexity report", 1.0, [] {
        const ExperimentResult cx = run_experiment(config_for(Task::Complexity));
        const json& first = cx.summary["rows"][0];
        const double speedup = first["speedup"];
        const std::string quoted = first["quoted_speedup"];
        const bool csv_has_range =
            std::any_of(cx.artifacts.begin(), cx.artifacts.end(), [](const Artifact& a) {
                return a.name == "complexity.csv" && a.content.find("33-163") != std::string::npos;
            });
        return Outcome{std::abs(speedup / 33.0 - 1.0) <= 0.10 && quoted == "33-163" && csv_has_range,
                       fmt("low-connectivity Lorenz63 speedup %.4g vs 33 (+-10%%), quoted range "
                           "printed alongside",
                           speedup)};
    });

    criterion(12, "property suites", 60.0, [] {
        std::vector<std::string> broken;
        // odd symmetry of features and forecasts
        {
            std::mt19937_64 rng(12);
            const FeatureSpec odd(3, 2, 1, {3}, false);
            for (int t = 0; t < 100; ++t) {
                const Eigen::MatrixXd w = random_matrix(2, 3, rng) * 3.0;
                if (total_features(-w, odd) != -total_features(w, odd)) {
                    broken.push_back("odd features");
                    break;
                }
            }
            ExperimentConfig c = config_for(Task::ForecastDoubleScroll);
            const SystemDef ds = double_scroll();
            IntegrationConfig ic;
            ic.dt = c.dt;
            ic.t_span = 401 * c.dt;
            ic.rtol = c.rtol;
            ic.atol = c.atol;
            ic.initial_state = settle(ds, Eigen::Vector3d(0.1, 0.1, 0.1), 20.0, c.rtol, c.atol);
            TimeSeries data = integrate(ds, ic);
            const NgrcModel m = train_forecaster(data, odd, c.alpha);
            TimeSeries mirrored = data;
            mirrored.values = -data.values;
            if (forecast(m, mirrored, 400).values != -forecast(m, data, 400).values) {
                broken.push_back("odd forecasts");
            }
        }
        // regularization monotonicity
        {
            std::mt19937_64 rng(13);
            for (int t = 0; t < 20; ++t) {
                const TrainingBlock b{random_matrix(15, 40, rng), random_matrix(3, 40, rng)};
                double previous = INFINITY;
                for (double alpha = 1e-8; alpha <= 1e4; alpha *= 10) {
                    const double norm = ridge_fit(b, alpha).weights.norm();
                    if (norm > previous * (1 + 1e-12)) {
                        broken.push_back("ridge monotonicity");
                        break;
                    }
                    previous = norm;
                }
            }
        }
        // bit-identical reruns, including from the emitted resolved config
        {
            ExperimentConfig c = config_for(Task::ForecastLorenz);
            c.segments = 3;
            c.return_map_window = 200;
            const ExperimentResult a = run_experiment(c);
            const ExperimentResult b = run_experiment(c);
            const ConfigParse again = parse_config(a.artifacts.front().content);
            const ExperimentResult r = run_experiment(*again.config);
            for (const ExperimentResult* other : {&b, &r}) {
                bool same = a.summary.dump() == other->summary.dump() &&
                            a.artifacts.size() == other->artifacts.size();
                for (std::size_t i = 0; same && i < a.artifacts.size(); ++i) {
                    same = a.artifacts[i].content == other->artifacts[i].content;
                }
                if (!same) {
                    broken.push_back("determinism");
                }
            }
        }
        // steady-state residuals and integration from a steady state
        double worst = 0.0;
        for (const SystemDef& system : {lorenz63(), double_scroll()}) {
            for (const auto& x : system.steady_states) {
                worst = std::max(worst, system.rhs(x).cwiseAbs().maxCoeff());
                IntegrationConfig ic;
                ic.initial_state = x;
                ic.t_span = 1.0;
                const TimeSeries s = integrate(system, ic);
                worst = std::max(worst, (s.values.rowwise() - x.transpose()).cwiseAbs().maxCoeff());
            }
        }
        if (worst >= 1e-8) {
            broken.push_back("steady-state residuals");
        }
        std::string detail = broken.empty() ? "odd symmetry, ridge monotonicity, bit-identical "
                                              "reruns hold; steady-state residual "
                                            : "broken: ";
        for (const auto& b : broken) {
            detail += b + ", ";
        }
        detail += fmt("%.2g (< 1e-8)", worst);
        return Outcome{broken.empty(), detail};
    });

    std::printf("%s: %d of 12 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
