#include "ngrc/verify.hpp"

#include "ngrc/error.hpp"
#include "ngrc/model.hpp"
#include "ngrc/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ngrc {

ScalingVector::ScalingVector(Eigen::VectorXd scale) : scale_(std::move(scale)) {
    if (scale_.size() == 0 || !(scale_.array() > 0.0).all() || !scale_.allFinite()) {
        throw InvalidArgument("scaling vector: entries must be finite and strictly positive");
    }
}

ScalingVector ScalingVector::from_series(const TimeSeries& reference) {
    return ScalingVector(reference.stddev());
}

double ScalingVector::distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    if (a.size() != scale_.size() || b.size() != scale_.size()) {
        throw ShapeMismatch("scaled distance: dimension mismatch");
    }
    return ((a - b).array() / scale_.array()).matrix().norm();
}

namespace {

void check_shapes(const TimeSeries& predicted, const TimeSeries& truth,
                  const ScalingVector& scaling) {
    if (predicted.samples() != truth.samples() || predicted.components() != truth.components()) {
        throw ShapeMismatch("metric: predicted is " + std::to_string(predicted.samples()) + "x" +
                            std::to_string(predicted.components()) + ", truth is " +
                            std::to_string(truth.samples()) + "x" +
                            std::to_string(truth.components()));
    }
    if (scaling.size() != truth.components()) {
        throw ShapeMismatch("metric: scaling vector length differs from component count");
    }
    if (truth.samples() == 0) {
        throw ShapeMismatch("metric: empty series");
    }
}

Eigen::ArrayXXd scaled_error(const TimeSeries& predicted, const TimeSeries& truth,
                             const ScalingVector& scaling) {
    return (predicted.values - truth.values).array().rowwise() /
           scaling.values().transpose().array();
}

}  // namespace

double nrmse(const TimeSeries& predicted, const TimeSeries& truth, const ScalingVector& scaling) {
    check_shapes(predicted, truth, scaling);
    return std::sqrt(scaled_error(predicted, truth, scaling).square().mean());
}

Eigen::VectorXd instantaneous_error(const TimeSeries& predicted, const TimeSeries& truth,
                                    const ScalingVector& scaling) {
    check_shapes(predicted, truth, scaling);
    return scaled_error(predicted, truth, scaling).square().rowwise().mean().sqrt().matrix();
}

double valid_time(const TimeSeries& predicted, const TimeSeries& truth,
                  const ScalingVector& scaling, double threshold, double lyapunov_time) {
    if (!(lyapunov_time > 0.0)) {
        throw InvalidArgument("valid time: Lyapunov time must be positive");
    }
    const Eigen::VectorXd err = instantaneous_error(predicted, truth, scaling);
    Eigen::Index valid = err.size();
    for (Eigen::Index j = 0; j < err.size(); ++j) {
        // NaN counts as a failure.
        if (!(err(j) <= threshold)) {
            valid = j;
            break;
        }
    }
    return static_cast<double>(valid) * truth.dt / lyapunov_time;
}

// ---------------------------------------------------------------------------
// Steady states

std::vector<Eigen::VectorXd> lorenz_uss(const Lorenz63Params& p) {
    const double a = std::sqrt(p.beta * (p.rho - 1.0));
    return {Eigen::Vector3d::Zero(), Eigen::Vector3d(a, a, p.rho - 1.0),
            Eigen::Vector3d(-a, -a, p.rho - 1.0)};
}

std::vector<Eigen::VectorXd> lorenz_uss() { return lorenz_uss(Lorenz63Params{}); }

double double_scroll_uss_voltage(const DoubleScrollParams& p) {
    const double linear = (p.r1 - p.r4 - p.r2) / p.r2;
    const double gain = p.alpha * (1.0 - p.r4 / p.r1);
    const double amplitude = 2.0 * p.r1 * p.ir;
    auto residual = [&](double v) { return v * linear + amplitude * std::sinh(gain * v); };

    // The residual is odd and negative just right of the origin when the
    // linear slope dominates; bracket the first sign change on (0, 5].
    constexpr double kUpper = 5.0;
    constexpr int kScan = 5000;
    double lo = 0.0;
    double hi = 0.0;
    bool bracketed = false;
    double a = 1e-9;
    double fa = residual(a);
    for (int j = 1; j <= kScan; ++j) {
        const double b = kUpper * j / kScan;
        const double fb = residual(b);
        if (fa < 0.0 && fb > 0.0) {
            lo = a;
            hi = b;
            bracketed = true;
            break;
        }
        a = b;
        fa = fb;
    }
    if (!bracketed) {
        throw NumericalFailure("double-scroll steady state: no sign change on (0, 5]");
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double fm = residual(mid);
        if (fm == 0.0) {
            return mid;
        }
        (fm < 0.0 ? lo : hi) = mid;
    }
    const double root = std::abs(residual(lo)) <= std::abs(residual(hi)) ? lo : hi;
    if (std::abs(residual(root)) >= 1e-12) {
        throw NumericalFailure("double-scroll steady state: residual did not reach 1e-12");
    }
    return root;
}

std::vector<Eigen::VectorXd> solve_double_scroll_uss(const DoubleScrollParams& p) {
    const double v1 = double_scroll_uss_voltage(p);
    const Eigen::Vector3d positive(v1, v1 * p.r4 / p.r1, v1 / p.r1);
    return {Eigen::Vector3d::Zero(), positive, Eigen::Vector3d(-positive)};
}

std::vector<Eigen::VectorXd> solve_double_scroll_uss() {
    return solve_double_scroll_uss(DoubleScrollParams{});
}

std::vector<std::optional<Eigen::VectorXd>> estimate_model_uss(
    const NgrcModel& model, const std::vector<Eigen::VectorXd>& guesses) {
    if (model.mode() != ModelMode::ForecastDelta) {
        throw ModeMismatch("model steady states: only defined for forecasting models");
    }
    const auto& spec = model.spec();
    const int d = spec.d();
    const int k = spec.k();
    const Eigen::MatrixXd& w = model.readout().weights;

    auto repeated = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd linear(static_cast<Eigen::Index>(d) * k);
        for (int tap = 0; tap < k; ++tap) {
            linear.segment(static_cast<Eigen::Index>(tap) * d, d) = x;
        }
        return linear;
    };
    auto residual = [&](const Eigen::VectorXd& x) { return model.apply(repeated(x)); };
    auto jacobian = [&](const Eigen::VectorXd& x) {
        const Eigen::MatrixXd dfeat = model.feature_map().jacobian(repeated(x));
        Eigen::MatrixXd folded = Eigen::MatrixXd::Zero(dfeat.rows(), d);
        for (int tap = 0; tap < k; ++tap) {
            folded += dfeat.middleCols(static_cast<Eigen::Index>(tap) * d, d);
        }
        return Eigen::MatrixXd(w * folded);
    };

    constexpr int kMaxIterations = 200;
    constexpr double kTolerance = 1e-10;
    std::vector<std::optional<Eigen::VectorXd>> out;
    out.reserve(guesses.size());
    for (const auto& guess : guesses) {
        if (guess.size() != d) {
            throw ShapeMismatch("model steady states: guess dimension mismatch");
        }
        Eigen::VectorXd x = guess;
        Eigen::VectorXd g = residual(x);
        std::optional<Eigen::VectorXd> found;
        for (int iter = 0; iter < kMaxIterations; ++iter) {
            if (g.squaredNorm() == 0.0) {
                found = x;
                break;
            }
            const Eigen::VectorXd step = jacobian(x).fullPivLu().solve(-g);
            if (!step.allFinite()) {
                break;
            }
            double damping = 1.0;
            Eigen::VectorXd candidate = x + step;
            Eigen::VectorXd g_candidate = residual(candidate);
            while (!(g_candidate.norm() < g.norm()) && damping > 1.0 / 1024.0) {
                damping *= 0.5;
                candidate = x + damping * step;
                g_candidate = residual(candidate);
            }
            const double update = damping * step.norm();
            x = candidate;
            g = g_candidate;
            if (update < kTolerance) {
                found = x;
                break;
            }
        }
        if (found && !found->allFinite()) {
            found.reset();
        }
        out.push_back(std::move(found));
    }
    return out;
}

UssReport summarize_uss(const std::vector<Eigen::VectorXd>& truth,
                        const std::vector<std::vector<std::optional<Eigen::VectorXd>>>& estimates,
                        const ScalingVector& scaling) {
    UssReport report;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        UssEntry entry;
        entry.truth = truth[j];
        entry.mean_estimate = Eigen::VectorXd::Zero(truth[j].size());
        entry.repeats = static_cast<int>(estimates.size());
        std::vector<double> distances;
        for (const auto& repeat : estimates) {
            if (repeat.size() != truth.size()) {
                throw ShapeMismatch("uss summary: repeat has the wrong number of estimates");
            }
            if (!repeat[j]) {
                continue;
            }
            entry.mean_estimate += *repeat[j];
            distances.push_back(scaling.distance(*repeat[j], truth[j]));
        }
        entry.converged = static_cast<int>(distances.size());
        if (!distances.empty()) {
            const double n = static_cast<double>(distances.size());
            entry.mean_estimate /= n;
            double sum = 0.0;
            for (double v : distances) {
                sum += v;
            }
            entry.mean_distance = sum / n;
            double var = 0.0;
            for (double v : distances) {
                var += (v - entry.mean_distance) * (v - entry.mean_distance);
            }
            entry.stddev_distance = std::sqrt(var / n);
            entry.max_distance = *std::max_element(distances.begin(), distances.end());
            std::sort(distances.begin(), distances.end());
            const std::size_t mid = distances.size() / 2;
            entry.median_distance = distances.size() % 2 == 1
                                        ? distances[mid]
                                        : 0.5 * (distances[mid - 1] + distances[mid]);
            entry.distances = distances;
        } else {
            entry.median_distance = std::numeric_limits<double>::quiet_NaN();
            entry.mean_distance = std::numeric_limits<double>::quiet_NaN();
            entry.stddev_distance = std::numeric_limits<double>::quiet_NaN();
            entry.max_distance = std::numeric_limits<double>::quiet_NaN();
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

std::string to_csv(const UssReport& report) {
    std::ostringstream out;
    out << "index,truth,mean_estimate,mean_distance,stddev_distance,median_distance,max_distance,"
           "converged,repeats\n";
    auto vec = [](const Eigen::VectorXd& v) {
        std::string s;
        for (Eigen::Index c = 0; c < v.size(); ++c) {
            s += (c ? ";" : "") + format_double(v(c));
        }
        return s;
    };
    for (std::size_t j = 0; j < report.entries.size(); ++j) {
        const auto& e = report.entries[j];
        out << j << ',' << vec(e.truth) << ',' << vec(e.mean_estimate) << ','
            << format_double(e.mean_distance) << ',' << format_double(e.stddev_distance) << ','
            << format_double(e.median_distance) << ',' << format_double(e.max_distance) << ',' << e.converged << ',' << e.repeats << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Return maps

std::pair<double, double> refine_maximum(const std::array<double, 5>& y) {
    // Quartic p(u) = a0 + a1 u + ... + a4 u^4 through u = -2..2.
    const double a0 = y[2];
    const double a1 = (y[0] - 8.0 * y[1] + 8.0 * y[3] - y[4]) / 12.0;
    const double a2 = (-y[0] + 16.0 * y[1] - 30.0 * y[2] + 16.0 * y[3] - y[4]) / 24.0;
    const double a3 = (-y[0] + 2.0 * y[1] - 2.0 * y[3] + y[4]) / 12.0;
    const double a4 = (y[0] - 4.0 * y[1] + 6.0 * y[2] - 4.0 * y[3] + y[4]) / 24.0;
    auto p = [&](double u) { return a0 + u * (a1 + u * (a2 + u * (a3 + u * a4))); };
    auto dp = [&](double u) { return a1 + u * (2.0 * a2 + u * (3.0 * a3 + u * 4.0 * a4)); };

    double best_u = 0.0;
    double best = p(0.0);
    auto consider = [&](double u) {
        const double v = p(u);
        if (v > best) {
            best = v;
            best_u = u;
        }
    };
    consider(-1.0);
    consider(1.0);
    // The cubic derivative has at most three roots; a fine symmetric scan
    // isolates them for bisection.
    constexpr int kCells = 64;
    for (int c = 0; c < kCells; ++c) {
        double lo = -1.0 + 2.0 * c / kCells;
        double hi = -1.0 + 2.0 * (c + 1) / kCells;
        double flo = dp(lo);
        const double fhi = dp(hi);
        if (flo == 0.0) {
            consider(lo);
            continue;
        }
        if ((flo < 0.0) == (fhi < 0.0)) {
            continue;
        }
        for (int iter = 0; iter < 100; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) {
                break;
            }
            const double fm = dp(mid);
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        consider(0.5 * (lo + hi));
    }
    return {best_u, best};
}

ReturnMap extract_return_map(const TimeSeries& series, int component, double window) {
    if (component < 0 || component >= series.components()) {
        throw InvalidArgument("return map: component out of range");
    }
    if (!(window > 0.0)) {
        throw InvalidArgument("return map: window must be positive");
    }
    Eigen::Index n = series.samples();
    const auto within = static_cast<Eigen::Index>(std::floor(window / series.dt + 1e-9)) + 1;
    n = std::min(n, within);
    const auto col = series.values.col(component);

    ReturnMap map;
    for (Eigen::Index i = 2; i + 2 < n; ++i) {
        if (col(i) > col(i - 1) && col(i) > col(i + 1)) {
            const std::array<double, 5> stencil{col(i - 2), col(i - 1), col(i), col(i + 1),
                                                col(i + 2)};
            const auto [offset, value] = refine_maximum(stencil);
            map.maxima.push_back(value);
            map.times.push_back(series.time(i) + offset * series.dt);
        }
    }
    if (map.maxima.size() < 2) {
        throw InsufficientData("return map: fewer than two local maxima in the window");
    }
    for (std::size_t j = 0; j + 1 < map.maxima.size(); ++j) {
        map.points.emplace_back(map.maxima[j], map.maxima[j + 1]);
    }
    return map;
}

double return_map_deviation(const ReturnMap& predicted, const ReturnMap& truth) {
    if (predicted.points.empty() || truth.points.empty()) {
        throw InsufficientData("return map deviation: empty map");
    }
    double total = 0.0;
    for (const auto& [px, py] : predicted.points) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [tx, ty] : truth.points) {
            best = std::min(best, std::hypot(px - tx, py - ty));
        }
        total += best;
    }
    return total / static_cast<double>(predicted.points.size());
}

std::string to_csv(const ReturnMap& map) {
    std::ostringstream out;
    out << "m_i,m_next\n";
    for (const auto& [a, b] : map.points) {
        out << format_double(a) << ',' << format_double(b) << '\n';
    }
    return out.str();
}

}  // namespace ngrc
