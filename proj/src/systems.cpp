#include "ngrc/systems.hpp"

#include "ngrc/error.hpp"
#include "ngrc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ngrc {

Eigen::Vector3d lorenz63_rhs(const Eigen::Vector3d& state, const Lorenz63Params& p) {
    const double x = state(0);
    const double y = state(1);
    const double z = state(2);
    return {p.sigma * (y - x), x * (p.rho - z) - y, x * y - p.beta * z};
}

Eigen::Vector3d double_scroll_rhs(const Eigen::Vector3d& state, const DoubleScrollParams& p) {
    const double v1 = state(0);
    const double v2 = state(1);
    const double current = state(2);
    const double dv = v1 - v2;
    const double diode = 2.0 * p.ir * std::sinh(p.alpha * dv);
    return {v1 / p.r1 - dv / p.r2 - diode, dv / p.r2 + diode - current, v2 - p.r4 * current};
}

SystemDef make_system(std::string name, int dim, VectorField rhs, double lyapunov_time) {
    if (dim < 1) {
        throw InvalidArgument("system: dimension must be positive");
    }
    if (!(lyapunov_time > 0.0)) {
        throw InvalidArgument("system: Lyapunov time must be positive");
    }
    SystemDef system;
    system.name = std::move(name);
    system.dim = dim;
    system.lyapunov_time = lyapunov_time;
    system.rhs = std::move(rhs);
    return system;
}

SystemDef lorenz63() {
    const Lorenz63Params p;
    SystemDef system = make_system(
        "lorenz63", 3,
        [p](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return lorenz63_rhs(Eigen::Vector3d(x), p);
        },
        1.1);
    system.params = {{"sigma", p.sigma}, {"rho", p.rho}, {"beta", p.beta}};
    system.steady_states = lorenz_uss();
    return system;
}

SystemDef double_scroll() {
    const DoubleScrollParams p;
    SystemDef system = make_system(
        "double-scroll", 3,
        [p](const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return double_scroll_rhs(Eigen::Vector3d(x), p);
        },
        7.81);
    system.params = {{"R1", p.r1}, {"R2", p.r2}, {"R4", p.r4}, {"alpha", p.alpha}, {"Ir", p.ir}};
    system.steady_states = solve_double_scroll_uss();
    return system;
}

Eigen::Index grid_samples(const IntegrationConfig& config) {
    return static_cast<Eigen::Index>(std::floor(config.t_span / config.dt + 1e-9)) + 1;
}

namespace {

void check_config(const SystemDef& system, const IntegrationConfig& config) {
    if (!(config.dt > 0.0) || !std::isfinite(config.dt)) {
        throw InvalidArgument("integrate: dt must be positive");
    }
    if (!(config.t_span >= 0.0) || !std::isfinite(config.t_span)) {
        throw InvalidArgument("integrate: t_span must be nonnegative");
    }
    if (!(config.rtol > 0.0) || !(config.atol > 0.0)) {
        throw InvalidArgument("integrate: tolerances must be positive");
    }
    if (config.initial_state.size() != system.dim) {
        throw InvalidArgument("integrate: initial state has " +
                              std::to_string(config.initial_state.size()) +
                              " components, system '" + system.name + "' has " +
                              std::to_string(system.dim));
    }
    if (!system.rhs) {
        throw InvalidArgument("integrate: system has no vector field");
    }
}

// Bogacki-Shampine 3(2) pair with FSAL. Step-size control mirrors SciPy's
// RK23: same starting-step heuristic, safety 0.9, factors in [0.2, 10], no
// growth on the step right after a rejection.
struct Rk23Step {
    Eigen::VectorXd k2;
    Eigen::VectorXd k3;
    Eigen::VectorXd y1;
    Eigen::VectorXd f1;
    double error_norm = 0.0;
};

double rms(const Eigen::ArrayXd& v) { return std::sqrt(v.square().mean()); }

Rk23Step rk23_attempt(const VectorField& rhs, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0,
                      double h, double rtol, double atol) {
    Rk23Step step;
    step.k2 = rhs(y0 + h * (0.5 * f0));
    step.k3 = rhs(y0 + h * (0.75 * step.k2));
    step.y1 = y0 + h * (2.0 / 9.0 * f0 + 1.0 / 3.0 * step.k2 + 4.0 / 9.0 * step.k3);
    step.f1 = rhs(step.y1);
    const Eigen::VectorXd err =
        h * (5.0 / 72.0 * f0 - 1.0 / 12.0 * step.k2 - 1.0 / 9.0 * step.k3 + 1.0 / 8.0 * step.f1);
    const Eigen::ArrayXd scale = atol + y0.array().abs().max(step.y1.array().abs()) * rtol;
    step.error_norm = rms(err.array() / scale);
    return step;
}

// Cubic continuous extension of the accepted step, theta in [0, 1].
Eigen::VectorXd dense(const Eigen::VectorXd& y0, const Eigen::VectorXd& f0, const Rk23Step& s,
                      double h, double theta) {
    const Eigen::VectorXd q1 =
        -4.0 / 3.0 * f0 + s.k2 + 4.0 / 3.0 * s.k3 - s.f1;
    const Eigen::VectorXd q2 =
        5.0 / 9.0 * f0 - 2.0 / 3.0 * s.k2 - 8.0 / 9.0 * s.k3 + s.f1;
    const double t2 = theta * theta;
    return y0 + h * (theta * f0 + t2 * q1 + t2 * theta * q2);
}

double initial_step(const VectorField& rhs, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0,
                    double span, double rtol, double atol) {
    const Eigen::ArrayXd scale = atol + y0.array().abs() * rtol;
    const double d0 = rms(y0.array() / scale);
    const double d1 = rms(f0.array() / scale);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    const Eigen::VectorXd f1 = rhs(y0 + h0 * f0);
    const double d2 = rms((f1 - f0).array() / scale) / h0;
    const double h1 = (d1 <= 1e-15 && d2 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                   : std::cbrt(0.01 / std::max(d1, d2));
    return std::min({100.0 * h0, h1, span});
}

// Advances from t0 to t_end, calling `emit(t_a, y_a, f_a, step, h)` after
// every accepted step.
template <typename Emit>
void adaptive_run(const SystemDef& system, Eigen::VectorXd y, double t0, double t_end,
                  double rtol, double atol, Emit&& emit) {
    constexpr double kSafety = 0.9;
    constexpr double kMinFactor = 0.2;
    constexpr double kMaxFactor = 10.0;
    Eigen::VectorXd f = system.rhs(y);
    double t = t0;
    double h_abs = initial_step(system.rhs, y, f, t_end - t0, rtol, atol);
    while (t < t_end) {
        const double min_step = 10.0 * std::abs(std::nextafter(t, INFINITY) - t);
        h_abs = std::max(h_abs, min_step);
        bool rejected = false;
        while (true) {
            if (h_abs < min_step) {
                throw IntegrationFailure("integrate: step size underflow at t = " +
                                         format_double(t) + " for system '" + system.name + "'");
            }
            const double t_new = std::min(t + h_abs, t_end);
            const double h = t_new - t;
            const Rk23Step step = rk23_attempt(system.rhs, y, f, h, rtol, atol);
            if (!step.y1.allFinite() || !std::isfinite(step.error_norm)) {
                h_abs = h * kMinFactor;
                rejected = true;
                continue;
            }
            if (step.error_norm < 1.0) {
                double factor = step.error_norm == 0.0
                                    ? kMaxFactor
                                    : std::min(kMaxFactor,
                                               kSafety * std::pow(step.error_norm, -1.0 / 3.0));
                if (rejected) {
                    factor = std::min(1.0, factor);
                }
                emit(t, y, f, step, h, t_new);
                h_abs = h * factor;
                t = t_new;
                y = step.y1;
                f = step.f1;
                break;
            }
            h_abs = h * std::max(kMinFactor, kSafety * std::pow(step.error_norm, -1.0 / 3.0));
            rejected = true;
        }
    }
}

}  // namespace

TimeSeries integrate(const SystemDef& system, const IntegrationConfig& config) {
    check_config(system, config);
    const Eigen::Index n = grid_samples(config);
    Eigen::MatrixXd out(n, system.dim);
    out.row(0) = config.initial_state.transpose();
    const double t_end = config.t_start + static_cast<double>(n - 1) * config.dt;
    Eigen::Index next = 1;
    adaptive_run(system, config.initial_state, config.t_start, t_end, config.rtol, config.atol,
                 [&](double ta, const Eigen::VectorXd& ya, const Eigen::VectorXd& fa,
                     const Rk23Step& step, double h, double tb) {
                     while (next < n) {
                         const double tm = config.t_start + static_cast<double>(next) * config.dt;
                         if (tm > tb) {
                             break;
                         }
                         const double theta = std::clamp((tm - ta) / h, 0.0, 1.0);
                         out.row(next) = dense(ya, fa, step, h, theta).transpose();
                         ++next;
                     }
                 });
    return TimeSeries(config.dt, config.t_start, std::move(out));
}

Eigen::VectorXd settle(const SystemDef& system, const Eigen::VectorXd& state, double duration,
                       double rtol, double atol) {
    if (state.size() != system.dim) {
        throw InvalidArgument("settle: state dimension mismatch");
    }
    if (duration <= 0.0) {
        return state;
    }
    Eigen::VectorXd result = state;
    adaptive_run(system, state, 0.0, duration, rtol, atol,
                 [&](double, const Eigen::VectorXd&, const Eigen::VectorXd&, const Rk23Step& step,
                     double, double) { result = step.y1; });
    return result;
}

namespace {

TimeSeries fixed_rk2(const SystemDef& system, const IntegrationConfig& config, bool noisy) {
    check_config(system, config);
    if (config.substeps < 1) {
        throw InvalidArgument("integrate: substeps must be >= 1");
    }
    if (!(config.noise_rms >= 0.0)) {
        throw InvalidArgument("integrate: noise_rms must be nonnegative");
    }
    const Eigen::Index n = grid_samples(config);
    const double h = config.dt / static_cast<double>(config.substeps);
    const double forcing_sd = config.noise_rms / std::sqrt(h);

    std::mt19937_64 rng(config.seed.value_or(0));
    std::normal_distribution<double> normal(0.0, 1.0);

    Eigen::MatrixXd out(n, system.dim);
    Eigen::VectorXd y = config.initial_state;
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(system.dim);
    out.row(0) = y.transpose();
    for (Eigen::Index m = 1; m < n; ++m) {
        for (int sub = 0; sub < config.substeps; ++sub) {
            if (noisy) {
                for (int c = 0; c < system.dim; ++c) {
                    xi(c) = forcing_sd * normal(rng);
                }
            }
            const Eigen::VectorXd k1 = system.rhs(y) + xi;
            const Eigen::VectorXd k2 = system.rhs(y + 0.5 * h * k1) + xi;
            y += h * k2;
        }
        if (!y.allFinite()) {
            throw IntegrationFailure("integrate: state diverged at t = " +
                                     format_double(config.t_start + static_cast<double>(m) * config.dt));
        }
        out.row(m) = y.transpose();
    }
    return TimeSeries(config.dt, config.t_start, std::move(out));
}

}  // namespace

TimeSeries integrate_noisy(const SystemDef& system, const IntegrationConfig& config) {
    if (!config.seed) {
        throw InvalidArgument("integrate_noisy: a seed is required");
    }
    return fixed_rk2(system, config, true);
}

TimeSeries integrate_fixed_rk2(const SystemDef& system, const IntegrationConfig& config) {
    return fixed_rk2(system, config, false);
}

}  // namespace ngrc
