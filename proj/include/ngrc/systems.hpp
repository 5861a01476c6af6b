#pragma once

#include "ngrc/timeseries.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ngrc {

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// A named autonomous ODE x' = rhs(x).
struct SystemDef {
    std::string name;
    int dim = 0;
    std::map<std::string, double> params;
    double lyapunov_time = 1.0;
    VectorField rhs;
    std::vector<Eigen::VectorXd> steady_states;
};

struct Lorenz63Params {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
};

/// Dimensionless double-scroll circuit.
struct DoubleScrollParams {
    double r1 = 1.2;
    double r2 = 3.44;
    double r4 = 0.193;
    double alpha = 11.6;
    double ir = 2.25e-5;
};

Eigen::Vector3d lorenz63_rhs(const Eigen::Vector3d& state, const Lorenz63Params& p = {});
Eigen::Vector3d double_scroll_rhs(const Eigen::Vector3d& state, const DoubleScrollParams& p = {});

/// Lorenz63 (Lyapunov time 1.1) with its three analytic steady states.
SystemDef lorenz63();
/// Double-scroll circuit (Lyapunov time 7.81) with its three steady states.
SystemDef double_scroll();

SystemDef make_system(std::string name, int dim, VectorField rhs, double lyapunov_time = 1.0);

struct IntegrationConfig {
    double dt = 0.025;
    double t_start = 0.0;
    double t_span = 10.0;  // samples cover [t_start, t_start + t_span]
    Eigen::VectorXd initial_state;
    double rtol = 1e-8;
    double atol = 1e-10;
    std::optional<std::uint64_t> seed;
    double noise_rms = 0.0;
    int substeps = 20;  // stochastic scheme: substep h = dt / substeps
};

/// Number of grid samples: floor(t_span / dt) + 1 (with a small tolerance
/// so that t_span = n * dt yields n + 1 samples).
Eigen::Index grid_samples(const IntegrationConfig& config);

/// Adaptive Bogacki-Shampine 3(2) integration with error control at
/// rtol/atol; step selection follows SciPy's RK23. Output is interpolated
/// onto the grid t_start + m * dt with the pair's cubic dense output.
/// Throws IntegrationFailure on step-size underflow.
TimeSeries integrate(const SystemDef& system, const IntegrationConfig& config);

/// Fixed-substep stochastic integration. Each substep draws an independent
/// Gaussian forcing with per-component standard deviation noise_rms/sqrt(h),
/// holds it across the substep and advances one explicit-midpoint (RK2)
/// step. Throws InvalidArgument if no seed is set.
TimeSeries integrate_noisy(const SystemDef& system, const IntegrationConfig& config);

/// The stochastic scheme with the forcing switched off.
TimeSeries integrate_fixed_rk2(const SystemDef& system, const IntegrationConfig& config);

/// State after integrating `duration` time units from `state`; used to
/// discard transients.
Eigen::VectorXd settle(const SystemDef& system, const Eigen::VectorXd& state, double duration,
                       double rtol = 1e-8, double atol = 1e-10);

}  // namespace ngrc
