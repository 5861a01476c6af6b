#pragma once

#include "ngrc/systems.hpp"
#include "ngrc/timeseries.hpp"

#include <Eigen/Dense>

#include <random>

namespace testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                                     double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            m(r, c) = u(rng);
        }
    }
    return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
    return random_matrix(n, 1, rng);
}

// On-attractor Lorenz63 samples at the experiment tolerances.
inline ngrc::TimeSeries lorenz_data(Eigen::Index samples, double dt = 0.025) {
    const ngrc::SystemDef system = ngrc::lorenz63();
    ngrc::IntegrationConfig ic;
    ic.dt = dt;
    ic.t_span = static_cast<double>(samples - 1) * dt;
    ic.rtol = 1e-3;
    ic.atol = 1e-6;
    ic.initial_state = ngrc::settle(system, Eigen::Vector3d(1, 1, 1), 20.0, ic.rtol, ic.atol);
    return ngrc::integrate(system, ic);
}

inline ngrc::TimeSeries double_scroll_data(Eigen::Index samples, double dt = 0.25) {
    const ngrc::SystemDef system = ngrc::double_scroll();
    ngrc::IntegrationConfig ic;
    ic.dt = dt;
    ic.t_span = static_cast<double>(samples - 1) * dt;
    ic.rtol = 1e-3;
    ic.atol = 1e-6;
    ic.initial_state =
        ngrc::settle(system, Eigen::Vector3d(0.1, 0.1, 0.1), 20.0, ic.rtol, ic.atol);
    return ngrc::integrate(system, ic);
}

}  // namespace testing
