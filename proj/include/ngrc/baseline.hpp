#pragma once

#include "ngrc/timeseries.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace ngrc::baseline {

enum class Activation { Tanh, Linear };

struct ReservoirParams {
    int nodes = 100;               // N
    double gamma = 1.0;            // decay rate, 0 <= gamma <= 1
    double spectral_radius = 0.9;  // target largest |eigenvalue| of A
    double density = 0.05;         // sigma_r, fraction of nonzero entries in A
    double input_scale = 1.0;      // W entries drawn from [-input_scale, input_scale]
    double bias = 0.0;             // b, shared by every node
    Activation activation = Activation::Tanh;
    std::uint64_t seed = 0;
};

/// Traditional reservoir r_{i+1} = (1 - gamma) r_i + gamma f(A r_i + W X_i + b).
/// Immutable after construction.
class Reservoir {
public:
    Reservoir(ReservoirParams params, Eigen::MatrixXd adjacency, Eigen::MatrixXd input_weights);

    [[nodiscard]] const ReservoirParams& params() const noexcept { return params_; }
    [[nodiscard]] const Eigen::MatrixXd& adjacency() const noexcept { return adjacency_; }
    [[nodiscard]] const Eigen::MatrixXd& input_weights() const noexcept { return input_; }

    /// One update: the state after consuming input `x` from state `r`.
    [[nodiscard]] Eigen::VectorXd step(const Eigen::VectorXd& r, const Eigen::VectorXd& x) const;

    /// States after each sample, N x n_samples, starting from r_0 = 0.
    /// Column i is r_{i+1}, the state after consuming X_i.
    [[nodiscard]] Eigen::MatrixXd run(const TimeSeries& series) const;

private:
    ReservoirParams params_;
    Eigen::MatrixXd adjacency_;  // N x N
    Eigen::MatrixXd input_;      // N x d
};

/// Random adjacency with ceil(density * N^2) nonzeros at seeded positions,
/// values in [-1, 1], rescaled to the requested spectral radius. Input
/// weights are dense, uniform in [-input_scale, input_scale].
Reservoir build_reservoir(const ReservoirParams& params, int input_dim);

/// Largest eigenvalue magnitude.
double spectral_radius(const Eigen::MatrixXd& matrix);

/// [r; r .* r] for every column.
Eigen::MatrixXd quadratic_readout_features(const Eigen::MatrixXd& states);

/// Step counts and sizes that dominate training cost.
struct CostParams {
    double warmup_steps = 0;   // M_warmup
    double train_steps = 0;    // M_train
    double total_features = 0; // N_total
    double nonlinear = 0;      // N_nonlinear, multiplications to build features
    double nodes = 0;          // N
    double density = 0;        // sigma_r
};

/// sigma_r (M_warmup + M_train) N^2 + M_train N_total^2.
double rc_cost(const CostParams& rc);
/// M_train N_total^2 + M_train N_nonlinear.
double ngrc_cost(const CostParams& ng);
/// rc_cost / ngrc_cost. Throws InvalidArgument if the NG-RC cost is zero.
double estimate_cost(const CostParams& ng, const CostParams& rc);

}  // namespace ngrc::baseline
