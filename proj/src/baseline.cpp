#include "ngrc/baseline.hpp"

#include "ngrc/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace ngrc::baseline {

Reservoir::Reservoir(ReservoirParams params, Eigen::MatrixXd adjacency,
                     Eigen::MatrixXd input_weights)
    : params_(params), adjacency_(std::move(adjacency)), input_(std::move(input_weights)) {
    if (params_.nodes < 1) {
        throw InvalidArgument("reservoir: N must be >= 1");
    }
    if (!(params_.gamma >= 0.0 && params_.gamma <= 1.0)) {
        throw InvalidArgument("reservoir: gamma must lie in [0, 1]");
    }
    if (adjacency_.rows() != params_.nodes || adjacency_.cols() != params_.nodes ||
        input_.rows() != params_.nodes) {
        throw ShapeMismatch("reservoir: matrix shapes do not match N");
    }
}

Eigen::VectorXd Reservoir::step(const Eigen::VectorXd& r, const Eigen::VectorXd& x) const {
    if (r.size() != params_.nodes || x.size() != input_.cols()) {
        throw ShapeMismatch("reservoir: state or input has the wrong size");
    }
    Eigen::VectorXd drive = adjacency_ * r + input_ * x;
    drive.array() += params_.bias;
    if (params_.activation == Activation::Tanh) {
        drive = drive.array().tanh();
    }
    return (1.0 - params_.gamma) * r + params_.gamma * drive;
}

Eigen::MatrixXd Reservoir::run(const TimeSeries& series) const {
    if (series.components() != input_.cols()) {
        throw ShapeMismatch("reservoir: series has " + std::to_string(series.components()) +
                            " components, input layer expects " + std::to_string(input_.cols()));
    }
    Eigen::VectorXd r = Eigen::VectorXd::Zero(params_.nodes);
    Eigen::MatrixXd states(params_.nodes, series.samples());
    for (Eigen::Index i = 0; i < series.samples(); ++i) {
        r = step(r, series.values.row(i).transpose());
        states.col(i) = r;
    }
    return states;
}

double spectral_radius(const Eigen::MatrixXd& matrix) {
    if (matrix.rows() != matrix.cols()) {
        throw ShapeMismatch("spectral radius: matrix is not square");
    }
    if (matrix.size() == 0) {
        return 0.0;
    }
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix, false);
    if (solver.info() != Eigen::Success) {
        throw NumericalFailure("spectral radius: eigenvalue solver failed");
    }
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Reservoir build_reservoir(const ReservoirParams& params, int input_dim) {
    if (params.nodes < 1) {
        throw InvalidArgument("reservoir: N must be >= 1");
    }
    if (!(params.density > 0.0 && params.density <= 1.0)) {
        throw InvalidArgument("reservoir: density must lie in (0, 1]");
    }
    if (input_dim < 1) {
        throw InvalidArgument("reservoir: input dimension must be >= 1");
    }
    const Eigen::Index n = params.nodes;
    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    const auto cells = static_cast<std::size_t>(n * n);
    const auto nonzeros = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(cells),
                         std::ceil(params.density * static_cast<double>(cells) - 1e-9)));
    std::vector<std::size_t> order(cells);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `nonzeros` entries are a uniform sample.
    for (std::size_t j = 0; j < nonzeros; ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, cells - 1);
        std::swap(order[j], order[pick(rng)]);
    }
    Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < nonzeros; ++j) {
        const auto cell = static_cast<Eigen::Index>(order[j]);
        double value = 0.0;
        while (value == 0.0) {
            value = unit(rng);
        }
        adjacency(cell / n, cell % n) = value;
    }
    const double radius = spectral_radius(adjacency);
    if (radius > 0.0) {
        adjacency *= params.spectral_radius / radius;
    }

    Eigen::MatrixXd input(n, input_dim);
    for (Eigen::Index c = 0; c < input.cols(); ++c) {
        for (Eigen::Index r = 0; r < n; ++r) {
            input(r, c) = params.input_scale * unit(rng);
        }
    }
    return Reservoir(params, std::move(adjacency), std::move(input));
}

Eigen::MatrixXd quadratic_readout_features(const Eigen::MatrixXd& states) {
    Eigen::MatrixXd out(2 * states.rows(), states.cols());
    out.topRows(states.rows()) = states;
    out.bottomRows(states.rows()) = states.array().square().matrix();
    return out;
}

double rc_cost(const CostParams& rc) {
    return rc.density * (rc.warmup_steps + rc.train_steps) * rc.nodes * rc.nodes +
           rc.train_steps * rc.total_features * rc.total_features;
}

double ngrc_cost(const CostParams& ng) {
    return ng.train_steps * ng.total_features * ng.total_features + ng.train_steps * ng.nonlinear;
}

double estimate_cost(const CostParams& ng, const CostParams& rc) {
    const double denominator = ngrc_cost(ng);
    if (!(denominator > 0.0)) {
        throw InvalidArgument("cost estimate: NG-RC cost is zero");
    }
    return rc_cost(rc) / denominator;
}

}  // namespace ngrc::baseline
