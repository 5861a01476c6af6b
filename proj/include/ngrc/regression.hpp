#pragma once

#include <Eigen/Dense>

namespace ngrc {

/// Trained linear readout W_out (output_dim x feature_dim) and the ridge
/// parameter it was fit with.
struct ReadoutMatrix {
    Eigen::MatrixXd weights;
    double alpha = 0.0;

    [[nodiscard]] Eigen::Index output_dim() const noexcept { return weights.rows(); }
    [[nodiscard]] Eigen::Index feature_dim() const noexcept { return weights.cols(); }
};

/// Columns of `features` and `targets` are paired training samples.
struct TrainingBlock {
    Eigen::MatrixXd features;  // feature_dim x n_samples
    Eigen::MatrixXd targets;   // output_dim x n_samples
};

/// Minimizes |Y - W O|^2 + alpha |W|^2 by factoring O O^T + alpha I
/// (symmetric, LDL^T) and solving against O Y^T. Never forms an inverse.
///
/// Throws ShapeMismatch for inconsistent blocks, InvalidArgument for a
/// negative alpha, SingularSystem when alpha == 0 and O O^T is rank
/// deficient, NumericalFailure if the solution is not finite.
ReadoutMatrix ridge_fit(const TrainingBlock& block, double alpha);

/// W_out * feature_vec.
Eigen::VectorXd readout_apply(const ReadoutMatrix& readout,
                              const Eigen::Ref<const Eigen::VectorXd>& feature_vec);

}  // namespace ngrc
