#include "ngrc/regression.hpp"

#include "ngrc/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ngrc {

ReadoutMatrix ridge_fit(const TrainingBlock& block, double alpha) {
    const auto& features = block.features;
    const auto& targets = block.targets;
    if (features.cols() != targets.cols()) {
        throw ShapeMismatch("ridge fit: " + std::to_string(features.cols()) +
                            " feature columns vs " + std::to_string(targets.cols()) +
                            " target columns");
    }
    if (features.cols() < 1 || features.rows() < 1 || targets.rows() < 1) {
        throw ShapeMismatch("ridge fit: empty training block");
    }
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw InvalidArgument("ridge fit: alpha must be a finite nonnegative number");
    }

    const Eigen::Index dim = features.rows();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(features);
    gram.diagonal().array() += alpha;
    const Eigen::MatrixXd rhs = features * targets.transpose();

    const Eigen::LDLT<Eigen::MatrixXd, Eigen::Lower> ldlt(gram);
    if (ldlt.info() != Eigen::Success) {
        throw SingularSystem("ridge fit: factorization failed");
    }
    if (alpha == 0.0) {
        const double tolerance =
            100.0 * static_cast<double>(dim) * std::numeric_limits<double>::epsilon();
        // rcond() alone misses exactly zero pivots, which LDLT solves around.
        const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
        if (!ldlt.isPositive() || pivots.minCoeff() <= tolerance * pivots.maxCoeff() ||
            ldlt.rcond() < tolerance) {
            throw SingularSystem("ridge fit: O O^T is rank deficient and alpha is zero");
        }
    }

    ReadoutMatrix readout;
    readout.weights = ldlt.solve(rhs).transpose();
    readout.alpha = alpha;
    if (!readout.weights.allFinite()) {
        throw NumericalFailure("ridge fit: solution is not finite");
    }
    return readout;
}

Eigen::VectorXd readout_apply(const ReadoutMatrix& readout,
                              const Eigen::Ref<const Eigen::VectorXd>& feature_vec) {
    if (feature_vec.size() != readout.feature_dim()) {
        throw ShapeMismatch("readout apply: feature vector has length " +
                            std::to_string(feature_vec.size()) + ", readout expects " +
                            std::to_string(readout.feature_dim()));
    }
    return readout.weights * feature_vec;
}

}  // namespace ngrc
