#include "helpers.hpp"

#include "ngrc/error.hpp"
#include "ngrc/regression.hpp"

#include <doctest.h>

using namespace ngrc;

namespace {

// W = Y O^T (O O^T + alpha I)^{-1}, with an explicit inverse.
Eigen::MatrixXd dense_inverse_oracle(const TrainingBlock& b, double alpha) {
    const Eigen::Index n = b.features.rows();
    const Eigen::MatrixXd gram =
        b.features * b.features.transpose() + alpha * Eigen::MatrixXd::Identity(n, n);
    return b.targets * b.features.transpose() * gram.inverse();
}

}  // namespace

TEST_CASE("exact linear relation") {
    TrainingBlock b{Eigen::RowVector3d(1, 2, 3), Eigen::RowVector3d(2, 4, 6)};
    const ReadoutMatrix r = ridge_fit(b, 0.0);
    CHECK(r.weights(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(r.alpha == 0.0);
}

TEST_CASE("shrinkage limit") {
    TrainingBlock b{Eigen::RowVector3d(1, 2, 3), Eigen::RowVector3d(2, 4, 6)};
    const double w = ridge_fit(b, 1e6).weights(0, 0);
    CHECK(std::abs(w) < 1e-4);
    CHECK(w == doctest::Approx(28.0 / 1e6).epsilon(0.01));
}

TEST_CASE("ridge_fit matches the dense-inverse formula") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dim(1, 60);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int f = dim(rng);
        const int out = 1 + trial % 3;
        const int n = f + 20 + trial;
        TrainingBlock b{testing::random_matrix(f, n, rng), testing::random_matrix(out, n, rng)};
        const double alpha = trial % 2 ? 1e-3 : 1e-1;
        const Eigen::MatrixXd w = ridge_fit(b, alpha).weights;
        worst = std::max(worst, (w - dense_inverse_oracle(b, alpha)).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-10);

    std::mt19937_64 small(7);
    TrainingBlock b{testing::random_matrix(5, 40, small), testing::random_matrix(2, 40, small)};
    CHECK((ridge_fit(b, 1e-3).weights - dense_inverse_oracle(b, 1e-3)).cwiseAbs().maxCoeff() <
          1e-10);
}

TEST_CASE("normal-equation residual") {
    std::mt19937_64 rng(8);
    TrainingBlock b{testing::random_matrix(28, 400, rng, -20, 20),
                    testing::random_matrix(3, 400, rng)};
    const double alpha = 2.5e-6;
    const Eigen::MatrixXd w = ridge_fit(b, alpha).weights;
    const Eigen::MatrixXd rhs = b.targets * b.features.transpose();
    const Eigen::MatrixXd lhs =
        w * (b.features * b.features.transpose() + alpha * Eigen::MatrixXd::Identity(28, 28));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8 * rhs.cwiseAbs().maxCoeff());
}

TEST_CASE("weight norm is non-increasing in alpha") {
    std::mt19937_64 rng(12);
    TrainingBlock b{testing::random_matrix(10, 30, rng), testing::random_matrix(2, 30, rng)};
    double previous = std::numeric_limits<double>::infinity();
    for (double alpha : {0.0, 1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4}) {
        const double norm = ridge_fit(b, alpha).weights.norm();
        CHECK(norm <= previous * (1 + 1e-12));
        previous = norm;
    }
}

TEST_CASE("interpolation with fewer samples than features") {
    std::mt19937_64 rng(13);
    TrainingBlock b{testing::random_matrix(12, 8, rng), testing::random_matrix(2, 8, rng)};
    const Eigen::MatrixXd w = ridge_fit(b, 1e-12).weights;
    CHECK((b.targets - w * b.features).cwiseAbs().maxCoeff() <
          1e-6 * b.targets.cwiseAbs().maxCoeff());
}

TEST_CASE("ridge_fit errors") {
    TrainingBlock ok{Eigen::MatrixXd::Ones(2, 5), Eigen::MatrixXd::Ones(1, 5)};
    CHECK_THROWS_AS(ridge_fit(ok, -1.0), InvalidArgument);
    CHECK_THROWS_AS(ridge_fit(ok, 0.0), SingularSystem);
    CHECK_NOTHROW(ridge_fit(ok, 1e-3));
    TrainingBlock mismatched{Eigen::MatrixXd::Ones(2, 5), Eigen::MatrixXd::Ones(1, 4)};
    CHECK_THROWS_AS(ridge_fit(mismatched, 1.0), ShapeMismatch);
    TrainingBlock empty{Eigen::MatrixXd(2, 0), Eigen::MatrixXd(1, 0)};
    CHECK_THROWS(ridge_fit(empty, 1.0));
}

TEST_CASE("readout_apply") {
    std::mt19937_64 rng(14);
    const Eigen::VectorXd v = testing::random_vector(4, rng);
    CHECK(readout_apply(ReadoutMatrix{Eigen::MatrixXd::Identity(4, 4), 0.0}, v) == v);
    CHECK(readout_apply(ReadoutMatrix{Eigen::MatrixXd::Zero(2, 4), 0.0}, v) ==
          Eigen::VectorXd::Zero(2));

    const ReadoutMatrix w{testing::random_matrix(3, 28, rng), 0.0};
    const Eigen::VectorXd f = testing::random_vector(28, rng);
    const Eigen::VectorXd got = readout_apply(w, f);
    for (int r = 0; r < 3; ++r) {
        double sum = 0.0;
        for (int c = 0; c < 28; ++c) {
            sum += w.weights(r, c) * f(c);
        }
        CHECK(std::abs(got(r) - sum) < 1e-12);
    }
    CHECK_THROWS_AS(readout_apply(w, testing::random_vector(27, rng)), ShapeMismatch);
}
