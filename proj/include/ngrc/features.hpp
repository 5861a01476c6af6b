#pragma once

#include "ngrc/timeseries.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace ngrc {

/// Declarative description of an NG-RC feature vector.
///
/// Canonical order of the produced vector:
///   [constant (if any); X_i, X_{i-s}, ..., X_{i-(k-1)s}; degree blocks
///    in ascending degree, monomials in lexicographic index order]
/// Each delayed sample contributes its d components in component order.
class FeatureSpec {
public:
    /// Throws InvalidArgument when d, k or s is zero or a degree is < 2.
    FeatureSpec(int d, int k, int s, std::vector<int> degrees, bool include_constant,
                double constant_value = 1.0);

    [[nodiscard]] int d() const noexcept { return d_; }
    [[nodiscard]] int k() const noexcept { return k_; }
    [[nodiscard]] int s() const noexcept { return s_; }
    [[nodiscard]] const std::vector<int>& degrees() const noexcept { return degrees_; }
    [[nodiscard]] bool include_constant() const noexcept { return include_constant_; }
    [[nodiscard]] double constant_value() const noexcept { return constant_value_; }

    [[nodiscard]] int linear_length() const noexcept { return d_ * k_; }

    /// Index of the first sample that has a full delay window: (k-1)*s.
    [[nodiscard]] int first_valid_index() const noexcept { return (k_ - 1) * s_; }
    /// Samples needed to form one feature vector: (k-1)*s + 1.
    [[nodiscard]] int warmup_samples() const noexcept { return first_valid_index() + 1; }

    /// True when every nonlinear degree is odd and there is no constant.
    [[nodiscard]] bool is_odd() const noexcept;

    friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;

private:
    int d_;
    int k_;
    int s_;
    std::vector<int> degrees_;
    bool include_constant_;
    double constant_value_;
};

/// Number of multisets of size p drawn from n items, C(n + p - 1, p).
std::size_t monomial_count(int n_vars, int p);

std::size_t nonlinear_length(const FeatureSpec& spec);
std::size_t feature_length(const FeatureSpec& spec);

/// Non-decreasing index tuples (a_1 <= ... <= a_p) over {0..n_vars-1} in
/// lexicographic order.
std::vector<std::vector<int>> monomial_exponent_table(int n_vars, int p);

/// k x d matrix, row 0 the current sample, row j the sample j*s steps back.
using DelayWindow = Eigen::MatrixXd;

/// Delay window ending at sample i. Throws WarmupError if i < (k-1)*s.
DelayWindow delay_window(const TimeSeries& series, const FeatureSpec& spec, Eigen::Index i);

/// [X_i; X_{i-s}; ...; X_{i-(k-1)s}].
Eigen::VectorXd linear_features(const TimeSeries& series, const FeatureSpec& spec,
                                Eigen::Index i);

Eigen::VectorXd total_features(const DelayWindow& window, const FeatureSpec& spec);

/// Precomputed monomial tables for repeated feature evaluation.
class FeatureMap {
public:
    explicit FeatureMap(FeatureSpec spec);

    [[nodiscard]] const FeatureSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] std::size_t length() const noexcept { return length_; }

    /// Full feature vector from a linear block of length d*k.
    void evaluate(const Eigen::Ref<const Eigen::VectorXd>& linear,
                  Eigen::Ref<Eigen::VectorXd> out) const;
    [[nodiscard]] Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& linear) const;

    /// d(features)/d(linear block), feature_length x (d*k).
    [[nodiscard]] Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& linear) const;

    /// Feature columns for samples first..last (inclusive) of `series`,
    /// feature_length x (last - first + 1).
    [[nodiscard]] Eigen::MatrixXd feature_block(const TimeSeries& series, Eigen::Index first,
                                                Eigen::Index last) const;

    /// Human-readable label of each feature, e.g. "c", "x0(t-1)", "x0(t)*x2(t)".
    [[nodiscard]] std::vector<std::string> labels(const std::vector<std::string>& names = {}) const;

private:
    FeatureSpec spec_;
    std::size_t length_;
    // One flattened table per degree: tables_[b] holds count*p indices.
    std::vector<std::vector<int>> tables_;
};

}  // namespace ngrc
