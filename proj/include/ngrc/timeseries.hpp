#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace ngrc {

/// Uniformly sampled multivariate trajectory. Row m of `values` is the
/// state at time `t0 + m * dt`.
struct TimeSeries {
    double dt = 1.0;
    double t0 = 0.0;
    Eigen::MatrixXd values;  // samples x components

    TimeSeries() = default;
    TimeSeries(double dt_, double t0_, Eigen::MatrixXd values_);

    [[nodiscard]] Eigen::Index samples() const noexcept { return values.rows(); }
    [[nodiscard]] Eigen::Index components() const noexcept { return values.cols(); }
    [[nodiscard]] double time(Eigen::Index m) const noexcept {
        return t0 + static_cast<double>(m) * dt;
    }

    /// Contiguous sample range [first, first + count), times preserved.
    [[nodiscard]] TimeSeries slice(Eigen::Index first, Eigen::Index count) const;

    /// Subset of components, in the given order.
    [[nodiscard]] TimeSeries select(const std::vector<int>& components) const;

    [[nodiscard]] Eigen::VectorXd mean() const;
    [[nodiscard]] Eigen::VectorXd stddev() const;  // population standard deviation
};

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);
double parse_double(const std::string& text);

/// Delimited text: header `t,<names...>`, then one row per sample with the
/// time first. Names default to x0, x1, ...
void write_csv(const std::filesystem::path& path, const TimeSeries& series,
               const std::vector<std::string>& names = {});
std::string to_csv(const TimeSeries& series, const std::vector<std::string>& names = {});

/// Reads what `write_csv` writes. dt is taken from the first two time stamps.
TimeSeries read_csv(const std::filesystem::path& path);
TimeSeries from_csv(const std::string& text);

}  // namespace ngrc
