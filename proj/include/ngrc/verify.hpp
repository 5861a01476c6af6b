#pragma once

#include "ngrc/timeseries.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ngrc {

class NgrcModel;
struct Lorenz63Params;
struct DoubleScrollParams;

/// Per-component standard deviations used to map states into a space where
/// the reference attractor has unit variance. Entries are strictly positive.
class ScalingVector {
public:
    explicit ScalingVector(Eigen::VectorXd scale);
    static ScalingVector from_series(const TimeSeries& reference);

    [[nodiscard]] const Eigen::VectorXd& values() const noexcept { return scale_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return scale_.size(); }

    /// |(a - b) / scale|_2
    [[nodiscard]] double distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

private:
    Eigen::VectorXd scale_;
};

/// sqrt(mean over samples and components of ((p - t) / scale)^2).
double nrmse(const TimeSeries& predicted, const TimeSeries& truth, const ScalingVector& scaling);

/// Per-sample scaled error: sqrt(mean over components of ((p - t) / scale)^2).
Eigen::VectorXd instantaneous_error(const TimeSeries& predicted, const TimeSeries& truth,
                                    const ScalingVector& scaling);

/// Time, in Lyapunov units, covered by the samples before the first one
/// whose instantaneous error exceeds `threshold`. Sample j counts as
/// j * dt elapsed; a forecast that never fails returns n * dt.
double valid_time(const TimeSeries& predicted, const TimeSeries& truth,
                  const ScalingVector& scaling, double threshold, double lyapunov_time);

inline constexpr double kDefaultValidThreshold = 0.5;

/// Origin and (+-sqrt(beta(rho-1)), +-sqrt(beta(rho-1)), rho-1).
std::vector<Eigen::VectorXd> lorenz_uss(const Lorenz63Params& params);
std::vector<Eigen::VectorXd> lorenz_uss();

/// Positive root V1 of
///   0 = V1/R2 (R1 - R4 - R2) + 2 R1 Ir sinh(alpha (1 - R4/R1) V1),
/// bracketed on (0, 5] and refined by bisection.
double double_scroll_uss_voltage(const DoubleScrollParams& params);

/// Origin, then +(V1, V1 R4/R1, V1/R1) and its mirror image.
std::vector<Eigen::VectorXd> solve_double_scroll_uss(const DoubleScrollParams& params);
std::vector<Eigen::VectorXd> solve_double_scroll_uss();

/// Fixed points of a delta-mode model's learned map: states x with
/// W_out O(x, x, ..., x) = 0. Damped Newton from each guess; an entry is
/// empty when 200 iterations do not bring the update below 1e-10.
std::vector<std::optional<Eigen::VectorXd>> estimate_model_uss(
    const NgrcModel& model, const std::vector<Eigen::VectorXd>& guesses);

/// Accuracy of estimated steady states across repeated trainings.
struct UssEntry {
    Eigen::VectorXd truth;
    Eigen::VectorXd mean_estimate;   // over the repeats that converged
    double mean_distance = 0.0;      // scaled L2 distance
    double stddev_distance = 0.0;    // dispersion over repeats
    double median_distance = 0.0;
    double max_distance = 0.0;
    std::vector<double> distances;   // converged repeats, ascending
    int converged = 0;
    int repeats = 0;
};

struct UssReport {
    std::vector<UssEntry> entries;
};

/// `estimates[r][j]` is repeat r's estimate of `truth[j]`.
UssReport summarize_uss(const std::vector<Eigen::VectorXd>& truth,
                        const std::vector<std::vector<std::optional<Eigen::VectorXd>>>& estimates,
                        const ScalingVector& scaling);

std::string to_csv(const UssReport& report);

/// Successive refined maxima of one component, paired (M_i, M_{i+1}).
struct ReturnMap {
    std::vector<double> maxima;
    std::vector<double> times;  // time of each refined maximum
    std::vector<std::pair<double, double>> points;
};

/// Discrete maxima are samples strictly above both neighbours. Each one is
/// refined by the quartic through the 5 samples centred on it, maximized over
/// the centre interval (one sample either side). Maxima without a full
/// 5-sample stencil are skipped. Only samples within `window` time units of
/// the series start are searched. Throws InsufficientData if fewer than two
/// maxima are found.
ReturnMap extract_return_map(const TimeSeries& series, int component, double window);

/// Refined maximum of the quartic through y[-2..2]: (offset in samples, value).
std::pair<double, double> refine_maximum(const std::array<double, 5>& samples);

/// Mean over predicted points of the Euclidean distance to the nearest
/// truth point.
double return_map_deviation(const ReturnMap& predicted, const ReturnMap& truth);

std::string to_csv(const ReturnMap& map);

}  // namespace ngrc
