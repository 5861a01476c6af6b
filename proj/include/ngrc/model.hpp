#pragma once

#include "ngrc/features.hpp"
#include "ngrc/regression.hpp"
#include "ngrc/timeseries.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ngrc {

enum class ModelMode {
    ForecastDelta,    // X_{i+1} = X_i + W_out O_i, run closed loop
    InferenceDirect,  // y_i = W_out O_i, open loop
};

std::string to_string(ModelMode mode);
ModelMode parse_mode(const std::string& text);

struct ModelMetadata {
    double training_nrmse = 0.0;
    Eigen::Index training_columns = 0;
};

/// Feature spec + readout + mode. Immutable once constructed.
class NgrcModel {
public:
    /// Checks the shape invariants: feature_dim == feature_length(spec),
    /// spec.d == |input_indices|, and for ForecastDelta output_dim == d.
    NgrcModel(FeatureSpec spec, ReadoutMatrix readout, ModelMode mode,
              std::vector<int> input_indices, std::optional<int> target_index = std::nullopt,
              ModelMetadata metadata = {});

    [[nodiscard]] const FeatureSpec& spec() const noexcept { return features_.spec(); }
    [[nodiscard]] const FeatureMap& feature_map() const noexcept { return features_; }
    [[nodiscard]] const ReadoutMatrix& readout() const noexcept { return readout_; }
    [[nodiscard]] ModelMode mode() const noexcept { return mode_; }
    [[nodiscard]] const std::vector<int>& input_indices() const noexcept { return input_indices_; }
    [[nodiscard]] std::optional<int> target_index() const noexcept { return target_index_; }
    [[nodiscard]] Eigen::Index output_dim() const noexcept { return readout_.output_dim(); }
    [[nodiscard]] const ModelMetadata& metadata() const noexcept { return metadata_; }

    /// W_out applied to the features of a linear block (d*k entries).
    [[nodiscard]] Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& linear) const;

private:
    FeatureMap features_;
    ReadoutMatrix readout_;
    ModelMode mode_;
    std::vector<int> input_indices_;
    std::optional<int> target_index_;
    ModelMetadata metadata_;
};

/// Fits W_out so that X_{i+1} - X_i ~ W_out O_i for every i in
/// [(k-1)s, n-2]. Throws InsufficientData when n < (k-1)s + 2.
NgrcModel train_forecaster(const TimeSeries& series, const FeatureSpec& spec, double alpha);

/// Runs the model as an autonomous system from the last (k-1)s+1 samples of
/// `warmup`. Returns the n_steps predicted samples, starting one dt after the
/// last warm-up sample.
TimeSeries forecast(const NgrcModel& model, const TimeSeries& warmup, Eigen::Index n_steps);

/// Fits target_i ~ W_out O_i where O is built from the observed components.
NgrcModel train_inferrer(const TimeSeries& series, const std::vector<int>& observed, int target,
                         const FeatureSpec& spec, double alpha);

/// Open-loop inference. `observed` holds exactly the observed components in
/// the training order. Output sample j corresponds to observed sample
/// (k-1)s + j.
TimeSeries infer(const NgrcModel& model, const TimeSeries& observed);

/// Flat, versioned key = value document. Weights are written row-major with
/// shortest round-trip decimals, so save/load is bit-exact.
std::string serialize(const NgrcModel& model);
NgrcModel deserialize(const std::string& text);
void save_model(const std::filesystem::path& path, const NgrcModel& model);
NgrcModel load_model(const std::filesystem::path& path);

}  // namespace ngrc
