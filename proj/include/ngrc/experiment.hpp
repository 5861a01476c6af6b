#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ngrc {

enum class Task {
    ForecastLorenz,
    ForecastDoubleScroll,
    InferLorenz,
    SweepTrainSize,
    NoiseLorenz,
    Complexity,
    BaselineRc,
};

std::string to_string(Task task);
std::optional<Task> parse_task(const std::string& text);

/// Every knob of every task. Fields a task does not use keep their defaults
/// and are neither accepted from nor written to its config file.
struct ExperimentConfig {
    Task task = Task::ForecastLorenz;
    std::filesystem::path out;

    // data generation
    double dt = 0.025;
    double transient = 20.0;               // time units discarded before sampling
    std::vector<double> initial_state;     // start of the transient
    double rtol = 1e-3;
    double atol = 1e-6;
    std::uint64_t seed = 0;
    double measurement_noise = 0.0;        // std of additive training noise, in scaled units

    // features and readout
    int k = 2;
    int s = 1;
    std::vector<int> degrees{2};
    bool include_constant = true;
    double constant_value = 1.0;
    double alpha = 2.5e-6;

    // protocol
    int train_points = 400;                // training equations per model
    double test_horizon = 10.0;            // Lyapunov times
    int segments = 10;
    double valid_threshold = 0.5;
    double return_map_window = 1000.0;     // time units; 0 disables

    // infer-lorenz
    std::vector<int> observed{0, 1};
    int target = 2;

    // noise-lorenz
    double noise_rms = 1.0;
    int substeps = 20;

    // sweep-trainsize
    std::vector<int> sweep_sizes;

    // baseline-rc
    int nodes = 100;
    double gamma = 1.0;
    double spectral_radius = 0.9;
    double density = 0.05;
    double input_scale = 1.0;
    double bias = 0.0;
    std::string activation = "tanh";
    int warmup_steps = 100;
};

/// Defaults for one task, before any file is read.
ExperimentConfig default_config(Task task);

struct ConfigParse {
    std::optional<ExperimentConfig> config;  // set only when errors is empty
    std::vector<std::string> errors;         // "<key>: <reason>", one per problem
};

/// Parses a flat `key = value` document. Blank lines and lines starting with
/// '#' are ignored; lists are comma-separated. `task` selects the defaults
/// and the set of accepted keys. Unknown, duplicate, malformed and
/// out-of-range keys are all collected before returning.
ConfigParse parse_config(const std::string& text);
ConfigParse load_config(const std::filesystem::path& path);

/// Checks cross-field constraints. Empty when valid.
std::vector<std::string> validate(const ExperimentConfig& config);

/// Canonical document listing every key the task accepts, fully resolved.
/// Parsing it yields the same config.
std::string resolved_text(const ExperimentConfig& config);

struct Artifact {
    std::string name;     // file name inside the output directory
    std::string content;
};

struct ExperimentResult {
    nlohmann::ordered_json summary;
    std::vector<Artifact> artifacts;  // resolved.cfg and the task's CSVs
};

/// Runs the task. Pure: nothing is written. Throws ngrc::Error subclasses on
/// failure; NumericalFailure and IntegrationFailure mark numerical trouble.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes summary.json and every artifact into `dir`, creating it if needed.
void write_result(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace ngrc
