#include "ngrc/experiment.hpp"

#include "ngrc/error.hpp"
#include "ngrc/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace ngrc {

namespace {

struct TaskName {
    Task task;
    const char* name;
};

constexpr TaskName kTaskNames[] = {
    {Task::ForecastLorenz, "forecast-lorenz"},
    {Task::ForecastDoubleScroll, "forecast-doublescroll"},
    {Task::InferLorenz, "infer-lorenz"},
    {Task::SweepTrainSize, "sweep-trainsize"},
    {Task::NoiseLorenz, "noise-lorenz"},
    {Task::Complexity, "complexity"},
    {Task::BaselineRc, "baseline-rc"},
};

std::string trim(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r");
    return text.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        items.push_back(trim(item));
    }
    return items;
}

// Value parsers report failure through the optional.
std::optional<double> to_double(const std::string& text) {
    try {
        return parse_double(text);
    } catch (const Error&) {
        return std::nullopt;
    }
}

template <typename Int>
std::optional<Int> to_int(const std::string& text) {
    Int value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
        return std::nullopt;
    }
    return value;
}

std::optional<bool> to_bool(const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no") {
        return false;
    }
    return std::nullopt;
}

template <typename T, typename Parse>
std::optional<std::vector<T>> to_list(const std::string& text, Parse parse) {
    std::vector<T> out;
    if (trim(text).empty()) {
        return out;
    }
    for (const auto& item : split_list(text)) {
        const auto value = parse(item);
        if (!value) {
            return std::nullopt;
        }
        out.push_back(*value);
    }
    return out;
}

template <typename T, typename Format>
std::string join(const std::vector<T>& values, Format format) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += (i ? ", " : "") + format(values[i]);
    }
    return out;
}

std::string format_int(long long v) { return std::to_string(v); }

enum Group : unsigned {
    kData = 1u << 0,
    kFeatures = 1u << 1,
    kTrain = 1u << 2,
    kHorizon = 1u << 3,
    kSegments = 1u << 4,
    kValid = 1u << 5,
    kReturnMap = 1u << 6,
    kMeasurement = 1u << 7,
    kInfer = 1u << 8,
    kNoise = 1u << 9,
    kSweep = 1u << 10,
    kReservoir = 1u << 11,
    kAlpha = 1u << 12,
    kAlways = 1u << 13,
};

unsigned task_groups(Task task) {
    const unsigned model = kData | kFeatures | kAlpha;
    switch (task) {
        case Task::ForecastLorenz:
            return kAlways | model | kTrain | kHorizon | kSegments | kValid | kReturnMap |
                   kMeasurement;
        case Task::ForecastDoubleScroll:
            return kAlways | model | kTrain | kHorizon | kSegments | kValid | kMeasurement;
        case Task::InferLorenz:
            return kAlways | model | kTrain | kHorizon | kSegments | kMeasurement | kInfer;
        case Task::SweepTrainSize:
            return kAlways | model | kHorizon | kSegments | kSweep;
        case Task::NoiseLorenz:
            return kAlways | model | kTrain | kHorizon | kSegments | kNoise;
        case Task::Complexity:
            return kAlways;
        case Task::BaselineRc:
            return kAlways | kData | kAlpha | kTrain | kHorizon | kValid | kReservoir;
    }
    return kAlways;
}

using Setter = std::function<std::optional<std::string>(ExperimentConfig&, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Key {
    const char* name;
    unsigned group;
    Setter set;
    Getter get;
};

template <typename Field>
Key real_key(const char* name, unsigned group, Field field) {
    return {name, group,
            [field](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
                const auto value = to_double(v);
                if (!value) {
                    return "expected a number, got '" + v + "'";
                }
                c.*field = *value;
                return std::nullopt;
            },
            [field](const ExperimentConfig& c) { return format_double(c.*field); }};
}

template <typename Field>
Key int_key(const char* name, unsigned group, Field field) {
    return {name, group,
            [field](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
                const auto value = to_int<int>(v);
                if (!value) {
                    return "expected an integer, got '" + v + "'";
                }
                c.*field = *value;
                return std::nullopt;
            },
            [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

template <typename Field>
Key int_list_key(const char* name, unsigned group, Field field) {
    return {name, group,
            [field](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
                const auto value = to_list<int>(v, to_int<int>);
                if (!value) {
                    return "expected a comma-separated list of integers, got '" + v + "'";
                }
                c.*field = *value;
                return std::nullopt;
            },
            [field](const ExperimentConfig& c) { return join(c.*field, format_int); }};
}

const std::vector<Key>& keys() {
    static const std::vector<Key> table = [] {
        std::vector<Key> t;
        t.push_back({"task", kAlways, nullptr,
                     [](const ExperimentConfig& c) { return to_string(c.task); }});
        t.push_back({"out", kAlways,
                     [](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
                         if (v.empty()) {
                             return "must not be empty";
                         }
                         c.out = v;
                         return std::nullopt;
                     },
                     [](const ExperimentConfig& c) { return c.out.generic_string(); }});
        t.push_back(real_key("dt", kData, &ExperimentConfig::dt));
        t.push_back(real_key("transient", kData, &ExperimentConfig::transient));
        t.push_back({"initial_state", kData,
                     [](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
                         const auto value = to_list<double>(v, to_double);
                         if (!value) {
                             return "expected a comma-separated list of numbers, got '" + v + "'";
                         }
                         c.initial_state = *value;
                         return std::nullopt;
                     },
                     [](const ExperimentConfig& c) {
                         return join(c.initial_state, [](double x) { return format_double(x); });
                     }});
        t.push_back(real_key("rtol", kData, &ExperimentConfig::rtol));
        t.push_back(real_key("atol", kData, &ExperimentConfig::atol));
        t.push_back({"seed", kData | kNoise | kReservoir,
                     [](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
                         const auto value = to_int<std::uint64_t>(v);
                         if (!value) {
                             return "expected a nonnegative integer, got '" + v + "'";
                         }
                         c.seed = *value;
                         return std::nullopt;
                     },
                     [](const ExperimentConfig& c) { return std::to_string(c.seed); }});
        t.push_back(real_key("measurement_noise", kMeasurement,
                             &ExperimentConfig::measurement_noise));
        t.push_back(int_key("k", kFeatures, &ExperimentConfig::k));
        t.push_back(int_key("s", kFeatures, &ExperimentConfig::s));
        t.push_back(int_list_key("degrees", kFeatures, &ExperimentConfig::degrees));
        t.push_back({"include_constant", kFeatures,
                     [](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
                         const auto value = to_bool(v);
                         if (!value) {
                             return "expected true or false, got '" + v + "'";
                         }
                         c.include_constant = *value;
                         return std::nullopt;
                     },
                     [](const ExperimentConfig& c) {
                         return std::string(c.include_constant ? "true" : "false");
                     }});
        t.push_back(real_key("constant_value", kFeatures, &ExperimentConfig::constant_value));
        t.push_back(real_key("alpha", kAlpha, &ExperimentConfig::alpha));
        t.push_back(int_key("train_points", kTrain, &ExperimentConfig::train_points));
        t.push_back(real_key("test_horizon", kHorizon, &ExperimentConfig::test_horizon));
        t.push_back(int_key("segments", kSegments, &ExperimentConfig::segments));
        t.push_back(real_key("valid_threshold", kValid, &ExperimentConfig::valid_threshold));
        t.push_back(real_key("return_map_window", kReturnMap,
                             &ExperimentConfig::return_map_window));
        t.push_back(int_list_key("observed", kInfer, &ExperimentConfig::observed));
        t.push_back(int_key("target", kInfer, &ExperimentConfig::target));
        t.push_back(real_key("noise_rms", kNoise, &ExperimentConfig::noise_rms));
        t.push_back(int_key("substeps", kNoise, &ExperimentConfig::substeps));
        t.push_back(int_list_key("sweep_sizes", kSweep, &ExperimentConfig::sweep_sizes));
        t.push_back(int_key("nodes", kReservoir, &ExperimentConfig::nodes));
        t.push_back(real_key("gamma", kReservoir, &ExperimentConfig::gamma));
        t.push_back(real_key("spectral_radius", kReservoir, &ExperimentConfig::spectral_radius));
        t.push_back(real_key("density", kReservoir, &ExperimentConfig::density));
        t.push_back(real_key("input_scale", kReservoir, &ExperimentConfig::input_scale));
        t.push_back(real_key("bias", kReservoir, &ExperimentConfig::bias));
        t.push_back({"activation", kReservoir,
                     [](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
                         c.activation = v;
                         return std::nullopt;
                     },
                     [](const ExperimentConfig& c) { return c.activation; }});
        t.push_back(int_key("warmup_steps", kReservoir, &ExperimentConfig::warmup_steps));
        return t;
    }();
    return table;
}

bool accepts(Task task, const Key& key) { return (task_groups(task) & key.group) != 0; }

}  // namespace

std::string to_string(Task task) {
    for (const auto& entry : kTaskNames) {
        if (entry.task == task) {
            return entry.name;
        }
    }
    return "unknown";
}

std::optional<Task> parse_task(const std::string& text) {
    for (const auto& entry : kTaskNames) {
        if (text == entry.name) {
            return entry.task;
        }
    }
    return std::nullopt;
}

ExperimentConfig default_config(Task task) {
    ExperimentConfig c;
    c.task = task;
    c.out = "runs/" + to_string(task);
    c.initial_state = {1.0, 1.0, 1.0};
    switch (task) {
        case Task::ForecastLorenz:
            break;
        case Task::ForecastDoubleScroll:
            c.dt = 0.25;
            c.initial_state = {0.1, 0.1, 0.1};
            c.degrees = {3};
            c.include_constant = false;
            c.alpha = 1e-2;
            c.return_map_window = 0.0;
            break;
        case Task::InferLorenz:
            c.dt = 0.05;
            c.k = 4;
            c.s = 5;
            c.alpha = 1e-3;
            c.rtol = 1e-8;  // open loop, so accurate data is safe here
            c.atol = 1e-10;
            c.test_horizon = 40.0;
            c.return_map_window = 0.0;
            break;
        case Task::SweepTrainSize:
            c.test_horizon = 1.0;
            c.segments = 20;
            c.return_map_window = 0.0;
            for (int n = 100; n <= 1000; n += 50) {
                c.sweep_sizes.push_back(n);
            }
            break;
        case Task::NoiseLorenz:
            c.alpha = 1.4e-2;
            c.test_horizon = 1.0;
            c.return_map_window = 0.0;
            break;
        case Task::Complexity:
            c.return_map_window = 0.0;
            break;
        case Task::BaselineRc:
            c.alpha = 1e-6;
            c.test_horizon = 10.0;
            c.return_map_window = 0.0;
            break;
    }
    return c;
}

std::vector<std::string> validate(const ExperimentConfig& c) {
    std::vector<std::string> errors;
    const unsigned groups = task_groups(c.task);
    auto require = [&](unsigned group, bool ok, const std::string& message) {
        if ((groups & group) && !ok) {
            errors.push_back(message);
        }
    };
    auto num = [](double v) { return " (got " + format_double(v) + ")"; };

    require(kData, c.dt > 0.0 && std::isfinite(c.dt), "dt: must be > 0" + num(c.dt));
    require(kData, c.transient >= 0.0 && std::isfinite(c.transient),
            "transient: must be >= 0" + num(c.transient));
    require(kData, c.initial_state.size() == 3,
            "initial_state: needs 3 components (got " + std::to_string(c.initial_state.size()) +
                ")");
    require(kData, c.rtol > 0.0, "rtol: must be > 0" + num(c.rtol));
    require(kData, c.atol > 0.0, "atol: must be > 0" + num(c.atol));
    require(kMeasurement, c.measurement_noise >= 0.0,
            "measurement_noise: must be >= 0" + num(c.measurement_noise));

    require(kFeatures, c.k >= 1, "k: must be >= 1 (got " + std::to_string(c.k) + ")");
    require(kFeatures, c.s >= 1, "s: must be >= 1 (got " + std::to_string(c.s) + ")");
    {
        std::set<int> seen;
        bool ok = true;
        for (int d : c.degrees) {
            ok = ok && d >= 2 && seen.insert(d).second;
        }
        require(kFeatures, ok, "degrees: entries must be distinct integers >= 2");
    }
    require(kFeatures, std::isfinite(c.constant_value), "constant_value: must be finite");
    require(kAlpha, c.alpha >= 0.0 && std::isfinite(c.alpha),
            "alpha: must be >= 0" + num(c.alpha));

    require(kTrain, c.train_points >= 1,
            "train_points: must be >= 1 (got " + std::to_string(c.train_points) + ")");
    require(kHorizon, c.test_horizon > 0.0 && std::isfinite(c.test_horizon),
            "test_horizon: must be > 0" + num(c.test_horizon));
    require(kSegments, c.segments >= 1,
            "segments: must be >= 1 (got " + std::to_string(c.segments) + ")");
    require(kValid, c.valid_threshold > 0.0,
            "valid_threshold: must be > 0" + num(c.valid_threshold));
    require(kReturnMap, c.return_map_window >= 0.0,
            "return_map_window: must be >= 0" + num(c.return_map_window));

    {
        std::set<int> seen;
        bool ok = !c.observed.empty();
        for (int i : c.observed) {
            ok = ok && i >= 0 && i < 3 && seen.insert(i).second;
        }
        require(kInfer, ok, "observed: needs distinct component indices in [0, 3)");
        require(kInfer, c.target >= 0 && c.target < 3 && !seen.count(c.target),
                "target: must be a component index in [0, 3) that is not observed");
    }

    require(kNoise, c.noise_rms >= 0.0, "noise_rms: must be >= 0" + num(c.noise_rms));
    require(kNoise, c.substeps >= 1,
            "substeps: must be >= 1 (got " + std::to_string(c.substeps) + ")");

    {
        bool ok = !c.sweep_sizes.empty();
        for (std::size_t i = 0; i < c.sweep_sizes.size(); ++i) {
            ok = ok && c.sweep_sizes[i] >= 1 && (i == 0 || c.sweep_sizes[i] > c.sweep_sizes[i - 1]);
        }
        require(kSweep, ok, "sweep_sizes: needs a strictly increasing list of sizes >= 1");
    }

    require(kReservoir, c.nodes >= 1, "nodes: must be >= 1 (got " + std::to_string(c.nodes) + ")");
    require(kReservoir, c.gamma >= 0.0 && c.gamma <= 1.0,
            "gamma: must lie in [0, 1]" + num(c.gamma));
    require(kReservoir, c.spectral_radius >= 0.0,
            "spectral_radius: must be >= 0" + num(c.spectral_radius));
    require(kReservoir, c.density > 0.0 && c.density <= 1.0,
            "density: must lie in (0, 1]" + num(c.density));
    require(kReservoir, c.input_scale >= 0.0, "input_scale: must be >= 0" + num(c.input_scale));
    require(kReservoir, std::isfinite(c.bias), "bias: must be finite");
    require(kReservoir, c.activation == "tanh" || c.activation == "linear",
            "activation: must be tanh or linear (got '" + c.activation + "')");
    require(kReservoir, c.warmup_steps >= 0,
            "warmup_steps: must be >= 0 (got " + std::to_string(c.warmup_steps) + ")");
    return errors;
}

ConfigParse parse_config(const std::string& text) {
    ConfigParse result;
    std::vector<std::pair<std::string, std::string>> entries;
    std::map<std::string, int> line_of;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string content = trim(line);
        if (content.empty() || content.front() == '#') {
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            result.errors.push_back("line " + std::to_string(number) +
                                    ": expected 'key = value', got '" + content + "'");
            continue;
        }
        const std::string key = trim(content.substr(0, eq));
        const std::string value = trim(content.substr(eq + 1));
        if (line_of.count(key)) {
            result.errors.push_back(key + ": duplicate key (lines " +
                                    std::to_string(line_of[key]) + " and " +
                                    std::to_string(number) + ")");
            continue;
        }
        line_of[key] = number;
        entries.emplace_back(key, value);
    }

    const auto task_entry = std::find_if(entries.begin(), entries.end(),
                                         [](const auto& e) { return e.first == "task"; });
    if (task_entry == entries.end()) {
        result.errors.push_back("task: missing (one of forecast-lorenz, forecast-doublescroll, "
                                "infer-lorenz, sweep-trainsize, noise-lorenz, complexity, "
                                "baseline-rc)");
        return result;
    }
    const auto task = parse_task(task_entry->second);
    if (!task) {
        result.errors.push_back("task: unknown task '" + task_entry->second + "'");
        return result;
    }

    ExperimentConfig config = default_config(*task);
    for (const auto& [name, value] : entries) {
        if (name == "task") {
            continue;
        }
        const auto key = std::find_if(keys().begin(), keys().end(),
                                      [&](const Key& k) { return name == k.name; });
        if (key == keys().end()) {
            result.errors.push_back(name + ": unknown key");
            continue;
        }
        if (!accepts(*task, *key)) {
            result.errors.push_back(name + ": not used by task " + to_string(*task));
            continue;
        }
        if (auto error = key->set(config, value)) {
            result.errors.push_back(name + ": " + *error);
        }
    }
    for (auto& error : validate(config)) {
        const auto name = error.substr(0, error.find(':'));
        const bool already = std::any_of(result.errors.begin(), result.errors.end(),
                                         [&](const std::string& e) {
                                             return e.compare(0, name.size() + 1, name + ":") == 0;
                                         });
        if (!already) {
            result.errors.push_back(std::move(error));
        }
    }
    if (result.errors.empty()) {
        result.config = std::move(config);
    }
    return result;
}

ConfigParse load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        ConfigParse result;
        result.errors.push_back("config: cannot read '" + path.string() + "'");
        return result;
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string resolved_text(const ExperimentConfig& config) {
    std::string out = "# resolved ngrc experiment config\n";
    for (const auto& key : keys()) {
        if (accepts(config.task, key)) {
            out += std::string(key.name) + " = " + key.get(config) + "\n";
        }
    }
    return out;
}

}  // namespace ngrc
