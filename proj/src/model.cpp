#include "ngrc/model.hpp"

#include "ngrc/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <type_traits>

namespace ngrc {

std::string to_string(ModelMode mode) {
    return mode == ModelMode::ForecastDelta ? "forecast-delta" : "inference-direct";
}

ModelMode parse_mode(const std::string& text) {
    if (text == "forecast-delta") {
        return ModelMode::ForecastDelta;
    }
    if (text == "inference-direct") {
        return ModelMode::InferenceDirect;
    }
    throw FormatError("unknown model mode '" + text + "'");
}

NgrcModel::NgrcModel(FeatureSpec spec, ReadoutMatrix readout, ModelMode mode,
                     std::vector<int> input_indices, std::optional<int> target_index,
                     ModelMetadata metadata)
    : features_(std::move(spec)),
      readout_(std::move(readout)),
      mode_(mode),
      input_indices_(std::move(input_indices)),
      target_index_(target_index),
      metadata_(metadata) {
    const auto& sp = features_.spec();
    if (readout_.feature_dim() != static_cast<Eigen::Index>(features_.length())) {
        throw ShapeMismatch("model: readout has " + std::to_string(readout_.feature_dim()) +
                            " columns, spec defines " + std::to_string(features_.length()) +
                            " features");
    }
    if (static_cast<int>(input_indices_.size()) != sp.d()) {
        throw ShapeMismatch("model: spec.d must equal the number of input indices");
    }
    if (readout_.output_dim() < 1) {
        throw ShapeMismatch("model: readout has no outputs");
    }
    if (mode_ == ModelMode::ForecastDelta && readout_.output_dim() != sp.d()) {
        throw ShapeMismatch("model: a forecaster must predict all d inputs");
    }
}

Eigen::VectorXd NgrcModel::apply(const Eigen::Ref<const Eigen::VectorXd>& linear) const {
    return readout_.weights * features_.evaluate(linear);
}

namespace {

Eigen::VectorXd safe_scale(const Eigen::VectorXd& stddev) {
    return stddev.unaryExpr([](double v) { return v > 0.0 ? v : 1.0; });
}

double scaled_rms(const Eigen::MatrixXd& error, const Eigen::VectorXd& scale) {
    // error is components x samples
    const Eigen::MatrixXd scaled = scale.cwiseInverse().asDiagonal() * error;
    return std::sqrt(scaled.squaredNorm() / static_cast<double>(scaled.size()));
}

std::vector<int> iota_indices(int n) {
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = i;
    }
    return out;
}

}  // namespace

NgrcModel train_forecaster(const TimeSeries& series, const FeatureSpec& spec, double alpha) {
    if (series.components() != spec.d()) {
        throw ShapeMismatch("train forecaster: series has " + std::to_string(series.components()) +
                            " components, spec.d is " + std::to_string(spec.d()));
    }
    const Eigen::Index first = spec.first_valid_index();
    const Eigen::Index n = series.samples();
    if (n < first + 2) {
        throw InsufficientData("train forecaster: need at least " + std::to_string(first + 2) +
                               " samples, got " + std::to_string(n));
    }
    const FeatureMap map(spec);
    const Eigen::Index last = n - 2;
    TrainingBlock block;
    block.features = map.feature_block(series, first, last);
    const Eigen::Index cols = last - first + 1;
    block.targets = (series.values.middleRows(first + 1, cols) -
                     series.values.middleRows(first, cols))
                        .transpose();
    ReadoutMatrix readout = ridge_fit(block, alpha);

    const Eigen::MatrixXd residual = readout.weights * block.features - block.targets;
    ModelMetadata meta;
    meta.training_columns = cols;
    meta.training_nrmse = scaled_rms(residual, safe_scale(series.stddev()));
    return NgrcModel(spec, std::move(readout), ModelMode::ForecastDelta, iota_indices(spec.d()),
                     std::nullopt, meta);
}

TimeSeries forecast(const NgrcModel& model, const TimeSeries& warmup, Eigen::Index n_steps) {
    if (model.mode() != ModelMode::ForecastDelta) {
        throw ModeMismatch("forecast: model was trained for inference");
    }
    const auto& spec = model.spec();
    const int d = spec.d();
    const Eigen::Index depth = spec.warmup_samples();
    if (warmup.components() != d) {
        throw ShapeMismatch("forecast: warm-up has " + std::to_string(warmup.components()) +
                            " components, model expects " + std::to_string(d));
    }
    if (warmup.samples() < depth) {
        throw InsufficientData("forecast: warm-up needs " + std::to_string(depth) +
                               " samples, got " + std::to_string(warmup.samples()));
    }
    if (n_steps < 0) {
        throw InvalidArgument("forecast: negative step count");
    }

    // Ring buffer of the most recent `depth` states; head is the newest.
    Eigen::MatrixXd history = warmup.values.bottomRows(depth);
    Eigen::Index head = depth - 1;
    const auto& map = model.feature_map();
    const auto& weights = model.readout().weights;
    Eigen::VectorXd linear(spec.linear_length());
    Eigen::VectorXd feats(static_cast<Eigen::Index>(map.length()));
    Eigen::MatrixXd out(n_steps, d);
    for (Eigen::Index step = 0; step < n_steps; ++step) {
        for (int tap = 0; tap < spec.k(); ++tap) {
            Eigen::Index row = head - static_cast<Eigen::Index>(tap) * spec.s();
            if (row < 0) {
                row += depth;
            }
            linear.segment(static_cast<Eigen::Index>(tap) * d, d) = history.row(row).transpose();
        }
        map.evaluate(linear, feats);
        const Eigen::VectorXd next = linear.head(d) + weights * feats;
        head = (head + 1) % depth;
        history.row(head) = next.transpose();
        out.row(step) = next.transpose();
    }
    return TimeSeries(warmup.dt, warmup.time(warmup.samples() - 1) + warmup.dt, std::move(out));
}

NgrcModel train_inferrer(const TimeSeries& series, const std::vector<int>& observed, int target,
                         const FeatureSpec& spec, double alpha) {
    if (observed.empty()) {
        throw InvalidArgument("train inferrer: no observed components");
    }
    if (std::find(observed.begin(), observed.end(), target) != observed.end()) {
        throw InvalidArgument("train inferrer: target component " + std::to_string(target) +
                              " is also observed");
    }
    if (target < 0 || target >= series.components()) {
        throw InvalidArgument("train inferrer: target component out of range");
    }
    if (static_cast<int>(observed.size()) != spec.d()) {
        throw ShapeMismatch("train inferrer: spec.d must equal the number of observed components");
    }
    const TimeSeries inputs = series.select(observed);
    const Eigen::Index first = spec.first_valid_index();
    const Eigen::Index n = series.samples();
    if (n < first + 1) {
        throw InsufficientData("train inferrer: need at least " + std::to_string(first + 1) +
                               " samples, got " + std::to_string(n));
    }
    const FeatureMap map(spec);
    TrainingBlock block;
    block.features = map.feature_block(inputs, first, n - 1);
    block.targets = series.values.col(target).segment(first, n - first).transpose();
    ReadoutMatrix readout = ridge_fit(block, alpha);

    const Eigen::MatrixXd residual = readout.weights * block.features - block.targets;
    ModelMetadata meta;
    meta.training_columns = n - first;
    Eigen::VectorXd scale(1);
    scale(0) = series.select({target}).stddev()(0);
    meta.training_nrmse = scaled_rms(residual, safe_scale(scale));
    return NgrcModel(spec, std::move(readout), ModelMode::InferenceDirect, observed, target, meta);
}

TimeSeries infer(const NgrcModel& model, const TimeSeries& observed) {
    if (model.mode() != ModelMode::InferenceDirect) {
        throw ModeMismatch("infer: model was trained for forecasting");
    }
    const auto& spec = model.spec();
    const Eigen::Index first = spec.first_valid_index();
    if (observed.samples() <= first) {
        throw InsufficientData("infer: series shorter than the warm-up");
    }
    const Eigen::MatrixXd block = model.feature_map().feature_block(observed, first,
                                                                    observed.samples() - 1);
    Eigen::MatrixXd out = (model.readout().weights * block).transpose();
    return TimeSeries(observed.dt, observed.time(first), std::move(out));
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr int kFormatVersion = 1;

template <typename T>
std::string join(const std::vector<T>& items) {
    std::string out;
    for (std::size_t j = 0; j < items.size(); ++j) {
        if (j > 0) {
            out += ',';
        }
        if constexpr (std::is_floating_point_v<T>) {
            out += format_double(items[j]);
        } else {
            out += std::to_string(items[j]);
        }
    }
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    if (text.empty()) {
        return out;
    }
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        out.push_back(item);
    }
    return out;
}

std::vector<int> parse_ints(const std::string& text) {
    std::vector<int> out;
    for (const auto& item : split_list(text)) {
        const double v = parse_double(item);
        if (v != static_cast<double>(static_cast<int>(v))) {
            throw FormatError("expected an integer, got '" + item + "'");
        }
        out.push_back(static_cast<int>(v));
    }
    return out;
}

std::string trim(const std::string& text) {
    const auto start = text.find_first_not_of(" \t\r");
    if (start == std::string::npos) {
        return {};
    }
    const auto stop = text.find_last_not_of(" \t\r");
    return text.substr(start, stop - start + 1);
}

}  // namespace

std::string serialize(const NgrcModel& model) {
    const auto& spec = model.spec();
    const auto& w = model.readout().weights;
    std::ostringstream out;
    out << "format = ngrc-model\n";
    out << "version = " << kFormatVersion << '\n';
    out << "mode = " << to_string(model.mode()) << '\n';
    out << "d = " << spec.d() << '\n';
    out << "k = " << spec.k() << '\n';
    out << "s = " << spec.s() << '\n';
    out << "degrees = " << join(spec.degrees()) << '\n';
    out << "include_constant = " << (spec.include_constant() ? "true" : "false") << '\n';
    out << "constant_value = " << format_double(spec.constant_value()) << '\n';
    out << "input_indices = " << join(model.input_indices()) << '\n';
    out << "target_index = " << (model.target_index() ? std::to_string(*model.target_index()) : "")
        << '\n';
    out << "alpha = " << format_double(model.readout().alpha) << '\n';
    out << "training_nrmse = " << format_double(model.metadata().training_nrmse) << '\n';
    out << "training_columns = " << model.metadata().training_columns << '\n';
    out << "output_dim = " << w.rows() << '\n';
    out << "feature_dim = " << w.cols() << '\n';
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        std::vector<double> row(w.row(r).begin(), w.row(r).end());
        out << "weights." << r << " = " << join(row) << '\n';
    }
    return out.str();
}

NgrcModel deserialize(const std::string& text) {
    std::map<std::string, std::string> fields;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string content = trim(line);
        if (content.empty() || content.front() == '#') {
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw FormatError("model: line " + std::to_string(line_no) + " has no '='");
        }
        const std::string key = trim(content.substr(0, eq));
        if (!fields.emplace(key, trim(content.substr(eq + 1))).second) {
            throw FormatError("model: duplicate key '" + key + "'");
        }
    }
    auto take = [&](const std::string& key) {
        const auto it = fields.find(key);
        if (it == fields.end()) {
            throw FormatError("model: missing key '" + key + "'");
        }
        std::string value = it->second;
        fields.erase(it);
        return value;
    };
    auto take_int = [&](const std::string& key) {
        const auto values = parse_ints(take(key));
        if (values.size() != 1) {
            throw FormatError("model: '" + key + "' must be a single integer");
        }
        return values.front();
    };

    if (take("format") != "ngrc-model") {
        throw FormatError("model: not an ngrc-model document");
    }
    if (const int version = take_int("version"); version != kFormatVersion) {
        throw FormatError("model: unsupported version " + std::to_string(version));
    }
    const ModelMode mode = parse_mode(take("mode"));
    const int d = take_int("d");
    const int k = take_int("k");
    const int s = take_int("s");
    const auto degrees = parse_ints(take("degrees"));
    const std::string constant_flag = take("include_constant");
    if (constant_flag != "true" && constant_flag != "false") {
        throw FormatError("model: include_constant must be true or false");
    }
    const double constant_value = parse_double(take("constant_value"));
    const auto input_indices = parse_ints(take("input_indices"));
    const auto target_list = parse_ints(take("target_index"));
    std::optional<int> target;
    if (!target_list.empty()) {
        target = target_list.front();
    }
    ReadoutMatrix readout;
    readout.alpha = parse_double(take("alpha"));
    ModelMetadata meta;
    meta.training_nrmse = parse_double(take("training_nrmse"));
    meta.training_columns = take_int("training_columns");
    const int rows = take_int("output_dim");
    const int cols = take_int("feature_dim");
    if (rows < 1 || cols < 1) {
        throw FormatError("model: bad readout dimensions");
    }
    readout.weights.resize(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const auto items = split_list(take("weights." + std::to_string(r)));
        if (static_cast<int>(items.size()) != cols) {
            throw FormatError("model: weights row " + std::to_string(r) + " has " +
                              std::to_string(items.size()) + " entries, expected " +
                              std::to_string(cols));
        }
        for (int c = 0; c < cols; ++c) {
            readout.weights(r, c) = parse_double(items[static_cast<std::size_t>(c)]);
        }
    }
    if (!fields.empty()) {
        throw FormatError("model: unknown key '" + fields.begin()->first + "'");
    }
    FeatureSpec spec(d, k, s, degrees, constant_flag == "true", constant_value);
    return NgrcModel(std::move(spec), std::move(readout), mode, input_indices, target, meta);
}

void save_model(const std::filesystem::path& path, const NgrcModel& model) {
    std::ofstream file(path);
    if (!file) {
        throw FormatError("cannot open " + path.string() + " for writing");
    }
    file << serialize(model);
}

NgrcModel load_model(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) {
        throw FormatError("cannot open " + path.string());
    }
    std::stringstream buffer;
    buffer << file.rdbuf();
    return deserialize(buffer.str());
}

}  // namespace ngrc
