#include "ngrc/features.hpp"

#include "ngrc/error.hpp"

#include <algorithm>
#include <string>

namespace ngrc {

FeatureSpec::FeatureSpec(int d, int k, int s, std::vector<int> degrees, bool include_constant,
                         double constant_value)
    : d_(d),
      k_(k),
      s_(s),
      degrees_(std::move(degrees)),
      include_constant_(include_constant),
      constant_value_(constant_value) {
    if (d_ < 1) {
        throw InvalidArgument("feature spec: d must be >= 1");
    }
    if (k_ < 1) {
        throw InvalidArgument("feature spec: k must be >= 1");
    }
    if (s_ < 1) {
        throw InvalidArgument("feature spec: s must be >= 1");
    }
    std::sort(degrees_.begin(), degrees_.end());
    for (std::size_t b = 0; b < degrees_.size(); ++b) {
        if (degrees_[b] < 2) {
            throw InvalidArgument("feature spec: polynomial degrees must be >= 2");
        }
        if (b > 0 && degrees_[b] == degrees_[b - 1]) {
            throw InvalidArgument("feature spec: duplicate degree " + std::to_string(degrees_[b]));
        }
    }
}

bool FeatureSpec::is_odd() const noexcept {
    return !include_constant_ &&
           std::all_of(degrees_.begin(), degrees_.end(), [](int p) { return p % 2 == 1; });
}

std::size_t monomial_count(int n_vars, int p) {
    // C(n + p - 1, p), built incrementally so every partial result is exact.
    std::size_t count = 1;
    for (int j = 1; j <= p; ++j) {
        count = count * static_cast<std::size_t>(n_vars + j - 1) / static_cast<std::size_t>(j);
    }
    return count;
}

std::size_t nonlinear_length(const FeatureSpec& spec) {
    std::size_t total = 0;
    for (int p : spec.degrees()) {
        total += monomial_count(spec.linear_length(), p);
    }
    return total;
}

std::size_t feature_length(const FeatureSpec& spec) {
    return (spec.include_constant() ? 1U : 0U) + static_cast<std::size_t>(spec.linear_length()) +
           nonlinear_length(spec);
}

std::vector<std::vector<int>> monomial_exponent_table(int n_vars, int p) {
    if (n_vars < 1 || p < 1) {
        throw InvalidArgument("monomial table: n_vars and p must be positive");
    }
    std::vector<std::vector<int>> table;
    table.reserve(monomial_count(n_vars, p));
    std::vector<int> current(static_cast<std::size_t>(p), 0);
    while (true) {
        table.push_back(current);
        // Advance to the next non-decreasing tuple: bump the rightmost entry
        // that can grow and reset everything after it to the same value.
        int pos = p - 1;
        while (pos >= 0 && current[static_cast<std::size_t>(pos)] == n_vars - 1) {
            --pos;
        }
        if (pos < 0) {
            break;
        }
        const int next = current[static_cast<std::size_t>(pos)] + 1;
        std::fill(current.begin() + pos, current.end(), next);
    }
    return table;
}

DelayWindow delay_window(const TimeSeries& series, const FeatureSpec& spec, Eigen::Index i) {
    if (series.components() != spec.d()) {
        throw ShapeMismatch("delay window: series has " + std::to_string(series.components()) +
                            " components, spec expects " + std::to_string(spec.d()));
    }
    if (i < spec.first_valid_index()) {
        throw WarmupError("delay window: index " + std::to_string(i) +
                          " precedes the first valid index " +
                          std::to_string(spec.first_valid_index()));
    }
    if (i >= series.samples()) {
        throw InvalidArgument("delay window: index " + std::to_string(i) + " out of range");
    }
    DelayWindow window(spec.k(), spec.d());
    for (int tap = 0; tap < spec.k(); ++tap) {
        window.row(tap) = series.values.row(i - static_cast<Eigen::Index>(tap) * spec.s());
    }
    return window;
}

namespace {

Eigen::VectorXd flatten_window(const DelayWindow& window) {
    // Row-major flattening: all components of the newest tap first.
    Eigen::VectorXd linear(window.size());
    Eigen::Index n = 0;
    for (Eigen::Index tap = 0; tap < window.rows(); ++tap) {
        for (Eigen::Index c = 0; c < window.cols(); ++c) {
            linear(n++) = window(tap, c);
        }
    }
    return linear;
}

}  // namespace

Eigen::VectorXd linear_features(const TimeSeries& series, const FeatureSpec& spec,
                                Eigen::Index i) {
    return flatten_window(delay_window(series, spec, i));
}

Eigen::VectorXd total_features(const DelayWindow& window, const FeatureSpec& spec) {
    if (window.rows() != spec.k() || window.cols() != spec.d()) {
        throw ShapeMismatch("total features: window must be k x d");
    }
    return FeatureMap(spec).evaluate(flatten_window(window));
}

FeatureMap::FeatureMap(FeatureSpec spec) : spec_(std::move(spec)), length_(feature_length(spec_)) {
    const int n = spec_.linear_length();
    tables_.reserve(spec_.degrees().size());
    for (int p : spec_.degrees()) {
        std::vector<int> flat;
        flat.reserve(monomial_count(n, p) * static_cast<std::size_t>(p));
        for (const auto& tuple : monomial_exponent_table(n, p)) {
            flat.insert(flat.end(), tuple.begin(), tuple.end());
        }
        tables_.push_back(std::move(flat));
    }
}

void FeatureMap::evaluate(const Eigen::Ref<const Eigen::VectorXd>& linear,
                          Eigen::Ref<Eigen::VectorXd> out) const {
    const Eigen::Index n = spec_.linear_length();
    if (linear.size() != n || out.size() != static_cast<Eigen::Index>(length_)) {
        throw ShapeMismatch("feature map: wrong linear block or output length");
    }
    Eigen::Index pos = 0;
    if (spec_.include_constant()) {
        out(pos++) = spec_.constant_value();
    }
    out.segment(pos, n) = linear;
    pos += n;
    for (std::size_t b = 0; b < tables_.size(); ++b) {
        const auto p = static_cast<std::size_t>(spec_.degrees()[b]);
        const auto& table = tables_[b];
        for (std::size_t m = 0; m < table.size(); m += p) {
            double product = linear(table[m]);
            for (std::size_t q = 1; q < p; ++q) {
                product *= linear(table[m + q]);
            }
            out(pos++) = product;
        }
    }
}

Eigen::VectorXd FeatureMap::evaluate(const Eigen::Ref<const Eigen::VectorXd>& linear) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(length_));
    evaluate(linear, out);
    return out;
}

Eigen::MatrixXd FeatureMap::jacobian(const Eigen::Ref<const Eigen::VectorXd>& linear) const {
    const Eigen::Index n = spec_.linear_length();
    if (linear.size() != n) {
        throw ShapeMismatch("feature map: wrong linear block length");
    }
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(length_), n);
    Eigen::Index row = spec_.include_constant() ? 1 : 0;
    jac.block(row, 0, n, n).setIdentity();
    row += n;
    for (std::size_t b = 0; b < tables_.size(); ++b) {
        const auto p = static_cast<std::size_t>(spec_.degrees()[b]);
        const auto& table = tables_[b];
        for (std::size_t m = 0; m < table.size(); m += p, ++row) {
            // Product rule: one term per factor position.
            for (std::size_t q = 0; q < p; ++q) {
                double partial = 1.0;
                for (std::size_t r = 0; r < p; ++r) {
                    if (r != q) {
                        partial *= linear(table[m + r]);
                    }
                }
                jac(row, table[m + q]) += partial;
            }
        }
    }
    return jac;
}

Eigen::MatrixXd FeatureMap::feature_block(const TimeSeries& series, Eigen::Index first,
                                          Eigen::Index last) const {
    if (series.components() != spec_.d()) {
        throw ShapeMismatch("feature block: series has " + std::to_string(series.components()) +
                            " components, spec expects " + std::to_string(spec_.d()));
    }
    if (first < spec_.first_valid_index()) {
        throw WarmupError("feature block: index " + std::to_string(first) +
                          " precedes the first valid index " +
                          std::to_string(spec_.first_valid_index()));
    }
    if (last < first || last >= series.samples()) {
        throw InvalidArgument("feature block: bad index range");
    }
    const Eigen::Index n = spec_.linear_length();
    Eigen::MatrixXd block(static_cast<Eigen::Index>(length_), last - first + 1);
    Eigen::VectorXd linear(n);
    for (Eigen::Index i = first; i <= last; ++i) {
        for (int tap = 0; tap < spec_.k(); ++tap) {
            linear.segment(static_cast<Eigen::Index>(tap) * spec_.d(), spec_.d()) =
                series.values.row(i - static_cast<Eigen::Index>(tap) * spec_.s()).transpose();
        }
        evaluate(linear, block.col(i - first));
    }
    return block;
}

std::vector<std::string> FeatureMap::labels(const std::vector<std::string>& names) const {
    const int d = spec_.d();
    std::vector<std::string> linear_names;
    for (int tap = 0; tap < spec_.k(); ++tap) {
        for (int c = 0; c < d; ++c) {
            std::string base = static_cast<std::size_t>(c) < names.size()
                                   ? names[static_cast<std::size_t>(c)]
                                   : "x" + std::to_string(c);
            const int lag = tap * spec_.s();
            linear_names.push_back(base + (lag == 0 ? "(t)" : "(t-" + std::to_string(lag) + ")"));
        }
    }
    std::vector<std::string> out;
    out.reserve(length_);
    if (spec_.include_constant()) {
        out.emplace_back("c");
    }
    out.insert(out.end(), linear_names.begin(), linear_names.end());
    for (std::size_t b = 0; b < tables_.size(); ++b) {
        const auto p = static_cast<std::size_t>(spec_.degrees()[b]);
        const auto& table = tables_[b];
        for (std::size_t m = 0; m < table.size(); m += p) {
            std::string label;
            for (std::size_t q = 0; q < p; ++q) {
                if (q > 0) {
                    label += '*';
                }
                label += linear_names[static_cast<std::size_t>(table[m + q])];
            }
            out.push_back(std::move(label));
        }
    }
    return out;
}

}  // namespace ngrc
