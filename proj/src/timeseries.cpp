#include "ngrc/timeseries.hpp"

#include "ngrc/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ngrc {

TimeSeries::TimeSeries(double dt_, double t0_, Eigen::MatrixXd values_)
    : dt(dt_), t0(t0_), values(std::move(values_)) {
    if (!(dt > 0.0)) {
        throw InvalidArgument("time series: dt must be positive");
    }
}

TimeSeries TimeSeries::slice(Eigen::Index first, Eigen::Index count) const {
    if (first < 0 || count < 0 || first + count > samples()) {
        throw InvalidArgument("time series: slice [" + std::to_string(first) + ", " +
                              std::to_string(first + count) + ") out of range for " +
                              std::to_string(samples()) + " samples");
    }
    return TimeSeries(dt, time(first), values.middleRows(first, count));
}

TimeSeries TimeSeries::select(const std::vector<int>& components) const {
    Eigen::MatrixXd out(samples(), static_cast<Eigen::Index>(components.size()));
    for (std::size_t j = 0; j < components.size(); ++j) {
        const int c = components[j];
        if (c < 0 || c >= this->components()) {
            throw InvalidArgument("time series: component " + std::to_string(c) + " out of range");
        }
        out.col(static_cast<Eigen::Index>(j)) = values.col(c);
    }
    return TimeSeries(dt, t0, std::move(out));
}

Eigen::VectorXd TimeSeries::mean() const {
    if (samples() == 0) {
        throw InsufficientData("time series: mean of empty series");
    }
    return values.colwise().mean().transpose();
}

Eigen::VectorXd TimeSeries::stddev() const {
    const Eigen::VectorXd mu = mean();
    const Eigen::MatrixXd centered = values.rowwise() - mu.transpose();
    return (centered.colwise().squaredNorm().transpose() / static_cast<double>(samples()))
        .cwiseSqrt();
}

std::string format_double(double value) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

double parse_double(const std::string& text) {
    std::size_t start = text.find_first_not_of(" \t\r\n");
    std::size_t stop = text.find_last_not_of(" \t\r\n");
    if (start == std::string::npos) {
        throw FormatError("empty numeric field");
    }
    const char* first = text.data() + start;
    const char* last = text.data() + stop + 1;
    if (*first == '+') {
        ++first;
    }
    double value = 0.0;
    const auto result = std::from_chars(first, last, value);
    if (result.ec != std::errc{} || result.ptr != last) {
        throw FormatError("not a number: '" + text + "'");
    }
    return value;
}

std::string to_csv(const TimeSeries& series, const std::vector<std::string>& names) {
    std::ostringstream out;
    out << 't';
    for (Eigen::Index c = 0; c < series.components(); ++c) {
        out << ',';
        if (static_cast<std::size_t>(c) < names.size()) {
            out << names[static_cast<std::size_t>(c)];
        } else {
            out << 'x' << c;
        }
    }
    out << '\n';
    for (Eigen::Index m = 0; m < series.samples(); ++m) {
        out << format_double(series.time(m));
        for (Eigen::Index c = 0; c < series.components(); ++c) {
            out << ',' << format_double(series.values(m, c));
        }
        out << '\n';
    }
    return out.str();
}

void write_csv(const std::filesystem::path& path, const TimeSeries& series,
               const std::vector<std::string>& names) {
    std::ofstream file(path);
    if (!file) {
        throw FormatError("cannot open " + path.string() + " for writing");
    }
    file << to_csv(series, names);
}

namespace {

std::vector<double> split_numbers(const std::string& line) {
    std::vector<double> fields;
    std::stringstream stream(line);
    std::string field;
    while (std::getline(stream, field, ',')) {
        fields.push_back(parse_double(field));
    }
    return fields;
}

}  // namespace

TimeSeries from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("csv: missing header");
    }
    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") {
            continue;
        }
        auto fields = split_numbers(line);
        if (fields.empty()) {
            throw FormatError("csv: empty row");
        }
        if (!rows.empty() && fields.size() - 1 != rows.front().size()) {
            throw FormatError("csv: ragged row " + std::to_string(rows.size() + 2));
        }
        times.push_back(fields.front());
        rows.emplace_back(fields.begin() + 1, fields.end());
    }
    if (rows.empty()) {
        throw FormatError("csv: no samples");
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t m = 0; m < rows.size(); ++m) {
        for (std::size_t c = 0; c < rows[m].size(); ++c) {
            values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c)) = rows[m][c];
        }
    }
    const double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
    return TimeSeries(dt, times.front(), std::move(values));
}

TimeSeries read_csv(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) {
        throw FormatError("cannot open " + path.string());
    }
    std::stringstream buffer;
    buffer << file.rdbuf();
    return from_csv(buffer.str());
}

}  // namespace ngrc
