// ngrc: run, validate and summarize NG-RC experiments from config files.

#include "ngrc/error.hpp"
#include "ngrc/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using json = nlohmann::ordered_json;

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

std::string fmt(const json& v) {
    if (v.is_null()) {
        return "n/a";
    }
    if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v.get<double>());
        return buf;
    }
    return v.dump();
}

void print_stats(std::ostream& out, const std::string& label, const json& s) {
    if (s.is_null()) {
        return;
    }
    out << "  " << label << ": median " << fmt(s["median"]) << ", mean " << fmt(s["mean"])
        << " +- " << fmt(s["stddev"]) << ", range [" << fmt(s["min"]) << ", " << fmt(s["max"])
        << "]";
    if (s.value("nonfinite", 0) > 0) {
        out << ", " << s["nonfinite"].get<int>() << " non-finite";
    }
    out << '\n';
}

void print_report(std::ostream& out, const json& summary) {
    const std::string task = summary.value("task", "?");
    out << "task " << task;
    if (summary.contains("system")) {
        out << " (" << summary["system"].get<std::string>() << ", dt " << fmt(summary["dt"])
            << ", Lyapunov time " << fmt(summary["lyapunov_time"]) << ")";
    }
    out << '\n';
    if (summary.contains("readout_shape")) {
        const auto& shape = summary["readout_shape"];
        out << "  readout " << shape[0].get<int>() << "x" << shape[1].get<int>() << '\n';
    }
    if (summary.contains("segments") && summary["segments"].is_array()) {
        out << "  segments " << summary["segments"].size() << '\n';
    }
    if (summary.contains("valid_time")) {
        if (summary["valid_time"].is_object()) {
            print_stats(out, "valid time [Lyapunov times]", summary["valid_time"]);
        } else {
            out << "  valid time [Lyapunov times]: " << fmt(summary["valid_time"]) << '\n';
        }
    }
    if (summary.contains("training_nrmse")) {
        if (summary["training_nrmse"].is_object()) {
            print_stats(out, "training NRMSE", summary["training_nrmse"]);
        } else {
            out << "  training NRMSE: " << fmt(summary["training_nrmse"]) << '\n';
        }
    }
    if (summary.contains("testing_nrmse")) {
        if (summary["testing_nrmse"].is_object()) {
            print_stats(out, "testing NRMSE", summary["testing_nrmse"]);
        } else {
            out << "  testing NRMSE: " << fmt(summary["testing_nrmse"]) << '\n';
        }
    }
    if (summary.contains("ratio")) {
        print_stats(out, "testing/training NRMSE", summary["ratio"]);
    }
    if (summary.contains("uss")) {
        int j = 0;
        for (const auto& e : summary["uss"]) {
            out << "  steady state " << j++ << " " << e["truth"].dump()
                << ": scaled distance median " << fmt(e["median_distance"]) << ", mean "
                << fmt(e["mean_distance"]) << " +- " << fmt(e["stddev_distance"]) << ", max "
                << fmt(e["max_distance"]) << " (" << e["converged"].get<int>() << "/"
                << e["repeats"].get<int>() << " converged)\n";
        }
    }
    if (summary.contains("origin_map_residual") && summary["system"] == "double-scroll") {
        out << "  learned map at the origin: max |W O(0)| = "
            << fmt(summary["origin_map_residual"]["max"]) << '\n';
    }
    if (summary.contains("return_map")) {
        const auto& m = summary["return_map"];
        out << "  return map of " << m["component"].get<std::string>() << " over "
            << fmt(m["window"]) << " time units: median deviation " << fmt(m["relative_deviation"])
            << " of the true maxima range, " << m["diverged"].get<int>()
            << " free runs diverged\n";
    }
    if (summary.contains("sizes")) {
        out << "  train_points  mean NRMSE  stddev      median      diverged\n";
        for (const auto& row : summary["sizes"]) {
            char line[128];
            std::snprintf(line, sizeof line, "  %12d  %-10s  %-10s  %-10s  %d\n",
                          row["train_points"].get<int>(), fmt(row["mean_nrmse"]).c_str(),
                          fmt(row["stddev_nrmse"]).c_str(), fmt(row["median_nrmse"]).c_str(),
                          row["diverged"].get<int>());
            out << line;
        }
    }
    if (summary.contains("scaled_rmse")) {
        print_stats(out, "scaled RMSE vs noise-free", summary["scaled_rmse"]);
        print_stats(out, "RMSE vs noise-free", summary["rmse"]);
    }
    if (summary.contains("rows")) {
        for (const auto& row : summary["rows"]) {
            out << "  " << row["system"].get<std::string>() << " vs "
                << row["baseline"].get<std::string>() << ": speedup " << fmt(row["speedup"])
                << " (quoted " << row["quoted_speedup"].get<std::string>() << ")\n";
        }
    }
    if (summary.contains("estimated_speedup_of_ngrc")) {
        out << "  estimated NG-RC speedup over this reservoir: "
            << fmt(summary["estimated_speedup_of_ngrc"]) << '\n';
    }
}

std::optional<ngrc::ExperimentConfig> load(const std::string& path,
                                           std::optional<std::uint64_t> seed,
                                           const std::string& out) {
    auto parsed = ngrc::load_config(path);
    if (!parsed.config) {
        for (const auto& e : parsed.errors) {
            std::cerr << "ngrc: " << path << ": " << e << '\n';
        }
        return std::nullopt;
    }
    if (seed) {
        parsed.config->seed = *seed;
    }
    if (!out.empty()) {
        parsed.config->out = out;
    }
    return parsed.config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Next-generation reservoir computing experiments"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::string out;
    bool quiet = false;
    app.add_option("--seed", seed, "Override the config seed");
    app.add_option("--out", out, "Override the output directory");
    app.add_flag("--quiet", quiet, "Print nothing on success");

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run an experiment and write its outputs");
    run->add_option("config", config_path, "Experiment config file")->required();
    run->fallthrough();
    auto* check = app.add_subcommand("validate", "Check a config and print it fully resolved");
    check->add_option("config", config_path, "Experiment config file")->required();
    check->fallthrough();
    std::string report_dir;
    auto* report = app.add_subcommand("report", "Summarize a finished run");
    report->add_option("dir", report_dir, "Output directory of a run")->required();
    report->fallthrough();

    CLI11_PARSE(app, argc, argv);

    if (*check) {
        const auto config = load(config_path, seed, out);
        if (!config) {
            return kConfigError;
        }
        if (!quiet) {
            std::cout << ngrc::resolved_text(*config);
        }
        return 0;
    }

    if (*report) {
        std::ifstream in(std::filesystem::path(report_dir) / "summary.json");
        if (!in) {
            std::cerr << "ngrc: no summary.json in '" << report_dir << "'\n";
            return 1;
        }
        json summary;
        try {
            summary = json::parse(in);
        } catch (const json::exception& e) {
            std::cerr << "ngrc: " << report_dir << "/summary.json: " << e.what() << '\n';
            return 1;
        }
        print_report(std::cout, summary);
        return 0;
    }

    const auto config = load(config_path, seed, out);
    if (!config) {
        return kConfigError;
    }
    const std::string task = ngrc::to_string(config->task);
    try {
        const auto result = ngrc::run_experiment(*config);
        ngrc::write_result(result, config->out);
        if (!quiet) {
            print_report(std::cout, result.summary);
            std::cout << "  outputs in " << config->out.string() << '\n';
        }
    } catch (const ngrc::NumericalFailure& e) {
        std::cerr << "ngrc: " << task << ": numerical failure: " << e.what() << '\n';
        return kNumericalError;
    } catch (const ngrc::IntegrationFailure& e) {
        std::cerr << "ngrc: " << task << ": integration failed: " << e.what() << '\n';
        return kNumericalError;
    } catch (const ngrc::SingularSystem& e) {
        std::cerr << "ngrc: " << task << ": regression failed: " << e.what() << '\n';
        return kNumericalError;
    } catch (const ngrc::InsufficientData& e) {
        std::cerr << "ngrc: " << task << ": " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "ngrc: " << task << ": " << e.what() << '\n';
        return 1;
    }
    return 0;
}
