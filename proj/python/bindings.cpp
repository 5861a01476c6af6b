#include "ngrc/baseline.hpp"
#include "ngrc/error.hpp"
#include "ngrc/experiment.hpp"
#include "ngrc/features.hpp"
#include "ngrc/model.hpp"
#include "ngrc/regression.hpp"
#include "ngrc/systems.hpp"
#include "ngrc/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace ngrc;

namespace {

IntegrationConfig integration(const Eigen::VectorXd& initial_state, double t_span, double dt,
                              double t_start, double rtol, double atol) {
    IntegrationConfig ic;
    ic.initial_state = initial_state;
    ic.t_span = t_span;
    ic.dt = dt;
    ic.t_start = t_start;
    ic.rtol = rtol;
    ic.atol = atol;
    return ic;
}

py::tuple run_experiment_text(const std::string& text) {
    const ConfigParse parsed = parse_config(text);
    if (!parsed.config) {
        std::string message;
        for (const auto& e : parsed.errors) {
            message += (message.empty() ? "" : "; ") + e;
        }
        throw InvalidArgument(message);
    }
    ExperimentResult result;
    {
        py::gil_scoped_release release;
        result = run_experiment(*parsed.config);
    }
    py::dict artifacts;
    for (const auto& a : result.artifacts) {
        artifacts[py::str(a.name)] = a.content;
    }
    return py::make_tuple(result.summary.dump(), artifacts);
}

}  // namespace

PYBIND11_MODULE(_ngrc, m) {
    m.doc() = "Next-generation reservoir computing core";

    auto base = py::register_exception<Error>(m, "NgrcError", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base);
    py::register_exception<WarmupError>(m, "WarmupError", base);
    py::register_exception<InsufficientData>(m, "InsufficientData", base);
    py::register_exception<ShapeMismatch>(m, "ShapeMismatch", base);
    py::register_exception<SingularSystem>(m, "SingularSystem", base);
    py::register_exception<ModeMismatch>(m, "ModeMismatch", base);
    py::register_exception<IntegrationFailure>(m, "IntegrationFailure", base);
    py::register_exception<NumericalFailure>(m, "NumericalFailure", base);
    py::register_exception<FormatError>(m, "FormatError", base);

    py::class_<TimeSeries>(m, "TimeSeries")
        .def(py::init<double, double, Eigen::MatrixXd>(), py::arg("dt"), py::arg("t0"),
             py::arg("values"))
        .def(py::init([](Eigen::MatrixXd values, double dt, double t0) {
                 return TimeSeries(dt, t0, std::move(values));
             }),
             py::arg("values"), py::arg("dt") = 1.0, py::arg("t0") = 0.0)
        .def_readwrite("dt", &TimeSeries::dt)
        .def_readwrite("t0", &TimeSeries::t0)
        .def_readwrite("values", &TimeSeries::values)
        .def_property_readonly("samples", &TimeSeries::samples)
        .def_property_readonly("components", &TimeSeries::components)
        .def("time", &TimeSeries::time)
        .def("times",
             [](const TimeSeries& s) {
                 Eigen::VectorXd t(s.samples());
                 for (Eigen::Index i = 0; i < t.size(); ++i) {
                     t(i) = s.time(i);
                 }
                 return t;
             })
        .def("slice", &TimeSeries::slice, py::arg("first"), py::arg("count"))
        .def("select", &TimeSeries::select, py::arg("components"))
        .def("mean", &TimeSeries::mean)
        .def("stddev", &TimeSeries::stddev)
        .def("to_csv", [](const TimeSeries& s, const std::vector<std::string>& names) {
            return to_csv(s, names);
        }, py::arg("names") = std::vector<std::string>{})
        .def("__len__", &TimeSeries::samples)
        .def("__repr__", [](const TimeSeries& s) {
            return "<TimeSeries " + std::to_string(s.samples()) + "x" +
                   std::to_string(s.components()) + " dt=" + format_double(s.dt) + ">";
        });
    m.def("from_csv", &from_csv, py::arg("text"));

    py::class_<FeatureSpec>(m, "FeatureSpec")
        .def(py::init<int, int, int, std::vector<int>, bool, double>(), py::arg("d"), py::arg("k"),
             py::arg("s"), py::arg("degrees"), py::arg("include_constant") = true,
             py::arg("constant_value") = 1.0)
        .def_property_readonly("d", &FeatureSpec::d)
        .def_property_readonly("k", &FeatureSpec::k)
        .def_property_readonly("s", &FeatureSpec::s)
        .def_property_readonly("degrees", &FeatureSpec::degrees)
        .def_property_readonly("include_constant", &FeatureSpec::include_constant)
        .def_property_readonly("constant_value", &FeatureSpec::constant_value)
        .def_property_readonly("linear_length", &FeatureSpec::linear_length)
        .def_property_readonly("warmup_samples", &FeatureSpec::warmup_samples)
        .def_property_readonly("is_odd", &FeatureSpec::is_odd)
        .def("__len__", [](const FeatureSpec& s) { return feature_length(s); })
        .def("__eq__", [](const FeatureSpec& a, const FeatureSpec& b) { return a == b; });

    m.def("feature_length", &feature_length, py::arg("spec"));
    m.def("monomial_exponent_table", &monomial_exponent_table, py::arg("n_vars"), py::arg("p"));
    m.def("linear_features", &linear_features, py::arg("series"), py::arg("spec"), py::arg("i"));
    m.def("total_features", &total_features, py::arg("window"), py::arg("spec"),
          "Feature vector of a k x d delay window, most recent sample first.");
    m.def("feature_labels", [](const FeatureSpec& spec, const std::vector<std::string>& names) {
        return FeatureMap(spec).labels(names);
    }, py::arg("spec"), py::arg("names") = std::vector<std::string>{});

    m.def("ridge_fit",
          [](const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets, double alpha) {
              return ridge_fit(TrainingBlock{features, targets}, alpha).weights;
          },
          py::arg("features"), py::arg("targets"), py::arg("alpha"),
          "W minimizing |Y - W O|^2 + alpha |W|^2; columns are samples.");

    py::class_<NgrcModel>(m, "NgrcModel")
        .def_property_readonly("spec", &NgrcModel::spec)
        .def_property_readonly("weights",
                               [](const NgrcModel& model) { return model.readout().weights; })
        .def_property_readonly("alpha", [](const NgrcModel& model) { return model.readout().alpha; })
        .def_property_readonly("mode", [](const NgrcModel& model) { return to_string(model.mode()); })
        .def_property_readonly("input_indices", &NgrcModel::input_indices)
        .def_property_readonly("target_index", &NgrcModel::target_index)
        .def_property_readonly("training_nrmse",
                               [](const NgrcModel& model) { return model.metadata().training_nrmse; })
        .def("apply", &NgrcModel::apply, py::arg("linear"))
        .def("serialize", [](const NgrcModel& model) { return serialize(model); });
    m.def("deserialize", &deserialize, py::arg("text"));

    m.def("train_forecaster", &train_forecaster, py::arg("series"), py::arg("spec"),
          py::arg("alpha"));
    m.def("forecast", &forecast, py::arg("model"), py::arg("warmup"), py::arg("n_steps"),
          py::call_guard<py::gil_scoped_release>());
    m.def("train_inferrer", &train_inferrer, py::arg("series"), py::arg("observed"),
          py::arg("target"), py::arg("spec"), py::arg("alpha"));
    m.def("infer", &infer, py::arg("model"), py::arg("observed"));

    py::class_<SystemDef>(m, "SystemDef")
        .def_readonly("name", &SystemDef::name)
        .def_readonly("dim", &SystemDef::dim)
        .def_readonly("params", &SystemDef::params)
        .def_readonly("lyapunov_time", &SystemDef::lyapunov_time)
        .def_readonly("steady_states", &SystemDef::steady_states)
        .def("rhs", [](const SystemDef& s, const Eigen::VectorXd& x) { return s.rhs(x); });
    m.def("lorenz63", &lorenz63);
    m.def("double_scroll", &double_scroll);
    m.def("make_system", &make_system, py::arg("name"), py::arg("dim"), py::arg("rhs"),
          py::arg("lyapunov_time") = 1.0);

    m.def("integrate",
          [](const SystemDef& system, const Eigen::VectorXd& initial_state, double t_span,
             double dt, double t_start, double rtol, double atol) {
              return integrate(system, integration(initial_state, t_span, dt, t_start, rtol, atol));
          },
          py::arg("system"), py::arg("initial_state"), py::arg("t_span"), py::arg("dt") = 0.025,
          py::arg("t_start") = 0.0, py::arg("rtol") = 1e-8, py::arg("atol") = 1e-10);
    m.def("integrate_noisy",
          [](const SystemDef& system, const Eigen::VectorXd& initial_state, double t_span,
             double dt, std::uint64_t seed, double noise_rms, int substeps) {
              IntegrationConfig ic = integration(initial_state, t_span, dt, 0.0, 1e-8, 1e-10);
              ic.seed = seed;
              ic.noise_rms = noise_rms;
              ic.substeps = substeps;
              return integrate_noisy(system, ic);
          },
          py::arg("system"), py::arg("initial_state"), py::arg("t_span"), py::arg("dt") = 0.025,
          py::arg("seed") = 0, py::arg("noise_rms") = 1.0, py::arg("substeps") = 20);
    m.def("settle", &settle, py::arg("system"), py::arg("state"), py::arg("duration"),
          py::arg("rtol") = 1e-8, py::arg("atol") = 1e-10);

    m.def("nrmse",
          [](const TimeSeries& p, const TimeSeries& t, const Eigen::VectorXd& scale) {
              return nrmse(p, t, ScalingVector(scale));
          },
          py::arg("predicted"), py::arg("truth"), py::arg("scale"));
    m.def("valid_time",
          [](const TimeSeries& p, const TimeSeries& t, const Eigen::VectorXd& scale,
             double threshold, double lyapunov_time) {
              return valid_time(p, t, ScalingVector(scale), threshold, lyapunov_time);
          },
          py::arg("predicted"), py::arg("truth"), py::arg("scale"),
          py::arg("threshold") = kDefaultValidThreshold, py::arg("lyapunov_time") = 1.0);
    m.def("lorenz_uss", py::overload_cast<>(&lorenz_uss));
    m.def("solve_double_scroll_uss", py::overload_cast<>(&solve_double_scroll_uss));
    m.def("estimate_model_uss", &estimate_model_uss, py::arg("model"), py::arg("guesses"));

    py::class_<ReturnMap>(m, "ReturnMap")
        .def_readonly("maxima", &ReturnMap::maxima)
        .def_readonly("times", &ReturnMap::times)
        .def_readonly("points", &ReturnMap::points);
    m.def("extract_return_map", &extract_return_map, py::arg("series"), py::arg("component"),
          py::arg("window") = 1000.0);
    m.def("return_map_deviation", &return_map_deviation, py::arg("predicted"), py::arg("truth"));

    py::class_<baseline::CostParams>(m, "CostParams")
        .def(py::init([](double warmup_steps, double train_steps, double total_features,
                         double nonlinear, double nodes, double density) {
                 return baseline::CostParams{warmup_steps, train_steps, total_features,
                                             nonlinear,    nodes,       density};
             }),
             py::arg("warmup_steps") = 0.0, py::arg("train_steps") = 0.0,
             py::arg("total_features") = 0.0, py::arg("nonlinear") = 0.0,
             py::arg("nodes") = 0.0, py::arg("density") = 0.0);
    m.def("estimate_cost", &baseline::estimate_cost, py::arg("ng"), py::arg("rc"));

    m.def("resolve_config",
          [](const std::string& text) {
              const ConfigParse parsed = parse_config(text);
              return py::make_tuple(parsed.config ? py::object(py::str(resolved_text(*parsed.config)))
                                                  : py::object(py::none()),
                                    parsed.errors);
          },
          py::arg("text"), "(resolved text or None, list of errors)");
    m.def("run_experiment_text", &run_experiment_text, py::arg("text"),
          "(summary JSON, {artifact name: content}) for a config document.");
}
