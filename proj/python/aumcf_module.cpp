#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aumcf/augmentation.hpp"
#include "aumcf/cli.hpp"
#include "aumcf/core.hpp"
#include "aumcf/error.hpp"
#include "aumcf/estimation.hpp"
#include "aumcf/inference.hpp"
#include "aumcf/report.hpp"
#include "aumcf/simulation.hpp"

namespace py = pybind11;
using namespace aumcf;

namespace {

SurvivalConvention convention_of(const std::string& name) {
    if (name == "left") return SurvivalConvention::LeftLimit;
    if (name == "right") return SurvivalConvention::RightContinuous;
    throw Error(ErrorKind::Validation, "invalid_survival", "survival must be 'left' or 'right'");
}

EstimatorOptions estimator_options(const std::string& survival, const std::optional<TypeWeights>& weights) {
    return EstimatorOptions{convention_of(survival), weights};
}

py::dict contrast_dict(const ContrastResult& r) {
    py::dict d;
    d["kind"] = to_string(r.kind);
    d["tau"] = r.tau;
    d["alpha"] = r.alpha;
    d["theta1"] = r.theta1;
    d["se1"] = r.se1;
    d["theta2"] = r.theta2;
    d["se2"] = r.se2;
    d["point"] = r.point;
    d["se"] = r.se;
    d["ci_lower"] = r.ci_lower;
    d["ci_upper"] = r.ci_upper;
    d["p_value"] = r.p_value;
    d["n1"] = r.n1;
    d["n2"] = r.n2;
    if (r.kind == ContrastKind::Ratio) d["log_se"] = r.log_se;
    d["degenerate"] = r.degenerate;
    d["notes"] = r.notes;
    return d;
}

py::dict summary_dict(const MethodSummary& s) {
    py::dict d;
    d["method"] = to_string(s.method);
    d["replicates"] = s.replicates;
    d["mean_point"] = s.mean_point;
    d["bias"] = s.bias;
    d["ese"] = s.ese;
    d["ase"] = s.ase;
    d["rejection_rate"] = s.rejection_rate;
    d["coverage"] = s.coverage;
    d["mcse_bias"] = s.mcse_bias;
    d["mcse_ese"] = s.mcse_ese;
    d["mcse_ase"] = s.mcse_ase;
    d["mcse_rejection"] = s.mcse_rejection;
    d["mcse_coverage"] = s.mcse_coverage;
    return d;
}

py::dict truth_dict(const TrueValues& t) {
    py::dict d;
    d["theta1"] = t.theta1;
    d["theta2"] = t.theta2;
    d["delta"] = t.delta;
    d["mcse"] = t.mcse;
    d["source"] = t.source;
    return d;
}

ScenarioConfig config_from_text(const std::string& text) {
    std::istringstream in(text);
    auto c = parse_scenario_config(in, "<python>");
    c.validate();
    return c;
}

StudyDataset from_records(const std::vector<std::string>& ids, const std::vector<double>& times,
                          const std::vector<int>& statuses, const std::vector<int>& arms, double tau,
                          const std::optional<std::vector<std::optional<int>>>& event_types,
                          const std::optional<std::vector<std::vector<double>>>& covariates) {
    const std::size_t n = ids.size();
    auto same = [n](std::size_t m) { return m == n; };
    if (!same(times.size()) || !same(statuses.size()) || !same(arms.size()) ||
        (event_types && !same(event_types->size())) || (covariates && !same(covariates->size()))) {
        throw Error(ErrorKind::Validation, "length_mismatch", "record columns must have the same length");
    }
    std::vector<EventRecord> records(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& r = records[i];
        r.subject_id = ids[i];
        r.time = times[i];
        if (statuses[i] < 0 || statuses[i] > 2) {
            throw Error(ErrorKind::Validation, "unknown_status", "status must be 0, 1 or 2");
        }
        r.status = static_cast<Status>(statuses[i]);
        r.arm = arms[i];
        if (event_types) r.event_type = (*event_types)[i];
        if (covariates) r.covariates = (*covariates)[i];
    }
    return ingest_records(records, tau);
}

py::tuple step_tuple(const StepFunction& f) {
    std::vector<double> times{0.0};
    std::vector<double> values{f.initial_value()};
    for (std::size_t k = 0; k < f.jump_times().size(); ++k) {
        if (f.jump_times()[k] == 0.0) {
            values[0] = f.values()[k];
            continue;
        }
        times.push_back(f.jump_times()[k]);
        values.push_back(f.values()[k]);
    }
    return py::make_tuple(times, values);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "AUMCF estimation, inference, covariate augmentation and simulation";
    m.attr("__version__") = version_string();

    static py::handle error_type = py::exception<Error>(m, "AumcfError", PyExc_ValueError).release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = error_type(e.what());
            exc.attr("kind") = to_string(e.kind());
            exc.attr("code") = e.code();
            py::set_error(error_type, exc);
        }
    });

    py::class_<ArmDataset>(m, "ArmDataset")
        .def_property_readonly("label", &ArmDataset::label)
        .def_property_readonly("covariate_dim", &ArmDataset::covariate_dim)
        .def_property_readonly("max_follow_up", &ArmDataset::max_follow_up)
        .def("__len__", &ArmDataset::size)
        .def("__repr__", [](const ArmDataset& a) {
            return "<ArmDataset arm=" + std::to_string(a.label()) + " n=" + std::to_string(a.size()) + ">";
        });

    py::class_<StudyDataset>(m, "StudyDataset")
        .def_property_readonly("arm1", &StudyDataset::arm1)
        .def_property_readonly("arm2", &StudyDataset::arm2)
        .def_property_readonly("tau", &StudyDataset::tau)
        .def_property_readonly("n", &StudyDataset::n)
        .def("__eq__", [](const StudyDataset& a, const StudyDataset& b) { return a == b; })
        .def("__repr__", [](const StudyDataset& s) {
            return "<StudyDataset n1=" + std::to_string(s.arm1().size()) + " n2=" + std::to_string(s.arm2().size()) +
                   " tau=" + format_number(s.tau()) + ">";
        });

    m.def(
        "read_csv",
        [](const std::string& path, double tau, const std::vector<std::string>& covariates) {
            return ingest_records(select_covariates(read_records_csv_file(path), covariates).records, tau);
        },
        py::arg("path"), py::arg("tau"), py::arg("covariates") = std::vector<std::string>{},
        "Reads an event-record CSV (id,time,status,arm[,event_type][,covariates...]) into a two-arm study.");

    m.def("from_records", &from_records, py::arg("ids"), py::arg("times"), py::arg("statuses"), py::arg("arms"),
          py::arg("tau"), py::arg("event_types") = py::none(), py::arg("covariates") = py::none(),
          "Builds a study from parallel record columns. Status: 0 censor, 1 event, 2 death.");

    m.def(
        "aumcf",
        [](const ArmDataset& arm, double tau, const std::string& survival, const std::optional<TypeWeights>& w) {
            return aumcf::aumcf(arm, tau, estimator_options(survival, w));
        },
        py::arg("arm"), py::arg("tau"), py::arg("survival") = "left", py::arg("weights") = py::none());

    m.def(
        "estimate",
        [](const ArmDataset& arm, double tau, double alpha, const std::string& survival,
           const std::optional<TypeWeights>& w) {
            const auto e = estimate_arm(arm, tau, alpha, estimator_options(survival, w));
            py::dict d;
            d["arm"] = e.arm;
            d["n"] = e.n;
            d["tau"] = e.tau;
            d["theta"] = e.theta;
            d["se"] = e.se;
            d["ci_lower"] = e.ci_lower;
            d["ci_upper"] = e.ci_upper;
            return d;
        },
        py::arg("arm"), py::arg("tau"), py::arg("alpha") = 0.05, py::arg("survival") = "left",
        py::arg("weights") = py::none());

    m.def(
        "mcf",
        [](const ArmDataset& arm, const std::string& survival) {
            return step_tuple(mcf(arm, estimator_options(survival, std::nullopt)));
        },
        py::arg("arm"), py::arg("survival") = "left", "MCF as (times, values), starting at t = 0.");
    m.def(
        "km", [](const ArmDataset& arm) { return step_tuple(km_survival(arm)); }, py::arg("arm"),
        "Kaplan-Meier curve of the terminal event as (times, values).");
    m.def("rmst", &rmst, py::arg("arm"), py::arg("tau"));
    m.def(
        "time_lost",
        [](double follow_up, bool terminal, const std::vector<double>& event_times, double tau) {
            SubjectHistory s;
            s.id = "subject";
            s.follow_up = follow_up;
            s.terminal = terminal;
            for (double t : event_times) s.events.push_back({t, std::nullopt});
            return time_lost_per_subject(s, tau);
        },
        py::arg("follow_up"), py::arg("terminal"), py::arg("event_times"), py::arg("tau"),
        "Per-subject time lost, the sum of (tau - t) over events at or before tau.");
    m.def(
        "influence_values",
        [](const ArmDataset& arm, double tau, const std::string& survival) {
            return influence_values(arm, tau, estimator_options(survival, std::nullopt)).values;
        },
        py::arg("arm"), py::arg("tau"), py::arg("survival") = "left");

    m.def(
        "compare",
        [](const StudyDataset& study, const std::string& contrast, double alpha, const std::string& survival) {
            ContrastOptions o;
            o.alpha = alpha;
            o.convention = convention_of(survival);
            if (contrast == "diff") return contrast_dict(contrast_difference(study, o));
            if (contrast == "ratio") return contrast_dict(contrast_ratio(study, o));
            throw Error(ErrorKind::Validation, "invalid_contrast", "contrast must be 'diff' or 'ratio'");
        },
        py::arg("study"), py::arg("contrast") = "diff", py::arg("alpha") = 0.05, py::arg("survival") = "left");

    m.def(
        "weighted_compare",
        [](const StudyDataset& study, const TypeWeights& weights, double alpha, const std::string& survival) {
            ContrastOptions o;
            o.alpha = alpha;
            o.convention = convention_of(survival);
            return contrast_dict(weighted_contrast(study, weights, o));
        },
        py::arg("study"), py::arg("weights"), py::arg("alpha") = 0.05, py::arg("survival") = "left");

    m.def(
        "augmented_compare",
        [](const StudyDataset& study, double alpha, const std::string& survival, std::optional<double> ridge) {
            AugmentationOptions o;
            o.alpha = alpha;
            o.convention = convention_of(survival);
            o.ridge = ridge;
            const auto r = augmented_contrast(study, o);
            py::dict d;
            d["unadjusted"] = contrast_dict(r.unadjusted);
            d["adjusted"] = contrast_dict(r.adjusted);
            d["beta"] = r.beta;
            d["relative_efficiency"] = r.relative_efficiency;
            d["variance_clamped"] = r.variance_clamped;
            return d;
        },
        py::arg("study"), py::arg("alpha") = 0.05, py::arg("survival") = "left", py::arg("ridge") = py::none());

    m.def(
        "bootstrap_se",
        [](const StudyDataset& study, std::size_t resamples, std::uint64_t seed, const std::string& contrast) {
            if (contrast != "diff" && contrast != "ratio") {
                throw Error(ErrorKind::Validation, "invalid_contrast", "contrast must be 'diff' or 'ratio'");
            }
            return bootstrap_se(study, resamples, seed, SurvivalConvention::LeftLimit,
                                contrast == "ratio" ? ContrastKind::Ratio : ContrastKind::Difference);
        },
        py::arg("study"), py::arg("resamples"), py::arg("seed"), py::arg("contrast") = "diff");

    m.def(
        "generate_dataset",
        [](const std::string& config, std::uint64_t replicate) {
            return generate_dataset(config_from_text(config), replicate);
        },
        py::arg("config"), py::arg("replicate") = 0, "One simulated study from a key = value scenario config.");

    m.def(
        "true_values", [](const std::string& config) { return truth_dict(resolve_truth(config_from_text(config))); },
        py::arg("config"));

    m.def(
        "simulate",
        [](const std::string& config, std::optional<std::size_t> replicates, std::optional<std::uint64_t> seed,
           std::size_t threads) {
            auto c = config_from_text(config);
            if (replicates) c.replicates = *replicates;
            if (seed) c.seed = *seed;
            c.threads = threads;
            c.validate();
            OperatingCharacteristics oc;
            {
                py::gil_scoped_release release;
                oc = run_operating_characteristics(c);
            }
            py::dict d;
            d["truth"] = truth_dict(oc.truth);
            py::list rows;
            for (const auto& r : oc.rows) rows.append(summary_dict(r));
            d["results"] = rows;
            return d;
        },
        py::arg("config"), py::arg("replicates") = py::none(), py::arg("seed") = py::none(), py::arg("threads") = 0,
        "Operating characteristics of a scenario config.");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"aumcf"};
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in process; returns (exit_code, stdout, stderr).");
}
