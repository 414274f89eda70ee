#include "aumcf/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "aumcf/augmentation.hpp"
#include "aumcf/core.hpp"
#include "aumcf/error.hpp"
#include "aumcf/inference.hpp"
#include "aumcf/report.hpp"
#include "aumcf/simulation.hpp"

namespace aumcf {

namespace {

struct Request {
    std::string input;
    double tau = 0.0;
    double alpha = 0.05;
    std::string contrast = "diff";
    std::vector<std::string> covariates;
    std::string weights;
    bool strict_tau = false;
    std::string survival = "left";
    std::string format = "json";
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    std::optional<std::size_t> threads;
    std::optional<double> ridge;
    std::optional<std::size_t> bootstrap;
    std::string config;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_validation("io_error", "cannot open input file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Writes through a sibling temporary file so a failed run leaves nothing behind.
void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".partial";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) fail_validation("io_error", "cannot write output file " + path);
        f << text;
        f.close();
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            fail_validation("io_error", "cannot write output file " + path);
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail_validation("io_error", "cannot write output file " + path);
    }
}

void check_request(const Request& r) {
    if (!(r.tau > 0.0) || !std::isfinite(r.tau)) fail_validation("invalid_tau", "--tau must be a positive number");
    if (!(r.alpha > 0.0 && r.alpha < 1.0)) fail_validation("invalid_alpha", "--alpha must lie in (0, 1)");
}

std::optional<TypeWeights> parse_weights(const std::string& spec) {
    if (spec.empty()) return std::nullopt;
    TypeWeights w;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) fail_validation("invalid_weights", "expected type=weight, got '" + item + "'");
        int type = 0;
        double value = 0.0;
        try {
            std::size_t used = 0;
            type = std::stoi(item.substr(0, eq), &used);
            if (used != eq) throw std::invalid_argument("type");
            const std::string rhs = item.substr(eq + 1);
            value = std::stod(rhs, &used);
            if (used != rhs.size()) throw std::invalid_argument("weight");
        } catch (const std::exception&) {
            fail_validation("invalid_weights", "cannot parse weight '" + item + "'");
        }
        if (!(value > 0.0) || !std::isfinite(value)) {
            fail_validation("invalid_weights", "weight for type " + std::to_string(type) + " must be positive");
        }
        if (!w.emplace(type, value).second) {
            fail_validation("invalid_weights", "duplicate weight for type " + std::to_string(type));
        }
    }
    return w;
}

SurvivalConvention convention_of(const Request& r) {
    return r.survival == "right" ? SurvivalConvention::RightContinuous : SurvivalConvention::LeftLimit;
}

OutputFormat format_of(const Request& r) { return r.format == "csv" ? OutputFormat::Csv : OutputFormat::Json; }

struct Input {
    RecordTable table;
    std::string hash;
};

Input load_input(const Request& r, const std::vector<std::string>& covariates) {
    const std::string bytes = read_file(r.input);
    std::istringstream in(bytes);
    Input data;
    data.table = select_covariates(read_records_csv(in), covariates);
    data.hash = content_hash(bytes);
    return data;
}

Provenance analysis_provenance(const char* command, const Request& r, const Input& data) {
    Provenance p;
    p.command = command;
    p.input_hash = data.hash;
    p.tau = r.tau;
    p.alpha = r.alpha;
    p.convention = to_string(convention_of(r));
    if (!r.weights.empty()) p.extra.emplace_back("weights", r.weights);
    return p;
}

std::string cmd_estimate(const Request& r) {
    check_request(r);
    const auto data = load_input(r, {});
    const EstimatorOptions eo{convention_of(r), parse_weights(r.weights)};
    std::vector<ArmEstimate> rows;
    std::vector<std::string> warnings;
    for (const auto& arm : ingest_arms(data.table.records)) {
        const auto report = validate_truncation(arm, r.tau, r.strict_tau);
        warnings.insert(warnings.end(), report.messages.begin(), report.messages.end());
        rows.push_back(estimate_arm(arm, r.tau, r.alpha, eo));
    }
    return render_estimates(rows, analysis_provenance("estimate", r, data), warnings, format_of(r));
}

std::string cmd_compare(const Request& r) {
    check_request(r);
    const bool ratio = r.contrast == "ratio";
    const auto weights = parse_weights(r.weights);
    if (weights && (ratio || !r.covariates.empty() || r.bootstrap)) {
        fail_validation("unsupported_combination", "--weights cannot be combined with ratio, covariates or bootstrap");
    }
    if (ratio && !r.covariates.empty()) {
        fail_validation("unsupported_combination", "covariate adjustment is available for the difference only");
    }
    const auto data = load_input(r, r.covariates);
    const StudyDataset study = ingest_records(data.table.records, r.tau);
    const auto trunc = validate_truncation(study, r.strict_tau);

    const SurvivalConvention conv = convention_of(r);
    ContrastOptions co;
    co.alpha = r.alpha;
    co.convention = conv;

    std::vector<LabelledContrast> rows;
    std::optional<AugmentationInfo> info;
    if (weights) {
        rows.push_back({"weighted", weighted_contrast(study, *weights, co)});
    } else if (ratio) {
        rows.push_back({"unadjusted", contrast_ratio(study, co)});
    } else if (!r.covariates.empty()) {
        AugmentationOptions ao;
        ao.alpha = r.alpha;
        ao.convention = conv;
        ao.ridge = r.ridge;
        const auto aug = augmented_contrast(study, ao);
        rows.push_back({"unadjusted", aug.unadjusted});
        rows.push_back({"adjusted", aug.adjusted});
        info = AugmentationInfo{r.covariates, aug.beta, aug.relative_efficiency, aug.variance_clamped};
    } else {
        rows.push_back({"unadjusted", contrast_difference(study, co)});
    }

    std::optional<double> boot;
    Provenance prov = analysis_provenance("compare", r, data);
    prov.extra.emplace_back("contrast", ratio ? "ratio" : "difference");
    if (r.bootstrap) {
        const std::uint64_t seed = r.seed.value_or(1);
        boot = bootstrap_se(study, *r.bootstrap, seed, conv, ratio ? ContrastKind::Ratio : ContrastKind::Difference);
        prov.seed = seed;
        prov.extra.emplace_back("bootstrap_resamples", std::to_string(*r.bootstrap));
    }
    return render_contrasts(rows, prov, trunc.messages, info, boot, format_of(r));
}

std::string cmd_curves(const Request& r) {
    check_request(r);
    const auto data = load_input(r, {});
    const EstimatorOptions eo{convention_of(r), parse_weights(r.weights)};
    const auto arms = ingest_arms(data.table.records);
    for (const auto& arm : arms) validate_truncation(arm, r.tau, r.strict_tau);
    Provenance prov = analysis_provenance("curves", r, data);
    prov.alpha.reset();
    return render_curves(arms, r.tau, eo, prov);
}

std::string cmd_simulate(const Request& r) {
    ScenarioConfig config = read_scenario_config_file(r.config);
    if (r.seed) config.seed = *r.seed;
    if (r.reps) config.replicates = *r.reps;
    if (r.threads) config.threads = *r.threads;
    config.validate();
    const auto oc = run_operating_characteristics(config);
    ScenarioConfig hashed = config;
    hashed.threads = 0;  // results do not depend on the thread count
    Provenance p;
    p.command = "simulate";
    p.input_hash = content_hash(format_scenario_config(hashed));
    p.tau = config.tau;
    p.alpha = config.alpha;
    p.convention = to_string(SurvivalConvention::LeftLimit);
    p.seed = config.seed;
    p.extra.emplace_back("scenario", to_string(config.kind));
    p.extra.emplace_back("replicates", std::to_string(config.replicates));
    return render_operating_characteristics(oc, p, format_of(r));
}

void print_error(std::ostream& err, const char* kind, const std::string& code, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = {{"kind", kind}, {"code", code}, {"message", message}};
    err << j.dump() << "\n";
}

void add_analysis_options(CLI::App* cmd, Request& r, bool with_alpha) {
    cmd->add_option("input", r.input, "Event records CSV (id,time,status,arm[,event_type][,covariates...])")
        ->required();
    cmd->add_option("--tau", r.tau, "Truncation time")->required();
    if (with_alpha) cmd->add_option("--alpha", r.alpha, "Two-sided significance level");
    cmd->add_option("--weights", r.weights, "Event-type weights, e.g. 1=1,2=0.5");
    cmd->add_flag("--strict-tau", r.strict_tau, "Fail when tau exceeds the follow-up of an arm");
    cmd->add_option("--survival", r.survival, "Survival curve inside the estimator: left or right limit")
        ->check(CLI::IsMember({"left", "right"}));
    cmd->add_option("--out", r.out, "Output file (default: standard output)");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Request r;
    CLI::App app{"Area under the mean cumulative function for recurrent events with death", "aumcf"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    auto* estimate = app.add_subcommand("estimate", "Per-arm AUMCF with standard errors");
    add_analysis_options(estimate, r, true);
    estimate->add_option("--format", r.format)->check(CLI::IsMember({"json", "csv"}));

    auto* compare = app.add_subcommand("compare", "Two-sample AUMCF contrast");
    add_analysis_options(compare, r, true);
    compare->add_option("--format", r.format)->check(CLI::IsMember({"json", "csv"}));
    compare->add_option("--contrast", r.contrast, "diff or ratio")->check(CLI::IsMember({"diff", "ratio"}));
    compare->add_option("--covariates", r.covariates, "Covariate columns for augmentation")->delimiter(',');
    compare->add_option("--ridge", r.ridge, "Relative ridge added to the covariate covariance");
    compare->add_option("--bootstrap", r.bootstrap, "Also report a bootstrap se from this many resamples");
    compare->add_option("--seed", r.seed, "Bootstrap seed");

    auto* curves = app.add_subcommand("curves", "MCF and Kaplan-Meier curves as long-format CSV");
    add_analysis_options(curves, r, false);

    auto* simulate = app.add_subcommand("simulate", "Operating characteristics of a simulation scenario");
    simulate->add_option("--config,config", r.config, "Scenario config file (key = value)")->required();
    simulate->add_option("--seed", r.seed, "Override the master seed");
    simulate->add_option("--reps", r.reps, "Override the number of replicates");
    simulate->add_option("--threads", r.threads, "Worker threads (0 = all cores)");
    simulate->add_option("--format", r.format)->check(CLI::IsMember({"json", "csv"}));
    simulate->add_option("--out", r.out, "Output file (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        print_error(err, "usage", "invalid_arguments", e.what());
        return exit_code(ErrorKind::Validation);
    }

    try {
        std::string text;
        if (estimate->parsed()) text = cmd_estimate(r);
        else if (compare->parsed()) text = cmd_compare(r);
        else if (curves->parsed()) text = cmd_curves(r);
        else text = cmd_simulate(r);
        write_output(r.out, text, out);
        return 0;
    } catch (const Error& e) {
        print_error(err, to_string(e.kind()), e.code(), e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        print_error(err, "internal", "internal_error", e.what());
        return 1;
    }
}

}  // namespace aumcf
