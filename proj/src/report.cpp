#include "aumcf/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "json.hpp"

#ifndef AUMCF_VERSION
#define AUMCF_VERSION "0.0.0"
#endif

namespace aumcf {

using nlohmann::ordered_json;

namespace {

ordered_json provenance_json(const Provenance& p) {
    ordered_json j;
    j["tool"] = "aumcf";
    j["version"] = version_string();
    j["command"] = p.command;
    if (!p.input_hash.empty()) j["input_hash"] = p.input_hash;
    if (p.tau) j["tau"] = *p.tau;
    if (p.alpha) j["alpha"] = *p.alpha;
    if (p.convention) j["survival_convention"] = *p.convention;
    if (p.seed) j["seed"] = *p.seed;
    for (const auto& [k, v] : p.extra) j[k] = v;
    return j;
}

void provenance_csv(std::ostream& out, const Provenance& p, const std::vector<std::string>& warnings) {
    out << "# tool=aumcf\n# version=" << version_string() << "\n# command=" << p.command << "\n";
    if (!p.input_hash.empty()) out << "# input_hash=" << p.input_hash << "\n";
    if (p.tau) out << "# tau=" << format_number(*p.tau) << "\n";
    if (p.alpha) out << "# alpha=" << format_number(*p.alpha) << "\n";
    if (p.convention) out << "# survival_convention=" << *p.convention << "\n";
    if (p.seed) out << "# seed=" << *p.seed << "\n";
    for (const auto& [k, v] : p.extra) out << "# " << k << "=" << v << "\n";
    for (const auto& w : warnings) out << "# warning=" << w << "\n";
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json contrast_json(const std::string& method, const ContrastResult& r) {
    ordered_json j;
    j["method"] = method;
    j["kind"] = to_string(r.kind);
    j["tau"] = r.tau;
    j["theta1"] = r.theta1;
    j["se1"] = r.se1;
    j["theta2"] = r.theta2;
    j["se2"] = r.se2;
    j["point"] = r.point;
    j["se"] = r.se;
    j["ci_lower"] = r.ci_lower;
    j["ci_upper"] = r.ci_upper;
    j["p_value"] = r.p_value;
    j["n1"] = r.n1;
    j["n2"] = r.n2;
    j["alpha"] = r.alpha;
    if (r.kind == ContrastKind::Ratio) j["log_se"] = r.log_se;
    j["degenerate"] = r.degenerate;
    j["notes"] = r.notes;
    return j;
}

void contrast_csv_row(std::ostream& out, const std::string& method, const ContrastResult& r) {
    out << method << ',' << to_string(r.kind) << ',' << format_number(r.tau) << ',' << format_number(r.theta1) << ','
        << format_number(r.se1) << ',' << format_number(r.theta2) << ',' << format_number(r.se2) << ','
        << format_number(r.point) << ',' << format_number(r.se) << ',' << format_number(r.ci_lower) << ','
        << format_number(r.ci_upper) << ',' << format_number(r.p_value) << ',' << r.n1 << ',' << r.n2 << ','
        << format_number(r.alpha) << ',' << (r.degenerate ? "true" : "false") << '\n';
}

}  // namespace

std::string version_string() { return AUMCF_VERSION; }

std::string content_hash(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out = "fnv1a64:";
    for (int shift = 60; shift >= 0; shift -= 4) out.push_back(digits[(h >> shift) & 0xF]);
    return out;
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::vector<std::string> contrast_field_names() {
    return {"kind", "tau", "theta1", "se1", "theta2", "se2", "point", "se", "ci_lower", "ci_upper", "p_value",
            "n1", "n2", "alpha"};
}

ArmEstimate estimate_arm(const ArmDataset& arm, double tau, double alpha, const EstimatorOptions& options) {
    const auto summary = summarize_arm(arm, options);
    ArmEstimate e;
    e.arm = arm.label();
    e.n = arm.size();
    e.tau = tau;
    e.theta = aumcf(summary, tau);
    e.se = std::sqrt(arm_variance(influence_values(arm, summary, tau)) / static_cast<double>(e.n));
    const double z = normal_quantile(1.0 - alpha / 2.0);
    e.ci_lower = e.theta - z * e.se;
    e.ci_upper = e.theta + z * e.se;
    return e;
}

std::string render_estimates(const std::vector<ArmEstimate>& arms, const Provenance& prov,
                             const std::vector<std::string>& warnings, OutputFormat format) {
    if (format == OutputFormat::Json) {
        ordered_json j;
        j["provenance"] = provenance_json(prov);
        j["warnings"] = warnings;
        ordered_json rows = ordered_json::array();
        for (const auto& a : arms) {
            rows.push_back({{"arm", a.arm},
                            {"n", a.n},
                            {"tau", a.tau},
                            {"theta", a.theta},
                            {"se", a.se},
                            {"ci_lower", a.ci_lower},
                            {"ci_upper", a.ci_upper}});
        }
        j["estimates"] = rows;
        return dump(j);
    }
    std::ostringstream out;
    provenance_csv(out, prov, warnings);
    out << "arm,n,tau,theta,se,ci_lower,ci_upper\n";
    for (const auto& a : arms) {
        out << a.arm << ',' << a.n << ',' << format_number(a.tau) << ',' << format_number(a.theta) << ','
            << format_number(a.se) << ',' << format_number(a.ci_lower) << ',' << format_number(a.ci_upper) << '\n';
    }
    return out.str();
}

std::string render_contrasts(const std::vector<LabelledContrast>& rows, const Provenance& prov,
                             const std::vector<std::string>& warnings, const std::optional<AugmentationInfo>& aug,
                             std::optional<double> bootstrap_se, OutputFormat format) {
    if (format == OutputFormat::Json) {
        ordered_json j;
        j["provenance"] = provenance_json(prov);
        j["warnings"] = warnings;
        ordered_json results = ordered_json::array();
        for (const auto& r : rows) results.push_back(contrast_json(r.method, r.result));
        j["results"] = results;
        if (aug) {
            j["augmentation"] = {{"covariates", aug->covariates},
                                 {"beta_hat", aug->beta},
                                 {"relative_efficiency", aug->relative_efficiency},
                                 {"variance_clamped", aug->variance_clamped}};
        }
        if (bootstrap_se) j["bootstrap_se"] = *bootstrap_se;
        return dump(j);
    }
    std::ostringstream out;
    provenance_csv(out, prov, warnings);
    if (aug) {
        std::string names, betas;
        for (std::size_t k = 0; k < aug->covariates.size(); ++k) {
            names += (k ? ";" : "") + aug->covariates[k];
            betas += (k ? ";" : "") + format_number(aug->beta[k]);
        }
        out << "# covariates=" << names << "\n# beta_hat=" << betas
            << "\n# relative_efficiency=" << format_number(aug->relative_efficiency) << "\n";
    }
    if (bootstrap_se) out << "# bootstrap_se=" << format_number(*bootstrap_se) << "\n";
    out << "method";
    for (const auto& f : contrast_field_names()) out << ',' << f;
    out << ",degenerate\n";
    for (const auto& r : rows) contrast_csv_row(out, r.method, r.result);
    return out.str();
}

std::string render_curves(const std::vector<ArmDataset>& arms, double tau, const EstimatorOptions& options,
                          const Provenance& prov) {
    std::ostringstream out;
    provenance_csv(out, prov, {});
    out << "arm,curve,time,value\n";
    auto emit = [&](int arm, const char* name, const StepFunction& f) {
        out << arm << ',' << name << ",0," << format_number(f(0.0)) << '\n';
        double last = 0.0;
        for (std::size_t k = 0; k < f.jump_times().size(); ++k) {
            const double t = f.jump_times()[k];
            if (t <= 0.0) continue;
            if (t > tau) break;
            out << arm << ',' << name << ',' << format_number(t) << ',' << format_number(f.values()[k]) << '\n';
            last = t;
        }
        if (last < tau) out << arm << ',' << name << ',' << format_number(tau) << ',' << format_number(f(tau)) << '\n';
    };
    for (const auto& arm : arms) {
        emit(arm.label(), "mcf", mcf(arm, options));
        emit(arm.label(), "km", km_survival(arm));
    }
    return out.str();
}

std::string render_operating_characteristics(const OperatingCharacteristics& oc, const Provenance& prov,
                                             OutputFormat format) {
    struct Metric {
        const char* name;
        double value;
        double mcse;
    };
    auto metrics = [](const MethodSummary& s) {
        return std::vector<Metric>{{"mean_point", s.mean_point, s.mcse_bias}, {"bias", s.bias, s.mcse_bias},
                                   {"ese", s.ese, s.mcse_ese},                {"ase", s.ase, s.mcse_ase},
                                   {"rejection_rate", s.rejection_rate, s.mcse_rejection},
                                   {"coverage", s.coverage, s.mcse_coverage}};
    };
    if (format == OutputFormat::Json) {
        ordered_json j;
        j["provenance"] = provenance_json(prov);
        j["config"] = format_scenario_config(oc.config);
        j["truth"] = {{"theta1", oc.truth.theta1},
                      {"theta2", oc.truth.theta2},
                      {"delta", oc.truth.delta},
                      {"mcse", oc.truth.mcse},
                      {"source", oc.truth.source}};
        ordered_json rows = ordered_json::array();
        for (const auto& s : oc.rows) {
            ordered_json r;
            r["method"] = to_string(s.method);
            r["replicates"] = s.replicates;
            for (const auto& m : metrics(s)) r[m.name] = {{"value", m.value}, {"mcse", m.mcse}};
            rows.push_back(r);
        }
        j["results"] = rows;
        return dump(j);
    }
    std::ostringstream out;
    provenance_csv(out, prov, {});
    out << "# truth_delta=" << format_number(oc.truth.delta) << "\n# truth_source=" << oc.truth.source << "\n";
    out << "method,metric,value,mcse,replicates\n";
    for (const auto& s : oc.rows) {
        for (const auto& m : metrics(s)) {
            out << to_string(s.method) << ',' << m.name << ',' << format_number(m.value) << ','
                << format_number(m.mcse) << ',' << s.replicates << '\n';
        }
    }
    return out.str();
}

}  // namespace aumcf
