#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "aumcf/error.hpp"
#include "aumcf/simulation.hpp"

namespace aumcf {

const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::ICR: return "icr";
        case ScenarioKind::Frailty: return "frailty";
        case ScenarioKind::TimeVarying: return "time_varying";
    }
    return "?";
}

const char* to_string(CovariateMode m) {
    switch (m) {
        case CovariateMode::None: return "none";
        case CovariateMode::Uninformative: return "uninformative";
        case CovariateMode::Informative: return "informative";
    }
    return "?";
}

const char* to_string(Method m) { return m == Method::Unadjusted ? "unadjusted" : "adjusted"; }

const char* to_string(TruthMode m) {
    switch (m) {
        case TruthMode::Auto: return "auto";
        case TruthMode::Analytic: return "analytic";
        case TruthMode::Oracle: return "oracle";
        case TruthMode::NullReference: return "null_reference";
    }
    return "?";
}

const char* to_string(Orientation o) {
    return o == Orientation::Arm1MinusArm2 ? "arm1_minus_arm2" : "arm2_minus_arm1";
}

namespace {

class FieldError : public Error {
public:
    FieldError(std::string field, const std::string& message)
        : Error(ErrorKind::Config, "invalid_field", "field '" + field + "': " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

[[noreturn]] void field_fail(const std::string& field, const std::string& message) {
    throw FieldError(field, message);
}

void require_rate(const std::string& field, double v) {
    if (!std::isfinite(v) || v < 0.0) field_fail(field, "must be finite and nonnegative");
}

std::string normalize(std::string s) {
    std::string out;
    for (char c : s) {
        if (c == '_' || c == '-' || c == ' ') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& field, const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) field_fail(field, "expected a number, got '" + v + "'");
    return out;
}

std::uint64_t to_uint(const std::string& field, const std::string& v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
        field_fail(field, "expected a nonnegative integer, got '" + v + "'");
    }
    return out;
}

template <class Enum>
Enum to_enum(const std::string& field, const std::string& v, std::initializer_list<Enum> options) {
    const std::string key = normalize(v);
    std::string allowed;
    for (Enum e : options) {
        if (normalize(to_string(e)) == key) return e;
        allowed += (allowed.empty() ? "" : ", ") + std::string(to_string(e));
    }
    field_fail(field, "unknown value '" + v + "' (expected one of: " + allowed + ")");
}

using Setter = std::function<void(ScenarioConfig&, const std::string& field, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"scenario", [](auto& c, auto& f, auto& v) {
             c.kind = to_enum(f, v, {ScenarioKind::ICR, ScenarioKind::Frailty, ScenarioKind::TimeVarying});
         }},
        {"lambda_e1", [](auto& c, auto& f, auto& v) { c.lambda_e1 = to_double(f, v); }},
        {"lambda_e2", [](auto& c, auto& f, auto& v) { c.lambda_e2 = to_double(f, v); }},
        {"lambda_d1", [](auto& c, auto& f, auto& v) { c.lambda_d1 = to_double(f, v); }},
        {"lambda_d2", [](auto& c, auto& f, auto& v) { c.lambda_d2 = to_double(f, v); }},
        {"lambda_c", [](auto& c, auto& f, auto& v) { c.lambda_c = to_double(f, v); }},
        {"frailty_variance", [](auto& c, auto& f, auto& v) { c.frailty_variance = to_double(f, v); }},
        {"change_point", [](auto& c, auto& f, auto& v) { c.change_point = to_double(f, v); }},
        {"upsilon1", [](auto& c, auto& f, auto& v) { c.upsilon1 = to_double(f, v); }},
        {"upsilon2", [](auto& c, auto& f, auto& v) { c.upsilon2 = to_double(f, v); }},
        {"covariate_mode", [](auto& c, auto& f, auto& v) {
             c.covariate_mode = to_enum(f, v, {CovariateMode::None, CovariateMode::Uninformative,
                                               CovariateMode::Informative});
         }},
        {"covariate_death_effect", [](auto& c, auto& f, auto& v) { c.covariate_death_effect = to_double(f, v); }},
        {"covariate_event_effect", [](auto& c, auto& f, auto& v) { c.covariate_event_effect = to_double(f, v); }},
        {"n_per_arm", [](auto& c, auto& f, auto& v) { c.n_per_arm = to_uint(f, v); }},
        {"tau", [](auto& c, auto& f, auto& v) { c.tau = to_double(f, v); }},
        {"replicates", [](auto& c, auto& f, auto& v) { c.replicates = to_uint(f, v); }},
        {"seed", [](auto& c, auto& f, auto& v) { c.seed = to_uint(f, v); }},
        {"alpha", [](auto& c, auto& f, auto& v) { c.alpha = to_double(f, v); }},
        {"horizon", [](auto& c, auto& f, auto& v) {
             if (normalize(v) == "default") c.horizon.reset();
             else c.horizon = to_double(f, v);
         }},
        {"methods", [](auto& c, auto& f, auto& v) {
             c.methods.clear();
             std::stringstream ss(v);
             std::string item;
             while (std::getline(ss, item, ',')) {
                 const Method m = to_enum(f, trim(item), {Method::Unadjusted, Method::Adjusted});
                 if (std::find(c.methods.begin(), c.methods.end(), m) == c.methods.end()) c.methods.push_back(m);
             }
         }},
        {"orientation", [](auto& c, auto& f, auto& v) {
             c.orientation = to_enum(f, v, {Orientation::Arm1MinusArm2, Orientation::Arm2MinusArm1});
         }},
        {"truth", [](auto& c, auto& f, auto& v) {
             c.truth = to_enum(f, v, {TruthMode::Auto, TruthMode::Analytic, TruthMode::Oracle,
                                      TruthMode::NullReference});
         }},
        {"oracle_datasets", [](auto& c, auto& f, auto& v) { c.oracle_datasets = to_uint(f, v); }},
        {"oracle_n_per_arm", [](auto& c, auto& f, auto& v) { c.oracle_n_per_arm = to_uint(f, v); }},
        {"threads", [](auto& c, auto& f, auto& v) { c.threads = to_uint(f, v); }},
    };
    return table;
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

void ScenarioConfig::validate() const {
    require_rate("lambda_e1", lambda_e1);
    require_rate("lambda_e2", lambda_e2);
    require_rate("lambda_d1", lambda_d1);
    require_rate("lambda_d2", lambda_d2);
    require_rate("lambda_c", lambda_c);
    require_rate("frailty_variance", frailty_variance);
    if (!std::isfinite(covariate_death_effect)) field_fail("covariate_death_effect", "must be finite");
    if (!std::isfinite(covariate_event_effect)) field_fail("covariate_event_effect", "must be finite");
    if (!(tau > 0.0) || !std::isfinite(tau)) field_fail("tau", "must be positive and finite");
    if (kind == ScenarioKind::TimeVarying) {
        if (!(change_point > 0.0 && change_point < tau)) field_fail("change_point", "must lie in (0, tau)");
        require_rate("upsilon1", upsilon1);
        require_rate("upsilon2", upsilon2);
    }
    if (n_per_arm < 1) field_fail("n_per_arm", "must be at least 1");
    if (replicates < 2) field_fail("replicates", "must be at least 2");
    if (!(alpha > 0.0 && alpha < 1.0)) field_fail("alpha", "must lie in (0, 1)");
    if (horizon && !(*horizon >= tau && std::isfinite(*horizon))) field_fail("horizon", "must be finite and >= tau");
    if (methods.empty()) field_fail("methods", "at least one method is required");
    if (std::find(methods.begin(), methods.end(), Method::Adjusted) != methods.end() &&
        covariate_mode == CovariateMode::None) {
        field_fail("methods", "the adjusted method needs covariate_mode uninformative or informative");
    }
    if (oracle_datasets < 1) field_fail("oracle_datasets", "must be at least 1");
    if (oracle_n_per_arm < 1) field_fail("oracle_n_per_arm", "must be at least 1");
}

ScenarioConfig parse_scenario_config(std::istream& in, const std::string& source_name) {
    ScenarioConfig config;
    std::map<std::string, std::size_t> defined_at;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        const std::string where = source_name + ":" + std::to_string(line_no) + ": ";
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::Config, "syntax_error", where + "expected 'key = value'");
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw Error(ErrorKind::Config, "unknown_field", where + "unknown field '" + key + "'");
        }
        if (defined_at.count(key)) {
            throw Error(ErrorKind::Config, "duplicate_field", where + "field '" + key + "' given twice");
        }
        defined_at[key] = line_no;
        try {
            it->second(config, key, value);
        } catch (const FieldError& e) {
            throw Error(ErrorKind::Config, e.code(), where + e.what());
        }
    }
    try {
        config.validate();
    } catch (const FieldError& e) {
        const auto at = defined_at.find(e.field());
        const std::string where =
            source_name + (at == defined_at.end() ? "" : ":" + std::to_string(at->second)) + ": ";
        throw Error(ErrorKind::Config, e.code(), where + e.what());
    }
    return config;
}

ScenarioConfig read_scenario_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "io_error", "cannot open config file " + path);
    return parse_scenario_config(in, path);
}

std::string format_scenario_config(const ScenarioConfig& c) {
    std::ostringstream os;
    os << "scenario = " << to_string(c.kind) << '\n'
       << "lambda_e1 = " << num(c.lambda_e1) << '\n'
       << "lambda_e2 = " << num(c.lambda_e2) << '\n'
       << "lambda_d1 = " << num(c.lambda_d1) << '\n'
       << "lambda_d2 = " << num(c.lambda_d2) << '\n'
       << "lambda_c = " << num(c.lambda_c) << '\n'
       << "frailty_variance = " << num(c.frailty_variance) << '\n'
       << "change_point = " << num(c.change_point) << '\n'
       << "upsilon1 = " << num(c.upsilon1) << '\n'
       << "upsilon2 = " << num(c.upsilon2) << '\n'
       << "covariate_mode = " << to_string(c.covariate_mode) << '\n'
       << "covariate_death_effect = " << num(c.covariate_death_effect) << '\n'
       << "covariate_event_effect = " << num(c.covariate_event_effect) << '\n'
       << "n_per_arm = " << c.n_per_arm << '\n'
       << "tau = " << num(c.tau) << '\n'
       << "replicates = " << c.replicates << '\n'
       << "seed = " << c.seed << '\n'
       << "alpha = " << num(c.alpha) << '\n'
       << "horizon = " << (c.horizon ? num(*c.horizon) : std::string("default")) << '\n'
       << "methods = ";
    for (std::size_t k = 0; k < c.methods.size(); ++k) os << (k ? "," : "") << to_string(c.methods[k]);
    os << '\n'
       << "orientation = " << to_string(c.orientation) << '\n'
       << "truth = " << to_string(c.truth) << '\n'
       << "oracle_datasets = " << c.oracle_datasets << '\n'
       << "oracle_n_per_arm = " << c.oracle_n_per_arm << '\n'
       << "threads = " << c.threads << '\n';
    return os.str();
}

}  // namespace aumcf
