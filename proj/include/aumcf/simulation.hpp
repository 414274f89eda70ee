#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aumcf/core.hpp"
#include "aumcf/estimation.hpp"
#include "aumcf/inference.hpp"
#include "aumcf/random.hpp"

namespace aumcf {

enum class ScenarioKind { ICR, Frailty, TimeVarying };
enum class CovariateMode { None, Uninformative, Informative };
enum class Method { Unadjusted, Adjusted };
/// Source of the true contrast used for bias and coverage.
enum class TruthMode { Auto, Analytic, Oracle, NullReference };
/// Direction of the simulated contrast.
enum class Orientation { Arm1MinusArm2, Arm2MinusArm1 };

const char* to_string(ScenarioKind k);
const char* to_string(CovariateMode m);
const char* to_string(Method m);
const char* to_string(TruthMode m);
const char* to_string(Orientation o);

/// Full parameterization of a simulation scenario.
///
/// Censoring is generated independently of the covariate. Follow-up is capped
/// at `horizon` (default 10 * tau) with delta = 0, so generation terminates
/// even without death or censoring.
struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::ICR;
    double lambda_e1 = 1.0;
    double lambda_e2 = 1.0;
    double lambda_d1 = 0.2;
    double lambda_d2 = 0.2;
    double lambda_c = 0.2;
    double frailty_variance = 3.0;  // Frailty kind only; Gamma(shape 1/v, scale v)
    double change_point = 1.0;      // TimeVarying only
    double upsilon1 = 1.0;          // TimeVarying only: rate multiplier after the change point
    double upsilon2 = 1.0;
    CovariateMode covariate_mode = CovariateMode::None;
    double covariate_death_effect = std::log(0.5);  // log-rate effect on death (informative mode)
    double covariate_event_effect = std::log(2.0);  // log-rate effect on events (informative mode)
    std::size_t n_per_arm = 200;
    double tau = 1.0;
    std::size_t replicates = 10000;
    std::uint64_t seed = 20240101;
    double alpha = 0.05;
    std::optional<double> horizon;
    std::vector<Method> methods{Method::Unadjusted};
    Orientation orientation = Orientation::Arm1MinusArm2;
    TruthMode truth = TruthMode::Auto;
    std::size_t oracle_datasets = 2000;
    std::size_t oracle_n_per_arm = 10000;
    std::size_t threads = 0;  // 0 = hardware concurrency

    double effective_horizon() const { return horizon.value_or(10.0 * tau); }
    double lambda_e(int arm) const { return arm == 1 ? lambda_e1 : lambda_e2; }
    double lambda_d(int arm) const { return arm == 1 ? lambda_d1 : lambda_d2; }
    double upsilon(int arm) const { return arm == 1 ? upsilon1 : upsilon2; }

    /// Throws Error(Config) naming the offending field.
    void validate() const;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Parses `key = value` lines (`#` starts a comment). Errors carry the
/// source name, line number and field.
ScenarioConfig parse_scenario_config(std::istream& in, const std::string& source_name = "<config>");
ScenarioConfig read_scenario_config_file(const std::string& path);
/// Canonical text form; parse_scenario_config(format_scenario_config(c)) == c.
std::string format_scenario_config(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
    std::uint64_t subject = 0;
};

SubjectHistory simulate_subject(const ScenarioConfig& config, int arm, const StreamKey& key);

/// n_per_arm subjects per arm; a pure function of (config, replicate_index).
StudyDataset generate_dataset(const ScenarioConfig& config, std::uint64_t replicate_index);

// ---------------------------------------------------------------------------
// True values
// ---------------------------------------------------------------------------

struct TrueValues {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double delta = 0.0;  // oriented per config.orientation
    double mcse = 0.0;   // Monte Carlo SE of delta (0 for analytic values)
    std::string source;
};

/// Population AUMCF per arm by numerical integration of the data-generating
/// model. Covers every scenario kind and covariate mode.
TrueValues analytic_truth(const ScenarioConfig& config);

/// Average of estimates over `datasets` uncensored datasets of `n_per_arm`
/// subjects per arm (defaults to the config's oracle size).
TrueValues true_value_oracle(const ScenarioConfig& config, std::optional<std::size_t> datasets = std::nullopt,
                             std::optional<std::size_t> n_per_arm = std::nullopt);

TrueValues resolve_truth(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Operating characteristics
// ---------------------------------------------------------------------------

struct ReplicateOutcome {
    double point = 0.0;
    double se = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double p_value = 1.0;
};

struct MethodSummary {
    Method method = Method::Unadjusted;
    std::size_t replicates = 0;
    double mean_point = 0.0;
    double bias = 0.0;
    double ese = 0.0;  // empirical SD of point estimates
    double ase = 0.0;  // mean analytic se
    double rejection_rate = 0.0;
    double coverage = 0.0;
    double mcse_bias = 0.0;
    double mcse_ese = 0.0;
    double mcse_ase = 0.0;
    double mcse_rejection = 0.0;
    double mcse_coverage = 0.0;
};

struct OperatingCharacteristics {
    ScenarioConfig config;
    TrueValues truth;
    std::vector<MethodSummary> rows;
    std::vector<std::vector<ReplicateOutcome>> outcomes;  // [method][replicate]

    const MethodSummary& row(Method m) const;
};

/// Runs config.replicates replicates (concurrently when threads != 1) and
/// aggregates in replicate order, so results do not depend on scheduling.
OperatingCharacteristics run_operating_characteristics(const ScenarioConfig& config,
                                                       std::optional<TrueValues> truth = std::nullopt);

MethodSummary summarize_outcomes(Method method, const std::vector<ReplicateOutcome>& outcomes, double truth,
                                 double alpha);

/// Repeats the harness with arm 2's death rate set to each grid value. The
/// contrast is oriented arm 2 minus arm 1 and judged against the null
/// reference Delta = 0, since the recurrent-event process is unchanged.
std::vector<OperatingCharacteristics> survival_bias_sensitivity(const ScenarioConfig& base,
                                                                const std::vector<double>& lambda_d2_values);

/// Subject-level bootstrap (within arm) SD of the contrast estimate: of the
/// difference, or of the log ratio for ContrastKind::Ratio. Needs >= 100 resamples.
double bootstrap_se(const StudyDataset& study, std::size_t resamples, std::uint64_t seed,
                    SurvivalConvention convention = SurvivalConvention::LeftLimit,
                    ContrastKind kind = ContrastKind::Difference);

}  // namespace aumcf
