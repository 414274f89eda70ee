#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aumcf/augmentation.hpp"
#include "aumcf/inference.hpp"
#include "aumcf/simulation.hpp"

namespace aumcf {

enum class OutputFormat { Json, Csv };

/// Identifies what produced a report. Rendered as a "provenance" object in
/// JSON and as leading `# key=value` lines in CSV.
struct Provenance {
    std::string command;
    std::string input_hash;  // "fnv1a64:<hex>"
    std::optional<double> tau;
    std::optional<double> alpha;
    std::optional<std::string> convention;
    std::optional<std::uint64_t> seed;
    std::vector<std::pair<std::string, std::string>> extra;
};

std::string version_string();

/// 64-bit FNV-1a digest as "fnv1a64:" followed by 16 hex digits.
std::string content_hash(std::string_view bytes);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double x);

/// Flat record fields, in this order: kind, tau, theta1, se1, theta2, se2,
/// point, se, ci_lower, ci_upper, p_value, n1, n2, alpha.
std::vector<std::string> contrast_field_names();

struct ArmEstimate {
    int arm = 1;
    std::size_t n = 0;
    double tau = 0.0;
    double theta = 0.0;
    double se = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
};

/// Per-arm AUMCF with se = sqrt(Sigma_j / n_j) and a Wald interval.
ArmEstimate estimate_arm(const ArmDataset& arm, double tau, double alpha, const EstimatorOptions& options = {});

std::string render_estimates(const std::vector<ArmEstimate>& arms, const Provenance& prov,
                             const std::vector<std::string>& warnings, OutputFormat format);

/// `method` labels each row ("unadjusted", "adjusted", "weighted", ...).
struct LabelledContrast {
    std::string method;
    ContrastResult result;
};

struct AugmentationInfo {
    std::vector<std::string> covariates;
    std::vector<double> beta;
    double relative_efficiency = 1.0;
    bool variance_clamped = false;
};

std::string render_contrasts(const std::vector<LabelledContrast>& rows, const Provenance& prov,
                             const std::vector<std::string>& warnings, const std::optional<AugmentationInfo>& aug,
                             std::optional<double> bootstrap_se, OutputFormat format);

/// Long-format `arm,curve,time,value` rows for the MCF and KM curves of each
/// arm: t = 0, every jump in (0, tau], and the tau endpoint.
std::string render_curves(const std::vector<ArmDataset>& arms, double tau, const EstimatorOptions& options,
                          const Provenance& prov);

/// CSV: one row per method and metric with its Monte Carlo SE.
std::string render_operating_characteristics(const OperatingCharacteristics& oc, const Provenance& prov,
                                             OutputFormat format);

}  // namespace aumcf
