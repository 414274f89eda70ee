#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "aumcf/core.hpp"
#include "aumcf/estimation.hpp"

namespace aumcf {

/// One jump of an estimated martingale residual.
struct ResidualIncrement {
    double time = 0.0;
    double mass = 0.0;
};

/// Residual increments of one subject: M_i (recurrent events) and M_i^D (terminal event).
struct SubjectResiduals {
    std::vector<ResidualIncrement> event;
    std::vector<ResidualIncrement> terminal;
};

/// Observed jumps minus the fitted compensator, for every subject of the arm,
/// at each arm-level jump time u <= X_i. Order matches arm.subjects().
std::vector<SubjectResiduals> martingale_residuals(const ArmDataset& arm, const EstimatorOptions& options = {});

/// Estimated per-subject influence values of the AUMCF at truncation tau.
struct InfluenceSet {
    int arm = 1;
    double tau = 0.0;
    std::vector<double> values;
};

InfluenceSet influence_values(const ArmDataset& arm, double tau, const EstimatorOptions& options = {});
InfluenceSet influence_values(const ArmDataset& arm, const ArmSummary& summary, double tau);

/// Mean square of the influence values.
double arm_variance(const InfluenceSet& inf);

enum class ContrastKind { Difference, Ratio };

const char* to_string(ContrastKind kind);

/// Two-sample contrast with Wald inference.
struct ContrastResult {
    ContrastKind kind = ContrastKind::Difference;
    double tau = 0.0;
    double alpha = 0.05;
    double point = 0.0;
    double se = 0.0;  // of `point` on its own scale
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double p_value = 1.0;
    double theta1 = 0.0;
    double theta2 = 0.0;
    double se1 = 0.0;
    double se2 = 0.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    double log_se = 0.0;     // ratio only: se of log(point)
    bool degenerate = false;  // se == 0
    std::vector<std::string> notes;
};

struct ContrastOptions {
    double alpha = 0.05;
    SurvivalConvention convention = SurvivalConvention::LeftLimit;
};

/// Standard normal CDF via the complementary error function.
double normal_cdf(double z);
/// Standard normal quantile.
double normal_quantile(double p);

/// Two-sided Wald p-value 2 * (1 - Phi(|point - null| / se)); se must be > 0.
double wald_pvalue(double point, double se, double null_value);

/// Difference of AUMCFs, theta1 - theta2.
ContrastResult contrast_difference(const StudyDataset& study, const ContrastOptions& options = {});

/// Ratio theta1 / theta2 with inference on the log scale.
ContrastResult contrast_ratio(const StudyDataset& study, const ContrastOptions& options = {});

/// Builds a difference contrast from per-arm estimates and influence values.
ContrastResult difference_from_influence(double theta1, const InfluenceSet& inf1, double theta2,
                                         const InfluenceSet& inf2, double alpha);

/// Log-rank type weighted difference of the two arms' MCF increments on [0, tau].
/// Diagnostic only; no reference distribution is attached.
double ghosh_lin_q(const StudyDataset& study, SurvivalConvention convention = SurvivalConvention::LeftLimit);

/// Difference of weighted AUMCFs sum_k w_k theta_k. Every event type in the data
/// needs a weight; weights must be nonnegative.
ContrastResult weighted_contrast(const StudyDataset& study, const TypeWeights& weights,
                                 const ContrastOptions& options = {});

}  // namespace aumcf
