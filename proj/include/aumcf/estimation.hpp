#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "aumcf/core.hpp"
#include "aumcf/step_function.hpp"

namespace aumcf {

/// Which version of the Kaplan-Meier curve multiplies the event-rate
/// increment dR(u): the left limit S(u-) or the right-continuous S(u).
enum class SurvivalConvention { LeftLimit, RightContinuous };

const char* to_string(SurvivalConvention c);

/// Event-type label -> weight. Used for the weighted multi-type AUMCF.
using TypeWeights = std::map<int, double>;

struct EstimatorOptions {
    SurvivalConvention convention = SurvivalConvention::LeftLimit;
    /// When set, each event counts with the weight of its type instead of 1.
    std::optional<TypeWeights> type_weights;
};

/// Aggregated jumps of a Nelson-Aalen type estimator.
struct JumpIncrements {
    std::vector<double> times;       // strictly ascending
    std::vector<double> increments;  // dN(u) / Y(u), > 0
    std::vector<int> at_risk;        // Y(u) >= 1
};

/// Arm-level curves evaluated on their jump sets. Everything downstream
/// (MCF, AUMCF, influence values) is an exact sum over these arrays.
struct ArmSummary {
    EstimatorOptions options;
    std::size_t n = 0;
    std::vector<double> sorted_follow_up;

    // Terminal-event process
    std::vector<double> death_times;
    std::vector<int> deaths;
    std::vector<int> death_at_risk;
    std::vector<double> km;  // S(u) just after each death time

    // Recurrent-event process (weighted when type weights are in effect)
    JumpIncrements events;
    std::vector<double> event_mass;      // dN(u), i.e. increments * at_risk
    std::vector<double> event_survival;  // S(u-) or S(u) per convention
    std::vector<double> mcf_increment;   // event_survival * increment

    int at_risk(double t) const;
    double survival(double t) const;
    double survival_left(double t) const;
};

ArmSummary summarize_arm(const ArmDataset& arm, const EstimatorOptions& options = {});

/// Weight of one event under `options` (1 unless type weights are set).
double event_weight(const Event& e, const EstimatorOptions& options);

/// Product-limit estimator of the terminal-event survival function.
StepFunction km_survival(const ArmDataset& arm);

/// Nelson-Aalen cumulative hazard of the terminal event.
StepFunction nelson_aalen_terminal(const ArmDataset& arm);

/// dR(u) = dN(u) / Y(u) at every distinct recurrent-event time.
JumpIncrements event_rate_increments(const ArmDataset& arm, const EstimatorOptions& options = {});

/// Mean cumulative function m(t) = sum_{u <= t} S(u-) dR(u).
StepFunction mcf(const ArmDataset& arm, const EstimatorOptions& options = {});

/// Area under the MCF on [0, tau], computed as sum_{u <= tau} (tau - u) S(u-) dR(u).
double aumcf(const ArmDataset& arm, double tau, const EstimatorOptions& options = {});
double aumcf(const ArmSummary& summary, double tau);

/// Restricted mean survival time of the terminal event on [0, tau].
double rmst(const ArmDataset& arm, double tau);

/// Event-free time lost by one subject: sum over events of (tau - T)_+.
double time_lost_per_subject(const SubjectHistory& subject, double tau);

}  // namespace aumcf
