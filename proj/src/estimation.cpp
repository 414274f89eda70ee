#include "aumcf/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "aumcf/error.hpp"

namespace aumcf {

const char* to_string(SurvivalConvention c) {
    return c == SurvivalConvention::LeftLimit ? "left_limit" : "right_continuous";
}

double event_weight(const Event& e, const EstimatorOptions& options) {
    if (!options.type_weights) return 1.0;
    if (!e.type) fail_validation("missing_weight", "event without a type under a type-weighted analysis");
    const auto it = options.type_weights->find(*e.type);
    if (it == options.type_weights->end()) {
        fail_validation("missing_weight", "no weight supplied for event type " + std::to_string(*e.type));
    }
    return it->second;
}

int ArmSummary::at_risk(double t) const {
    const auto it = std::lower_bound(sorted_follow_up.begin(), sorted_follow_up.end(), t);
    return static_cast<int>(sorted_follow_up.end() - it);
}

double ArmSummary::survival(double t) const {
    const auto it = std::upper_bound(death_times.begin(), death_times.end(), t);
    if (it == death_times.begin()) return 1.0;
    return km[static_cast<std::size_t>(it - death_times.begin()) - 1];
}

double ArmSummary::survival_left(double t) const {
    const auto it = std::lower_bound(death_times.begin(), death_times.end(), t);
    if (it == death_times.begin()) return 1.0;
    return km[static_cast<std::size_t>(it - death_times.begin()) - 1];
}

ArmSummary summarize_arm(const ArmDataset& arm, const EstimatorOptions& options) {
    ArmSummary s;
    s.options = options;
    s.n = arm.size();
    s.sorted_follow_up.reserve(s.n);

    std::vector<double> death_x;
    std::vector<std::pair<double, double>> weighted_events;
    for (const auto& subj : arm.subjects()) {
        s.sorted_follow_up.push_back(subj.follow_up);
        if (subj.terminal) death_x.push_back(subj.follow_up);
        for (const auto& e : subj.events) weighted_events.emplace_back(e.time, event_weight(e, options));
    }
    std::sort(s.sorted_follow_up.begin(), s.sorted_follow_up.end());
    std::sort(death_x.begin(), death_x.end());
    std::sort(weighted_events.begin(), weighted_events.end());

    double surv = 1.0;
    for (std::size_t k = 0; k < death_x.size();) {
        const double u = death_x[k];
        int d = 0;
        while (k < death_x.size() && death_x[k] == u) {
            ++d;
            ++k;
        }
        const int y = s.at_risk(u);
        surv *= 1.0 - static_cast<double>(d) / static_cast<double>(y);
        s.death_times.push_back(u);
        s.deaths.push_back(d);
        s.death_at_risk.push_back(y);
        s.km.push_back(surv);
    }

    for (std::size_t k = 0; k < weighted_events.size();) {
        const double u = weighted_events[k].first;
        double mass = 0.0;
        while (k < weighted_events.size() && weighted_events[k].first == u) {
            mass += weighted_events[k].second;
            ++k;
        }
        if (mass == 0.0) continue;
        const int y = s.at_risk(u);
        const double inc = mass / static_cast<double>(y);
        const double sw = options.convention == SurvivalConvention::LeftLimit ? s.survival_left(u) : s.survival(u);
        s.events.times.push_back(u);
        s.events.increments.push_back(inc);
        s.events.at_risk.push_back(y);
        s.event_mass.push_back(mass);
        s.event_survival.push_back(sw);
        s.mcf_increment.push_back(sw * inc);
    }
    return s;
}

StepFunction km_survival(const ArmDataset& arm) {
    const auto s = summarize_arm(arm);
    return StepFunction(1.0, s.death_times, s.km);
}

StepFunction nelson_aalen_terminal(const ArmDataset& arm) {
    const auto s = summarize_arm(arm);
    std::vector<double> cum;
    cum.reserve(s.death_times.size());
    double total = 0.0;
    for (std::size_t k = 0; k < s.death_times.size(); ++k) {
        total += static_cast<double>(s.deaths[k]) / static_cast<double>(s.death_at_risk[k]);
        cum.push_back(total);
    }
    return StepFunction(0.0, s.death_times, std::move(cum));
}

JumpIncrements event_rate_increments(const ArmDataset& arm, const EstimatorOptions& options) {
    return summarize_arm(arm, options).events;
}

StepFunction mcf(const ArmDataset& arm, const EstimatorOptions& options) {
    const auto s = summarize_arm(arm, options);
    std::vector<double> cum;
    cum.reserve(s.mcf_increment.size());
    double total = 0.0;
    for (double dm : s.mcf_increment) {
        total += dm;
        cum.push_back(total);
    }
    return StepFunction(0.0, s.events.times, std::move(cum));
}

double aumcf(const ArmSummary& summary, double tau) {
    double theta = 0.0;
    const auto& t = summary.events.times;
    for (std::size_t k = 0; k < t.size() && t[k] <= tau; ++k) {
        theta += (tau - t[k]) * summary.mcf_increment[k];
    }
    return theta;
}

double aumcf(const ArmDataset& arm, double tau, const EstimatorOptions& options) {
    return aumcf(summarize_arm(arm, options), tau);
}

double rmst(const ArmDataset& arm, double tau) { return area_under_step(km_survival(arm), tau); }

double time_lost_per_subject(const SubjectHistory& subject, double tau) {
    double lost = 0.0;
    for (const auto& e : subject.events) lost += std::max(tau - e.time, 0.0);
    return lost;
}

}  // namespace aumcf
