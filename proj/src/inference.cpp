#include "aumcf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "aumcf/error.hpp"

namespace aumcf {

namespace {

// Position of time t in a sorted jump array, or npos when absent.
std::size_t find_time(const std::vector<double>& times, double t) {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end() || *it != t) return static_cast<std::size_t>(-1);
    return static_cast<std::size_t>(it - times.begin());
}

// (tau - v) dm(v) summed over v in (u, tau], for each terminal jump time u.
std::vector<double> remaining_area(const ArmSummary& s, double tau) {
    const auto& et = s.events.times;
    std::size_t upto = std::upper_bound(et.begin(), et.end(), tau) - et.begin();
    std::vector<double> suffix(upto + 1, 0.0);
    for (std::size_t k = upto; k-- > 0;) suffix[k] = suffix[k + 1] + (tau - et[k]) * s.mcf_increment[k];

    std::vector<double> out(s.death_times.size(), 0.0);
    for (std::size_t m = 0; m < s.death_times.size(); ++m) {
        const std::size_t first = std::upper_bound(et.begin(), et.begin() + static_cast<std::ptrdiff_t>(upto),
                                                   s.death_times[m]) -
                                  et.begin();
        out[m] = suffix[first];
    }
    return out;
}

void finish_wald(ContrastResult& r, double working_point, double working_se, double null_value) {
    const double zq = normal_quantile(1.0 - r.alpha / 2.0);
    if (working_se > 0.0) {
        r.p_value = wald_pvalue(working_point, working_se, null_value);
    } else {
        r.degenerate = true;
        r.p_value = working_point == null_value ? 1.0 : 0.0;
        r.notes.push_back("zero standard error");
    }
    r.ci_lower = working_point - zq * working_se;
    r.ci_upper = working_point + zq * working_se;
}

}  // namespace

std::vector<SubjectResiduals> martingale_residuals(const ArmDataset& arm, const EstimatorOptions& options) {
    const auto s = summarize_arm(arm, options);
    std::vector<SubjectResiduals> out;
    out.reserve(arm.size());
    for (const auto& subj : arm.subjects()) {
        SubjectResiduals r;
        for (std::size_t k = 0; k < s.events.times.size() && s.events.times[k] <= subj.follow_up; ++k) {
            r.event.push_back({s.events.times[k], -s.events.increments[k]});
        }
        for (const auto& e : subj.events) {
            const std::size_t k = find_time(s.events.times, e.time);
            if (k != static_cast<std::size_t>(-1)) r.event[k].mass += event_weight(e, options);
        }
        for (std::size_t m = 0; m < s.death_times.size() && s.death_times[m] <= subj.follow_up; ++m) {
            double mass = -static_cast<double>(s.deaths[m]) / static_cast<double>(s.death_at_risk[m]);
            if (subj.terminal && s.death_times[m] == subj.follow_up) mass += 1.0;
            r.terminal.push_back({s.death_times[m], mass});
        }
        out.push_back(std::move(r));
    }
    return out;
}

InfluenceSet influence_values(const ArmDataset& arm, double tau, const EstimatorOptions& options) {
    return influence_values(arm, summarize_arm(arm, options), tau);
}

InfluenceSet influence_values(const ArmDataset& arm, const ArmSummary& s, double tau) {
    const double n = static_cast<double>(s.n);
    const auto& et = s.events.times;
    const std::size_t ne = std::upper_bound(et.begin(), et.end(), tau) - et.begin();

    // Recurrent-event part: integrand a(u) = (tau - u) S(u) / (Y(u)/n).
    std::vector<double> a(ne);
    std::vector<double> comp_events(ne + 1, 0.0);
    for (std::size_t k = 0; k < ne; ++k) {
        a[k] = (tau - et[k]) * s.event_survival[k] * n / s.events.at_risk[k];
        comp_events[k + 1] = comp_events[k] + a[k] * s.events.increments[k];
    }

    // Terminal part: integrand b(u) = B(u) / (Y(u)/n).
    const auto& dt = s.death_times;
    const std::size_t nd = std::upper_bound(dt.begin(), dt.end(), tau) - dt.begin();
    const auto remaining = remaining_area(s, tau);
    std::vector<double> b(nd);
    std::vector<double> comp_deaths(nd + 1, 0.0);
    for (std::size_t m = 0; m < nd; ++m) {
        b[m] = remaining[m] * n / s.death_at_risk[m];
        comp_deaths[m + 1] = comp_deaths[m] + b[m] * s.deaths[m] / s.death_at_risk[m];
    }

    InfluenceSet inf;
    inf.arm = arm.label();
    inf.tau = tau;
    inf.values.reserve(arm.size());
    for (const auto& subj : arm.subjects()) {
        const double horizon = std::min(subj.follow_up, tau);

        double event_part = 0.0;
        for (const auto& e : subj.events) {
            if (e.time > tau) break;
            const std::size_t k = find_time(et, e.time);
            if (k == static_cast<std::size_t>(-1)) continue;  // type carries zero weight
            event_part += event_weight(e, s.options) * a[k];
        }
        const std::size_t ke = std::upper_bound(et.begin(), et.begin() + static_cast<std::ptrdiff_t>(ne), horizon) -
                               et.begin();
        event_part -= comp_events[ke];

        double terminal_part = 0.0;
        if (subj.terminal && subj.follow_up <= tau) {
            terminal_part += b[find_time(dt, subj.follow_up)];
        }
        const std::size_t kd = std::upper_bound(dt.begin(), dt.begin() + static_cast<std::ptrdiff_t>(nd), horizon) -
                               dt.begin();
        terminal_part -= comp_deaths[kd];

        inf.values.push_back(event_part - terminal_part);
    }
    return inf;
}

double arm_variance(const InfluenceSet& inf) {
    if (inf.values.empty()) return 0.0;
    double ss = 0.0;
    for (double v : inf.values) ss += v * v;
    return ss / static_cast<double>(inf.values.size());
}

const char* to_string(ContrastKind kind) { return kind == ContrastKind::Difference ? "difference" : "ratio"; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double wald_pvalue(double point, double se, double null_value) {
    if (!(se > 0.0)) throw std::domain_error("wald_pvalue: se must be positive");
    const double z = std::abs(point - null_value) / se;
    return std::erfc(z / std::sqrt(2.0));
}

ContrastResult difference_from_influence(double theta1, const InfluenceSet& inf1, double theta2,
                                         const InfluenceSet& inf2, double alpha) {
    ContrastResult r;
    r.kind = ContrastKind::Difference;
    r.tau = inf1.tau;
    r.alpha = alpha;
    r.theta1 = theta1;
    r.theta2 = theta2;
    r.n1 = inf1.values.size();
    r.n2 = inf2.values.size();
    const double v1 = arm_variance(inf1) / static_cast<double>(r.n1);
    const double v2 = arm_variance(inf2) / static_cast<double>(r.n2);
    r.se1 = std::sqrt(v1);
    r.se2 = std::sqrt(v2);
    r.point = theta1 - theta2;
    r.se = std::sqrt(v1 + v2);
    finish_wald(r, r.point, r.se, 0.0);
    return r;
}

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail_validation("invalid_alpha", "alpha must lie in (0, 1)");
}

struct ArmFit {
    double theta;
    InfluenceSet inf;
};

ArmFit fit_arm(const ArmDataset& arm, double tau, const EstimatorOptions& eo) {
    const auto s = summarize_arm(arm, eo);
    return {aumcf(s, tau), influence_values(arm, s, tau)};
}

}  // namespace

ContrastResult contrast_difference(const StudyDataset& study, const ContrastOptions& options) {
    check_alpha(options.alpha);
    const EstimatorOptions eo{options.convention, std::nullopt};
    const auto f1 = fit_arm(study.arm1(), study.tau(), eo);
    const auto f2 = fit_arm(study.arm2(), study.tau(), eo);
    return difference_from_influence(f1.theta, f1.inf, f2.theta, f2.inf, options.alpha);
}

ContrastResult contrast_ratio(const StudyDataset& study, const ContrastOptions& options) {
    check_alpha(options.alpha);
    const EstimatorOptions eo{options.convention, std::nullopt};
    const auto f1 = fit_arm(study.arm1(), study.tau(), eo);
    const auto f2 = fit_arm(study.arm2(), study.tau(), eo);
    if (!(f1.theta > 0.0) || !(f2.theta > 0.0)) {
        throw Error(ErrorKind::Degenerate, "ratio_undefined",
                    "ratio contrast requires both AUMCF estimates to be positive");
    }
    ContrastResult r;
    r.kind = ContrastKind::Ratio;
    r.tau = study.tau();
    r.alpha = options.alpha;
    r.theta1 = f1.theta;
    r.theta2 = f2.theta;
    r.n1 = study.arm1().size();
    r.n2 = study.arm2().size();
    const double v1 = arm_variance(f1.inf) / static_cast<double>(r.n1);
    const double v2 = arm_variance(f2.inf) / static_cast<double>(r.n2);
    r.se1 = std::sqrt(v1);
    r.se2 = std::sqrt(v2);

    const double log_ratio = std::log(f1.theta) - std::log(f2.theta);
    r.log_se = std::sqrt(v1 / (f1.theta * f1.theta) + v2 / (f2.theta * f2.theta));
    finish_wald(r, log_ratio, r.log_se, 0.0);
    r.point = f1.theta / f2.theta;
    r.se = r.point * r.log_se;
    r.ci_lower = std::exp(r.ci_lower);
    r.ci_upper = std::exp(r.ci_upper);
    return r;
}

double ghosh_lin_q(const StudyDataset& study, SurvivalConvention convention) {
    const EstimatorOptions eo{convention, std::nullopt};
    const auto s1 = summarize_arm(study.arm1(), eo);
    const auto s2 = summarize_arm(study.arm2(), eo);
    const double n1 = static_cast<double>(s1.n);
    const double n2 = static_cast<double>(s2.n);
    const double n = n1 + n2;
    const double tau = study.tau();

    auto weight = [&](double u) {
        const double y1 = s1.at_risk(u);
        const double y2 = s2.at_risk(u);
        if (y1 + y2 == 0.0) return 0.0;
        return (y1 * y2 / (n1 * n2)) / ((y1 + y2) / n);
    };

    // merge the two jump sets so that identical arms cancel term by term
    const auto& t1 = s1.events.times;
    const auto& t2 = s2.events.times;
    double q = 0.0;
    std::size_t a = 0, b = 0;
    while (true) {
        const double u1 = a < t1.size() ? t1[a] : std::numeric_limits<double>::infinity();
        const double u2 = b < t2.size() ? t2[b] : std::numeric_limits<double>::infinity();
        const double u = std::min(u1, u2);
        if (!(u <= tau)) break;
        const double d1 = u1 == u ? s1.mcf_increment[a++] : 0.0;
        const double d2 = u2 == u ? s2.mcf_increment[b++] : 0.0;
        q += weight(u) * (d1 - d2);
    }
    return q;
}

ContrastResult weighted_contrast(const StudyDataset& study, const TypeWeights& weights,
                                 const ContrastOptions& options) {
    check_alpha(options.alpha);
    for (const auto& [type, w] : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            fail_validation("invalid_weight", "weight for event type " + std::to_string(type) +
                                                  " must be finite and nonnegative");
        }
    }
    const EstimatorOptions eo{options.convention, weights};
    const auto f1 = fit_arm(study.arm1(), study.tau(), eo);
    const auto f2 = fit_arm(study.arm2(), study.tau(), eo);
    auto r = difference_from_influence(f1.theta, f1.inf, f2.theta, f2.inf, options.alpha);
    r.notes.push_back("weighted AUMCF; variance from summed per-type influence values");
    return r;
}

}  // namespace aumcf
