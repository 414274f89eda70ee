#include "aumcf/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "aumcf/augmentation.hpp"
#include "aumcf/error.hpp"
#include "aumcf/inference.hpp"
#include "parallel.hpp"

namespace aumcf {

namespace {

constexpr std::uint64_t kOracleSeedSalt = 0x6F7261636C65ULL;  // "oracle"

std::string subject_id(int arm, std::uint64_t i) {
    std::string digits = std::to_string(i);
    if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
    return std::to_string(arm) + "-" + digits;
}

// Event times of a Poisson process with rate `rate` on [0, change) and
// `rate_after` afterwards, observed on [0, limit].
std::vector<Event> poisson_events(CounterRng& rng, double rate, double change, double rate_after, double limit) {
    std::vector<Event> events;
    double t = 0.0;
    double r = rate;
    bool switched = !(change < limit);
    while (true) {
        const double next = t + rng.exponential(r);
        if (!switched && next >= change) {
            // memoryless restart at the change point
            t = change;
            r = rate_after;
            switched = true;
            continue;
        }
        if (!(next <= limit)) break;
        t = next;
        events.push_back({t, std::nullopt});
    }
    return events;
}

double std_normal_pdf(double w) { return std::exp(-0.5 * w * w) / std::sqrt(2.0 * M_PI); }

double arm_theta(const ScenarioConfig& c, int arm) {
    using boost::math::quadrature::gauss_kronrod;
    const double tau = c.tau;
    const double lambda_e = c.lambda_e(arm);
    const double lambda_d = c.lambda_d(arm);
    const bool frailty = c.kind == ScenarioKind::Frailty && c.frailty_variance > 0.0;
    const double v = c.frailty_variance;

    // E[xi * exp(-a * xi)] for the Gamma(shape 1/v, scale v) frailty, or exp(-a).
    auto survival_weight = [&](double a) {
        return frailty ? std::pow(1.0 + a * v, -(1.0 / v + 1.0)) : std::exp(-a);
    };
    auto inner = [&](double event_mult, double death_mult) {
        auto integrand_rate = [&](double rate) {
            return [&, rate](double u) { return (tau - u) * rate * event_mult * survival_weight(lambda_d * death_mult * u); };
        };
        if (c.kind == ScenarioKind::TimeVarying) {
            const double cp = c.change_point;
            return gauss_kronrod<double, 61>::integrate(integrand_rate(lambda_e), 0.0, cp, 15, 1e-13) +
                   gauss_kronrod<double, 61>::integrate(integrand_rate(c.upsilon(arm) * lambda_e), cp, tau, 15, 1e-13);
        }
        return gauss_kronrod<double, 61>::integrate(integrand_rate(lambda_e), 0.0, tau, 15, 1e-13);
    };
    if (c.covariate_mode != CovariateMode::Informative) return inner(1.0, 1.0);
    auto over_w = [&](double w) {
        return std_normal_pdf(w) * inner(std::exp(c.covariate_event_effect * w), std::exp(c.covariate_death_effect * w));
    };
    return gauss_kronrod<double, 61>::integrate(over_w, -12.0, 12.0, 15, 1e-12);
}

StudyDataset orient(const StudyDataset& ds, Orientation o) {
    if (o == Orientation::Arm1MinusArm2) return ds;
    return StudyDataset(ds.arm2(), ds.arm1(), ds.tau());
}

double oriented_delta(double theta1, double theta2, Orientation o) {
    return o == Orientation::Arm1MinusArm2 ? theta1 - theta2 : theta2 - theta1;
}

ReplicateOutcome outcome_of(const ContrastResult& r) { return {r.point, r.se, r.ci_lower, r.ci_upper, r.p_value}; }

double sample_sd(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace

SubjectHistory simulate_subject(const ScenarioConfig& c, int arm, const StreamKey& key) {
    auto stream = [&](DrawPurpose p) {
        return CounterRng::stream(key.seed, key.replicate, static_cast<std::uint64_t>(arm), key.subject, p);
    };
    SubjectHistory s;
    s.id = subject_id(arm, key.subject);

    double event_mult = 1.0;
    double death_mult = 1.0;
    if (c.covariate_mode != CovariateMode::None) {
        auto rng = stream(DrawPurpose::Covariate);
        const double w = std::normal_distribution<double>(0.0, 1.0)(rng);
        s.covariates = {w};
        if (c.covariate_mode == CovariateMode::Informative) {
            event_mult *= std::exp(c.covariate_event_effect * w);
            death_mult *= std::exp(c.covariate_death_effect * w);
        }
    }
    if (c.kind == ScenarioKind::Frailty && c.frailty_variance > 0.0) {
        auto rng = stream(DrawPurpose::Frailty);
        const double v = c.frailty_variance;
        const double xi = std::gamma_distribution<double>(1.0 / v, v)(rng);
        event_mult *= xi;
        death_mult *= xi;
    }

    const double death = stream(DrawPurpose::Death).exponential(c.lambda_d(arm) * death_mult);
    const double censor = stream(DrawPurpose::Censoring).exponential(c.lambda_c);
    const double horizon = c.effective_horizon();
    s.follow_up = std::min({death, censor, horizon});
    s.terminal = death <= censor && death <= horizon;

    auto rng = stream(DrawPurpose::Events);
    const double rate = c.lambda_e(arm) * event_mult;
    if (c.kind == ScenarioKind::TimeVarying) {
        s.events = poisson_events(rng, rate, c.change_point, c.upsilon(arm) * rate, s.follow_up);
    } else {
        s.events = poisson_events(rng, rate, s.follow_up, rate, s.follow_up);
    }
    return s;
}

StudyDataset generate_dataset(const ScenarioConfig& config, std::uint64_t replicate_index) {
    std::vector<ArmDataset> arms;
    for (int arm : {1, 2}) {
        std::vector<SubjectHistory> subjects;
        subjects.reserve(config.n_per_arm);
        for (std::uint64_t i = 0; i < config.n_per_arm; ++i) {
            subjects.push_back(simulate_subject(config, arm, {config.seed, replicate_index, i}));
        }
        arms.emplace_back(arm, std::move(subjects));
    }
    return StudyDataset(std::move(arms[0]), std::move(arms[1]), config.tau);
}

TrueValues analytic_truth(const ScenarioConfig& config) {
    config.validate();
    TrueValues tv;
    tv.theta1 = arm_theta(config, 1);
    tv.theta2 = arm_theta(config, 2);
    tv.delta = oriented_delta(tv.theta1, tv.theta2, config.orientation);
    tv.source = "analytic";
    return tv;
}

TrueValues true_value_oracle(const ScenarioConfig& config, std::optional<std::size_t> datasets,
                             std::optional<std::size_t> n_per_arm) {
    ScenarioConfig c = config;
    c.lambda_c = 0.0;
    c.n_per_arm = n_per_arm.value_or(config.oracle_n_per_arm);
    c.seed = config.seed ^ kOracleSeedSalt;
    c.validate();
    const std::size_t count = datasets.value_or(config.oracle_datasets);
    if (count < 1) throw Error(ErrorKind::Config, "invalid_field", "field 'oracle_datasets': must be at least 1");

    std::vector<double> t1(count), t2(count);
    detail::parallel_for(count, c.threads, [&](std::size_t d) {
        const auto ds = generate_dataset(c, d);
        t1[d] = aumcf(ds.arm1(), c.tau);
        t2[d] = aumcf(ds.arm2(), c.tau);
    });
    TrueValues tv;
    const double k = static_cast<double>(count);
    tv.theta1 = std::accumulate(t1.begin(), t1.end(), 0.0) / k;
    tv.theta2 = std::accumulate(t2.begin(), t2.end(), 0.0) / k;
    tv.delta = oriented_delta(tv.theta1, tv.theta2, config.orientation);
    std::vector<double> deltas(count);
    for (std::size_t d = 0; d < count; ++d) deltas[d] = oriented_delta(t1[d], t2[d], config.orientation);
    tv.mcse = sample_sd(deltas) / std::sqrt(k);
    tv.source = "oracle";
    return tv;
}

TrueValues resolve_truth(const ScenarioConfig& config) {
    switch (config.truth) {
        case TruthMode::Auto:
        case TruthMode::Analytic: return analytic_truth(config);
        case TruthMode::Oracle: return true_value_oracle(config);
        case TruthMode::NullReference: {
            TrueValues tv = analytic_truth(config);
            tv.delta = 0.0;
            tv.source = "null_reference";
            return tv;
        }
    }
    throw std::logic_error("unhandled truth mode");
}

const MethodSummary& OperatingCharacteristics::row(Method m) const {
    for (const auto& r : rows) {
        if (r.method == m) return r;
    }
    throw std::out_of_range(std::string("no operating characteristics for method ") + to_string(m));
}

MethodSummary summarize_outcomes(Method method, const std::vector<ReplicateOutcome>& outcomes, double truth,
                                 double alpha) {
    MethodSummary s;
    s.method = method;
    s.replicates = outcomes.size();
    if (outcomes.empty()) return s;
    const double r = static_cast<double>(outcomes.size());
    std::vector<double> points, ses;
    std::size_t rejections = 0, covered = 0;
    for (const auto& o : outcomes) {
        points.push_back(o.point);
        ses.push_back(o.se);
        if (o.p_value < alpha) ++rejections;
        if (o.ci_lower <= truth && truth <= o.ci_upper) ++covered;
    }
    s.mean_point = std::accumulate(points.begin(), points.end(), 0.0) / r;
    s.bias = s.mean_point - truth;
    s.ese = sample_sd(points);
    s.ase = std::accumulate(ses.begin(), ses.end(), 0.0) / r;
    s.rejection_rate = static_cast<double>(rejections) / r;
    s.coverage = static_cast<double>(covered) / r;
    s.mcse_bias = s.ese / std::sqrt(r);
    s.mcse_ese = outcomes.size() > 1 ? s.ese / std::sqrt(2.0 * (r - 1.0)) : 0.0;
    s.mcse_ase = sample_sd(ses) / std::sqrt(r);
    s.mcse_rejection = std::sqrt(s.rejection_rate * (1.0 - s.rejection_rate) / r);
    s.mcse_coverage = std::sqrt(s.coverage * (1.0 - s.coverage) / r);
    return s;
}

OperatingCharacteristics run_operating_characteristics(const ScenarioConfig& config, std::optional<TrueValues> truth) {
    config.validate();
    OperatingCharacteristics oc;
    oc.config = config;
    oc.truth = truth ? *truth : resolve_truth(config);

    const std::size_t reps = config.replicates;
    const auto& methods = config.methods;
    const bool want_adjusted = std::find(methods.begin(), methods.end(), Method::Adjusted) != methods.end();
    oc.outcomes.assign(methods.size(), std::vector<ReplicateOutcome>(reps));

    detail::parallel_for(reps, config.threads, [&](std::size_t r) {
        const auto ds = orient(generate_dataset(config, r), config.orientation);
        ContrastResult unadjusted, adjusted;
        if (want_adjusted) {
            AugmentationOptions ao;
            ao.alpha = config.alpha;
            const auto aug = augmented_contrast(ds, ao);
            unadjusted = aug.unadjusted;
            adjusted = aug.adjusted;
        } else {
            unadjusted = contrast_difference(ds, ContrastOptions{config.alpha});
        }
        for (std::size_t m = 0; m < methods.size(); ++m) {
            oc.outcomes[m][r] = outcome_of(methods[m] == Method::Adjusted ? adjusted : unadjusted);
        }
    });

    for (std::size_t m = 0; m < methods.size(); ++m) {
        oc.rows.push_back(summarize_outcomes(methods[m], oc.outcomes[m], oc.truth.delta, config.alpha));
    }
    return oc;
}

std::vector<OperatingCharacteristics> survival_bias_sensitivity(const ScenarioConfig& base,
                                                                const std::vector<double>& lambda_d2_values) {
    base.validate();
    const bool null_events = base.lambda_e1 == base.lambda_e2 &&
                             (base.kind != ScenarioKind::TimeVarying || base.upsilon1 == base.upsilon2);
    if (!null_events) {
        throw Error(ErrorKind::Config, "not_null_scenario",
                    "survival-bias sensitivity needs identical recurrent-event processes in both arms");
    }
    std::vector<OperatingCharacteristics> out;
    for (double ld2 : lambda_d2_values) {
        ScenarioConfig c = base;
        c.lambda_d2 = ld2;
        c.orientation = Orientation::Arm2MinusArm1;
        c.truth = TruthMode::NullReference;
        out.push_back(run_operating_characteristics(c));
    }
    return out;
}

double bootstrap_se(const StudyDataset& study, std::size_t resamples, std::uint64_t seed,
                    SurvivalConvention convention, ContrastKind kind) {
    if (resamples < 100) fail_validation("too_few_resamples", "bootstrap needs at least 100 resamples");
    const EstimatorOptions eo{convention, std::nullopt};
    std::vector<double> points(resamples);
    for (std::size_t b = 0; b < resamples; ++b) {
        double theta[2] = {0.0, 0.0};
        for (int j : {1, 2}) {
            const auto& subjects = study.arm(j).subjects();
            const std::size_t n = subjects.size();
            auto rng = CounterRng::stream(seed, b, static_cast<std::uint64_t>(j), 0, DrawPurpose::Bootstrap);
            std::vector<SubjectHistory> sample;
            sample.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto idx = std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
                sample.push_back(subjects[idx]);
            }
            theta[j - 1] = aumcf(ArmDataset(j, std::move(sample)), study.tau(), eo);
        }
        if (kind == ContrastKind::Difference) {
            points[b] = theta[0] - theta[1];
        } else {
            if (!(theta[0] > 0.0 && theta[1] > 0.0)) {
                throw Error(ErrorKind::Degenerate, "ratio_undefined", "bootstrap resample with a zero AUMCF");
            }
            points[b] = std::log(theta[0] / theta[1]);
        }
    }
    return sample_sd(points);
}

}  // namespace aumcf
