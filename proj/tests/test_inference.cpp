#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"

#include "aumcf/error.hpp"
#include "aumcf/inference.hpp"
#include "test_support.hpp"

using namespace aumcf;
using testing::subject;

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

ArmDataset relabel(const ArmDataset& arm, int label) { return ArmDataset(label, arm.subjects()); }

}  // namespace

TEST_CASE("martingale residuals aggregate to zero") {
    const auto arm = testing::toy_arm();
    const auto res = martingale_residuals(arm);
    REQUIRE(res.size() == 3);
    for (double u : {2.0, 3.0, 5.0}) {
        double sum = 0.0;
        for (const auto& r : res) {
            for (const auto& inc : r.event) sum += inc.time == u ? inc.mass : 0.0;
        }
        CHECK(sum == doctest::Approx(0.0).epsilon(1e-15).scale(1.0));
    }
    double death_sum = 0.0;
    for (const auto& r : res) {
        for (const auto& inc : r.terminal) death_sum += inc.time == 10.0 ? inc.mass : 0.0;
    }
    CHECK(death_sum == doctest::Approx(0.0).scale(1.0));

    // subject s3 (no events, X=12) carries only compensator mass
    for (const auto& inc : res[2].event) CHECK(inc.mass < 0.0);
    CHECK(res[2].event.size() == 3);

    const auto single = martingale_residuals(ArmDataset(1, {subject("a", 2, false, {1})}));
    for (const auto& inc : single[0].event) CHECK(inc.mass == 0.0);
}

TEST_CASE("influence values agree with the residual-sum reference") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 300; ++k) {
        testing::RandomArmOptions o;
        o.integer_times = k % 2 == 0;
        o.types = k % 3 == 0 ? 2 : 0;
        const auto arm = testing::random_arm(rng, 1, o);
        const double tau = 0.5 + (k % 11);
        EstimatorOptions eo;
        eo.convention = k % 4 == 1 ? SurvivalConvention::RightContinuous : SurvivalConvention::LeftLimit;
        if (o.types) eo.type_weights = TypeWeights{{1, 1.5}, {2, 0.25}};
        const auto fast = influence_values(arm, tau, eo).values;
        const auto ref = testing::ref_influence(arm, tau, eo);
        REQUIRE(fast.size() == ref.size());
        const double scale = std::max(1.0, max_abs(ref));
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::fabs(fast[i] - ref[i]) <= 1e-11 * scale);
    }
}

TEST_CASE("influence values sum to zero") {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 300; ++k) {
        const auto arm = testing::random_arm(rng, 1, {1, 40, k % 2 == 0});
        const auto psi = influence_values(arm, 1.0 + k % 10).values;
        CHECK(std::fabs(total(psi)) <= 1e-9 * static_cast<double>(psi.size()) * std::max(max_abs(psi), 1e-300));
    }
}

TEST_CASE("influence values in simple closed forms") {
    // no deaths, no censoring before tau, one event per subject at distinct times
    const ArmDataset arm(1, {subject("a", 10, false, {1}), subject("b", 10, false, {2.5}),
                             subject("c", 10, false, {4}), subject("d", 10, false, {7})});
    const double tau = 8.0;
    const double theta = aumcf::aumcf(arm, tau);
    const auto psi = influence_values(arm, tau).values;
    const double times[] = {1, 2.5, 4, 7};
    for (int i = 0; i < 4; ++i) CHECK(psi[i] == doctest::Approx((tau - times[i]) - theta));

    const ArmDataset same(1, {subject("a", 6, true, {1, 3}), subject("b", 6, true, {1, 3}),
                              subject("c", 6, true, {1, 3})});
    for (double v : influence_values(same, 5.0).values) CHECK(v == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("arm variance is the mean square") {
    CHECK(arm_variance({1, 1.0, {0.0, 0.0}}) == 0.0);
    CHECK(arm_variance({1, 1.0, {1.0, -1.0}}) == 1.0);
}

TEST_CASE("normal distribution helpers") {
    CHECK(std::fabs(normal_cdf(0.0) - 0.5) <= 1e-15);
    CHECK(std::fabs(normal_cdf(1.0) - 0.841344746068542948585) <= 1e-12);
    CHECK(std::fabs(normal_cdf(-2.0) - 0.022750131948179207200) <= 1e-12);
    CHECK(std::fabs(normal_cdf(0.5) - 0.691462461274013103637) <= 1e-12);
    CHECK(std::fabs(normal_cdf(-6.0) - 9.8658764503769814e-10) <= 1e-12);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));

    CHECK(wald_pvalue(1.959964, 1.0, 0.0) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(wald_pvalue(0.0, 1.0, 0.0) == 1.0);
    CHECK(std::fabs(wald_pvalue(3.0, 1.0, 0.0) - 0.00269979606326018) <= 1e-12);
    CHECK(std::fabs(wald_pvalue(-1.0, 0.5, 0.5) - 0.00269979606326018) <= 1e-12);
    CHECK_THROWS(wald_pvalue(1.0, 0.0, 0.0));
}

TEST_CASE("difference contrast on hand examples") {
    const StudyDataset study(testing::toy_arm(1), testing::shifted_toy_arm(2), 12.0);
    const auto r = contrast_difference(study);
    CHECK(r.point == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.theta1 == doctest::Approx(26.0 / 3.0));
    CHECK(r.theta2 == doctest::Approx(23.0 / 3.0));
    CHECK(r.n1 == 3);
    CHECK(r.n2 == 3);
    const double se1 = std::sqrt(arm_variance(influence_values(study.arm1(), 12.0)) / 3.0);
    const double se2 = std::sqrt(arm_variance(influence_values(study.arm2(), 12.0)) / 3.0);
    CHECK(r.se1 == doctest::Approx(se1));
    CHECK(r.se2 == doctest::Approx(se2));
    CHECK(r.se == doctest::Approx(std::sqrt(se1 * se1 + se2 * se2)));
    CHECK(r.ci_lower == doctest::Approx(1.0 - 1.959963984540054 * r.se));
    CHECK(r.ci_upper == doctest::Approx(1.0 + 1.959963984540054 * r.se));

    const auto mirrored = contrast_difference(StudyDataset(testing::toy_arm(1), relabel(testing::toy_arm(), 2), 12.0));
    CHECK(mirrored.point == 0.0);
    CHECK(mirrored.p_value == 1.0);
}

TEST_CASE("degenerate zero standard error") {
    const ArmDataset a(1, {subject("a", 5, false, {1}), subject("b", 5, false, {1})});
    const ArmDataset b(2, {subject("c", 5, false, {2}), subject("d", 5, false, {2})});
    const auto r = contrast_difference(StudyDataset(a, b, 4.0));
    CHECK(r.se == 0.0);
    CHECK(r.degenerate);
    CHECK(r.point == doctest::Approx(1.0));
    CHECK(r.p_value == 0.0);
    const auto same = contrast_difference(StudyDataset(a, relabel(a, 2), 4.0));
    CHECK(same.degenerate);
    CHECK(same.p_value == 1.0);
}

TEST_CASE("swapping arms negates the difference") {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 100; ++k) {
        const auto a = testing::random_arm(rng, 1, {2, 20});
        const auto b = testing::random_arm(rng, 2, {2, 20});
        const auto r = contrast_difference(StudyDataset(a, b, 6.0));
        const auto s = contrast_difference(StudyDataset(relabel(b, 1), relabel(a, 2), 6.0));
        CHECK(s.point == -r.point);
        CHECK(s.se == r.se);
    }
}

TEST_CASE("Wald test and interval agree") {
    std::mt19937_64 rng(22);
    int checked = 0;
    for (int k = 0; k < 200; ++k) {
        const auto a = testing::random_arm(rng, 1, {5, 30, false});
        const auto b = testing::random_arm(rng, 2, {5, 30, false});
        const StudyDataset study(a, b, 5.0);
        for (double alpha : {0.01, 0.05, 0.10}) {
            ContrastOptions opt;
            opt.alpha = alpha;
            const auto d = contrast_difference(study, opt);
            if (d.se > 0.0) {
                CHECK((d.p_value < alpha) == (d.ci_lower > 0.0 || d.ci_upper < 0.0));
                CHECK(d.ci_upper - d.point == doctest::Approx(d.point - d.ci_lower));
                ++checked;
            }
            if (d.theta1 > 0.0 && d.theta2 > 0.0) {
                const auto q = contrast_ratio(study, opt);
                if (q.log_se > 0.0) {
                    CHECK((q.p_value < alpha) == (q.ci_lower > 1.0 || q.ci_upper < 1.0));
                    CHECK(std::log(q.ci_upper) - std::log(q.point) ==
                          doctest::Approx(std::log(q.point) - std::log(q.ci_lower)));
                }
                CHECK((q.point > 1.0) == (d.point > 0.0));
            }
        }
    }
    CHECK(checked > 500);
}

TEST_CASE("ratio contrast") {
    const auto same = contrast_ratio(StudyDataset(testing::toy_arm(1), relabel(testing::toy_arm(), 2), 12.0));
    CHECK(same.point == 1.0);
    CHECK(same.p_value == 1.0);

    std::vector<SubjectHistory> doubled;
    const auto toy = testing::toy_arm();
    for (auto s : toy.subjects()) {
        auto events = s.events;
        s.events.clear();
        for (const auto& e : events) {
            s.events.push_back(e);
            s.events.push_back(e);
        }
        doubled.push_back(s);
    }
    const StudyDataset study(ArmDataset(1, doubled), relabel(testing::toy_arm(), 2), 12.0);
    const auto r = contrast_ratio(study);
    CHECK(r.point == doctest::Approx(2.0));
    const auto d = contrast_difference(study);
    CHECK(r.log_se == doctest::Approx(std::sqrt(std::pow(d.se1 / d.theta1, 2) + std::pow(d.se2 / d.theta2, 2))));

    const ArmDataset empty(2, {subject("x", 12, false, {})});
    try {
        contrast_ratio(StudyDataset(testing::toy_arm(1), empty, 12.0));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Degenerate);
        CHECK(e.code() == "ratio_undefined");
    }
}

TEST_CASE("Q statistic") {
    const StudyDataset toy(testing::toy_arm(1), testing::shifted_toy_arm(2), 12.0);
    CHECK(ghosh_lin_q(toy) == doctest::Approx(0.0).scale(1.0));
    CHECK(ghosh_lin_q(StudyDataset(testing::toy_arm(1), relabel(testing::toy_arm(), 2), 12.0)) == 0.0);

    // unequal risk sets: arm 1 has 2 subjects, arm 2 has 1; n = 3
    const ArmDataset a(1, {subject("a", 4, false, {1}), subject("b", 10, false, {6})});
    const ArmDataset b(2, {subject("c", 10, false, {2, 8})});
    // u=1: Y1=2, Y2=1, w=(2/2)/(3/3)=1, arm1 dR=1/2 -> +0.5
    // u=2: Y1=2, Y2=1, w=1, arm2 dR=1 -> -1
    // u=6: Y1=1, Y2=1, w=(1/2)/(2/3)=0.75, arm1 dR=1 -> +0.75
    // u=8: w=0.75, arm2 dR=1 -> -0.75
    CHECK(ghosh_lin_q(StudyDataset(a, b, 10.0)) == doctest::Approx(0.5 - 1.0 + 0.75 - 0.75));
    CHECK(ghosh_lin_q(StudyDataset(a, b, 7.0)) == doctest::Approx(0.5 - 1.0 + 0.75));

    std::vector<SubjectHistory> no_events;
    const auto base = testing::toy_arm();
    for (auto s : base.subjects()) {
        s.events.clear();
        no_events.push_back(s);
    }
    const StudyDataset vs_empty(testing::toy_arm(1), ArmDataset(2, no_events), 12.0);
    CHECK(ghosh_lin_q(vs_empty) > 0.0);
    CHECK(contrast_difference(vs_empty).point > 0.0);
}

TEST_CASE("weighted contrast") {
    std::mt19937_64 rng(33);
    for (int k = 0; k < 50; ++k) {
        testing::RandomArmOptions single;
        single.types = 1;
        const StudyDataset one_type(testing::random_arm(rng, 1, single), testing::random_arm(rng, 2, single), 6.0);
        const auto w = weighted_contrast(one_type, {{1, 1.0}});
        const auto d = contrast_difference(one_type);
        CHECK(w.point == doctest::Approx(d.point));
        CHECK(w.se == doctest::Approx(d.se));

        testing::RandomArmOptions two;
        two.types = 2;
        const StudyDataset typed(testing::random_arm(rng, 1, two), testing::random_arm(rng, 2, two), 6.0);
        const auto doubled = weighted_contrast(typed, {{1, 2.0}, {2, 0.0}});
        const auto only_a = weighted_contrast(typed, {{1, 1.0}, {2, 0.0}});
        CHECK(doubled.point == doctest::Approx(2.0 * only_a.point));
        CHECK(doubled.se == doctest::Approx(2.0 * only_a.se));

        // influence values are linear in the weights
        const auto both = weighted_contrast(typed, {{1, 1.0}, {2, 1.0}});
        const auto only_b = weighted_contrast(typed, {{1, 0.0}, {2, 1.0}});
        CHECK(both.point == doctest::Approx(only_a.point + only_b.point));
        CHECK(both.theta1 == doctest::Approx(only_a.theta1 + only_b.theta1));
    }
    CHECK_THROWS_AS(weighted_contrast(StudyDataset(testing::toy_arm(1), testing::shifted_toy_arm(2), 12.0), {{1, 1.0}}),
                    Error);
}

TEST_CASE("death added as a heavier event type") {
    std::vector<SubjectHistory> subjects;
    const auto toy = testing::toy_arm();
    for (auto s : toy.subjects()) {
        for (auto& e : s.events) e.type = 1;
        if (s.terminal) s.events.push_back({s.follow_up, 2});
        subjects.push_back(s);
    }
    const ArmDataset arm(1, subjects);
    const StudyDataset study(arm, relabel(testing::shifted_toy_arm(), 2), 12.0);
    EstimatorOptions eo;
    eo.type_weights = TypeWeights{{1, 1.0}, {2, 2.0}};
    // death at 10 with S(10-) = 1 and Y(10) = 2 adds 2 * (12 - 10) / 2
    CHECK(aumcf::aumcf(arm, 12.0, eo) == doctest::Approx(26.0 / 3.0 + 2.0));
    CHECK_THROWS_AS(weighted_contrast(study, {{1, 1.0}, {2, 2.0}}), Error);  // arm 2 events untyped
}
