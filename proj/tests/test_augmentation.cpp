#include <cmath>
#include <random>

#include "doctest.h"

#include "aumcf/augmentation.hpp"
#include "aumcf/error.hpp"
#include "aumcf/simulation.hpp"
#include "test_support.hpp"

using namespace aumcf;
using testing::subject;

namespace {

ArmDataset with_covariates(const ArmDataset& arm, const std::vector<std::vector<double>>& w) {
    auto subjects = arm.subjects();
    for (std::size_t i = 0; i < subjects.size(); ++i) subjects[i].covariates = w[i];
    return ArmDataset(arm.label(), subjects);
}

StudyDataset random_study(std::mt19937_64& rng, int p, double tau = 6.0) {
    testing::RandomArmOptions o;
    o.min_n = p + 4;
    o.max_n = 40;
    o.integer_times = false;
    o.covariates = p;
    return StudyDataset(testing::random_arm(rng, 1, o), testing::random_arm(rng, 2, o), tau);
}

}  // namespace

TEST_CASE("scalar covariate weights by hand") {
    const auto a = with_covariates(testing::toy_arm(1), {{1.0}, {-2.0}, {4.0}});
    const auto b = with_covariates(testing::shifted_toy_arm(2), {{0.5}, {0.0}, {-1.0}});
    const StudyDataset study(a, b, 12.0);
    const auto inf1 = influence_values(study.arm1(), 12.0);
    const auto inf2 = influence_values(study.arm2(), 12.0);

    const double n = 6.0;
    double gamma = 0.0, sigma = 0.0;
    const std::vector<std::pair<const ArmDataset*, const InfluenceSet*>> arms{{&a, &inf1}, {&b, &inf2}};
    double means[2];
    for (int j = 0; j < 2; ++j) {
        const auto& subjects = arms[j].first->subjects();
        const double nj = static_cast<double>(subjects.size());
        double mean = 0.0;
        for (const auto& s : subjects) mean += s.covariates[0] / nj;
        means[j] = mean;
        for (std::size_t i = 0; i < subjects.size(); ++i) {
            const double d = subjects[i].covariates[0] - mean;
            gamma += (n / nj) / nj * d * arms[j].second->values[i];
            sigma += (n / nj) / nj * d * d;
        }
    }
    const auto cs = augmentation_weights(study, inf1, inf2);
    CHECK(cs.mean1(0) == doctest::Approx(means[0]));
    CHECK(cs.mean2(0) == doctest::Approx(means[1]));
    CHECK(cs.gamma(0) == doctest::Approx(gamma));
    CHECK(cs.sigma_w(0, 0) == doctest::Approx(sigma));
    CHECK(cs.beta(0) == doctest::Approx(gamma / sigma));

    const auto r = augmented_contrast(study);
    const double beta = gamma / sigma;
    CHECK(r.adjusted.point == doctest::Approx(1.0 - beta * (means[0] - means[1])));
    const double var_delta = n * r.unadjusted.se * r.unadjusted.se;
    const double var_aug = std::max(0.0, var_delta - gamma * beta);
    CHECK(r.adjusted.se == doctest::Approx(std::sqrt(var_aug / n)));
    REQUIRE(r.beta.size() == 1);
    CHECK(r.beta[0] == doctest::Approx(beta));
    CHECK(r.unadjusted.point == doctest::Approx(1.0));
}

TEST_CASE("constant covariate is singular") {
    const auto a = with_covariates(testing::toy_arm(1), {{3.0}, {3.0}, {3.0}});
    const auto b = with_covariates(testing::shifted_toy_arm(2), {{3.0}, {3.0}, {3.0}});
    try {
        augmented_contrast(StudyDataset(a, b, 12.0));
        FAIL("expected singular covariates");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Degenerate);
        CHECK(e.code() == "singular_covariates");
    }
}

TEST_CASE("collinear covariates need a ridge") {
    std::mt19937_64 rng(3);
    auto study = random_study(rng, 1);
    auto stretch = [](const ArmDataset& arm) {
        auto subjects = arm.subjects();
        for (auto& s : subjects) s.covariates.push_back(2.0 * s.covariates[0]);
        return ArmDataset(arm.label(), subjects);
    };
    const StudyDataset collinear(stretch(study.arm1()), stretch(study.arm2()), study.tau());
    CHECK_THROWS_AS(augmented_contrast(collinear), Error);
    AugmentationOptions opt;
    opt.ridge = 1e-6;
    const auto r = augmented_contrast(collinear, opt);
    CHECK(r.adjusted.se <= r.unadjusted.se);
    // the ridge solution splits the weight along the collinear direction
    const auto single = augmented_contrast(study);
    CHECK(r.beta[0] + 2.0 * r.beta[1] == doctest::Approx(single.beta[0]).epsilon(1e-4));
}

TEST_CASE("too few subjects for the covariate dimension") {
    const auto a = with_covariates(testing::toy_arm(1), {{1, 2, 3}, {0, 1, 0}, {2, 2, 2}});
    const auto b = with_covariates(testing::shifted_toy_arm(2), {{1, 0, 3}, {0, 1, 1}, {2, 5, 2}});
    try {
        augmented_contrast(StudyDataset(a, b, 12.0));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == "too_few_subjects");
    }
}

TEST_CASE("beta solves the normal equations") {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 50; ++k) {
        const auto study = random_study(rng, 1 + k % 3);
        const auto inf1 = influence_values(study.arm1(), study.tau());
        const auto inf2 = influence_values(study.arm2(), study.tau());
        const auto cs = augmentation_weights(study, inf1, inf2);
        const Eigen::VectorXd residual = cs.sigma_w * cs.beta - cs.gamma;
        CHECK(residual.norm() <= 1e-8 * std::max(cs.gamma.norm(), 1e-12));
        CHECK((cs.sigma_w - cs.sigma_w.transpose()).norm() == 0.0);
    }
}

TEST_CASE("balanced covariate means leave the point unchanged") {
    const auto a = with_covariates(testing::toy_arm(1), {{1.0}, {-1.0}, {3.0}});
    const auto b = with_covariates(testing::shifted_toy_arm(2), {{2.0}, {0.0}, {1.0}});
    const auto r = augmented_contrast(StudyDataset(a, b, 12.0));
    CHECK(r.adjusted.point == doctest::Approx(r.unadjusted.point));
}

TEST_CASE("adjustment never increases the standard error") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 200; ++k) {
        const auto r = augmented_contrast(random_study(rng, 1 + k % 3));
        CHECK(r.adjusted.se <= r.unadjusted.se);
        CHECK(r.relative_efficiency >= 1.0);
    }
}

TEST_CASE("affine maps of the covariates do not move the point estimate") {
    std::mt19937_64 rng(6);
    for (int k = 0; k < 50; ++k) {
        const auto study = random_study(rng, 2);
        auto map = [](const ArmDataset& arm) {
            auto subjects = arm.subjects();
            for (auto& s : subjects) {
                const double w0 = s.covariates[0], w1 = s.covariates[1];
                s.covariates = {3.0 * w0 - w1 + 5.0, 0.5 * w0 + 2.0 * w1 - 1.0};
            }
            return ArmDataset(arm.label(), subjects);
        };
        const StudyDataset mapped(map(study.arm1()), map(study.arm2()), study.tau());
        const auto r = augmented_contrast(study);
        const auto m = augmented_contrast(mapped);
        CHECK(testing::rel_close(m.adjusted.point, r.adjusted.point, 1e-8, 1e-8));
        CHECK(testing::rel_close(m.adjusted.se, r.adjusted.se, 1e-8, 1e-8));
    }
}

TEST_CASE("no covariates means no adjustment") {
    const StudyDataset study(testing::toy_arm(1), testing::shifted_toy_arm(2), 12.0);
    const auto r = augmented_contrast(study);
    CHECK(r.adjusted.point == r.unadjusted.point);
    CHECK(r.adjusted.se == r.unadjusted.se);
    CHECK(r.adjusted.p_value == r.unadjusted.p_value);
    CHECK(r.beta.empty());
    CHECK_THROWS_AS(augmentation_weights(study, influence_values(study.arm1(), 12.0),
                                         influence_values(study.arm2(), 12.0)),
                    Error);
}

TEST_CASE("an unrelated covariate gets a small weight") {
    ScenarioConfig c;
    c.covariate_mode = CovariateMode::Uninformative;
    c.n_per_arm = 2000;
    const auto study = generate_dataset(c, 0);
    const auto r = augmented_contrast(study);
    CHECK(std::fabs(r.beta[0]) < 0.1);
    CHECK(r.relative_efficiency < 1.02);
}
