#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aumcf/core.hpp"
#include "aumcf/inference.hpp"

namespace aumcf {

/// Plug-in ingredients of the covariate-augmented contrast.
struct CovariateSummary {
    Eigen::VectorXd mean1;    // arm-1 covariate mean
    Eigen::VectorXd mean2;    // arm-2 covariate mean
    Eigen::VectorXd gamma;    // sum_j (n/n_j) cov_j(W, Psi)
    Eigen::MatrixXd sigma_w;  // sum_j (n/n_j) cov_j(W)
    Eigen::VectorXd beta;     // solves sigma_w * beta = gamma
};

/// Relative ridge: adds ridge * trace(sigma_w) / p * I before solving.
struct AugmentationOptions {
    double alpha = 0.05;
    SurvivalConvention convention = SurvivalConvention::LeftLimit;
    std::optional<double> ridge;
};

/// Throws Error(Degenerate, "singular_covariates") when the smallest eigenvalue
/// of sigma_w is at most 1e-10 times the largest; the message lists the
/// offending directions.
CovariateSummary augmentation_weights(const StudyDataset& study, const InfluenceSet& inf1,
                                      const InfluenceSet& inf2, std::optional<double> ridge = std::nullopt);

struct AugmentedResult {
    ContrastResult adjusted;
    ContrastResult unadjusted;
    std::vector<double> beta;
    double relative_efficiency = 1.0;  // (se_unadj / se_adj)^2
    bool variance_clamped = false;
};

/// Delta_hat - beta_hat' (W1_bar - W2_bar), with variance Sigma_Delta - gamma' beta.
/// With no covariates the adjusted result equals the unadjusted one.
AugmentedResult augmented_contrast(const StudyDataset& study, const AugmentationOptions& options = {});

}  // namespace aumcf
