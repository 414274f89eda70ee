#include "aumcf/augmentation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "aumcf/error.hpp"

namespace aumcf {

namespace {

Eigen::MatrixXd covariate_matrix(const ArmDataset& arm) {
    const auto p = static_cast<Eigen::Index>(arm.covariate_dim());
    Eigen::MatrixXd w(static_cast<Eigen::Index>(arm.size()), p);
    Eigen::Index i = 0;
    for (const auto& s : arm.subjects()) {
        for (Eigen::Index k = 0; k < p; ++k) w(i, k) = s.covariates[static_cast<std::size_t>(k)];
        ++i;
    }
    return w;
}

std::string describe_directions(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& eig, double threshold) {
    std::ostringstream os;
    os.precision(4);
    bool first = true;
    for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
        if (eig.eigenvalues()(k) > threshold) continue;
        os << (first ? "" : "; ") << '(';
        for (Eigen::Index r = 0; r < eig.eigenvectors().rows(); ++r) {
            os << (r ? ", " : "") << eig.eigenvectors()(r, k);
        }
        os << ')';
        first = false;
    }
    return os.str();
}

}  // namespace

CovariateSummary augmentation_weights(const StudyDataset& study, const InfluenceSet& inf1,
                                      const InfluenceSet& inf2, std::optional<double> ridge) {
    const auto p = static_cast<Eigen::Index>(study.arm1().covariate_dim());
    if (p == 0) fail_validation("no_covariates", "augmentation requires at least one covariate");
    for (int j : {1, 2}) {
        if (study.arm(j).size() < static_cast<std::size_t>(p) + 1) {
            fail_validation("too_few_subjects", "arm " + std::to_string(j) + " needs at least p + 1 subjects");
        }
    }
    if (inf1.values.size() != study.arm1().size() || inf2.values.size() != study.arm2().size()) {
        throw std::invalid_argument("augmentation_weights: influence sets do not match the arms");
    }

    const double n = static_cast<double>(study.n());
    CovariateSummary out;
    out.gamma = Eigen::VectorXd::Zero(p);
    out.sigma_w = Eigen::MatrixXd::Zero(p, p);
    for (int j : {1, 2}) {
        const Eigen::MatrixXd w = covariate_matrix(study.arm(j));
        const double nj = static_cast<double>(w.rows());
        const Eigen::VectorXd mean = w.colwise().mean();
        const Eigen::MatrixXd centered = w.rowwise() - mean.transpose();
        const auto& psi_values = (j == 1 ? inf1 : inf2).values;
        const Eigen::Map<const Eigen::VectorXd> psi(psi_values.data(), static_cast<Eigen::Index>(psi_values.size()));
        const double scale = (n / nj) / nj;
        out.gamma += scale * (centered.transpose() * psi);
        out.sigma_w += scale * (centered.transpose() * centered);
        (j == 1 ? out.mean1 : out.mean2) = mean;
    }
    out.sigma_w = 0.5 * (out.sigma_w + out.sigma_w.transpose());

    Eigen::MatrixXd system = out.sigma_w;
    if (ridge) {
        if (!(*ridge >= 0.0)) fail_validation("invalid_ridge", "ridge must be nonnegative");
        system += (*ridge * out.sigma_w.trace() / static_cast<double>(p)) * Eigen::MatrixXd::Identity(p, p);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(system);
    const double largest = eig.eigenvalues().maxCoeff();
    const double threshold = 1e-10 * std::max(largest, 0.0);
    if (!(largest > 0.0) || eig.eigenvalues().minCoeff() <= threshold) {
        throw Error(ErrorKind::Degenerate, "singular_covariates",
                    "covariate covariance matrix is numerically singular along direction(s) " +
                        describe_directions(eig, threshold));
    }
    out.beta = system.ldlt().solve(out.gamma);
    return out;
}

AugmentedResult augmented_contrast(const StudyDataset& study, const AugmentationOptions& options) {
    const EstimatorOptions eo{options.convention, std::nullopt};
    const auto s1 = summarize_arm(study.arm1(), eo);
    const auto s2 = summarize_arm(study.arm2(), eo);
    const double tau = study.tau();
    const auto inf1 = influence_values(study.arm1(), s1, tau);
    const auto inf2 = influence_values(study.arm2(), s2, tau);

    AugmentedResult out;
    out.unadjusted = difference_from_influence(aumcf(s1, tau), inf1, aumcf(s2, tau), inf2, options.alpha);
    out.adjusted = out.unadjusted;
    if (study.arm1().covariate_dim() == 0) return out;

    const auto cs = augmentation_weights(study, inf1, inf2, options.ridge);
    out.beta.assign(cs.beta.data(), cs.beta.data() + cs.beta.size());

    const double n = static_cast<double>(study.n());
    const double sigma_delta = n * out.unadjusted.se * out.unadjusted.se;
    double sigma_aug = sigma_delta - cs.gamma.dot(cs.beta);
    if (sigma_aug < 0.0) {
        sigma_aug = 0.0;
        out.variance_clamped = true;
    }

    ContrastResult& adj = out.adjusted;
    adj.notes.clear();
    adj.degenerate = false;
    adj.point = out.unadjusted.point - cs.beta.dot(cs.mean1 - cs.mean2);
    adj.se = std::sqrt(sigma_aug / n);
    const double zq = normal_quantile(1.0 - options.alpha / 2.0);
    adj.ci_lower = adj.point - zq * adj.se;
    adj.ci_upper = adj.point + zq * adj.se;
    if (adj.se > 0.0) {
        adj.p_value = wald_pvalue(adj.point, adj.se, 0.0);
    } else {
        adj.degenerate = true;
        adj.p_value = adj.point == 0.0 ? 1.0 : 0.0;
        adj.notes.push_back("zero standard error");
    }
    if (out.variance_clamped) adj.notes.push_back("negative plug-in adjusted variance clamped to zero");
    adj.notes.push_back("covariate augmented");

    out.relative_efficiency = adj.se > 0.0 ? std::pow(out.unadjusted.se / adj.se, 2)
                                           : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace aumcf
