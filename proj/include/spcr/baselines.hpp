#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spcr/family.hpp"
#include "spcr/simulate.hpp"

namespace spcr {

/// Two-stage principal component regression: PCA loadings from the
/// centered design, then an unpenalized GLM on the leading scores.
struct PcrModel {
    Eigen::MatrixXd loadings;   // p x k right singular vectors
    Eigen::VectorXd coef;       // k score coefficients
    double intercept = 0.0;
    Eigen::VectorXd col_means;  // centering applied before scoring
    Family family;
    double dispersion = 1.0;    // gaussian: training-residual mean square
    bool converged = true;
    int n_iterations = 0;
    std::vector<double> deviance_trace;

    double predict_kappa(const Eigen::VectorXd& x) const {
        return intercept + coef.dot(loadings.transpose() * (x - col_means));
    }
};

/// Fits PCR with IRLS on the score block; stops when the deviance change
/// drops below 1e-8 (max 50 iterations; a diverging fit is capped and
/// flagged, not thrown). k = 0 yields the intercept-only model.
PcrModel fit_pcr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Family& fam, int k);

/// Monte Carlo estimate of the negative expected log-likelihood of a
/// fitted predictor under the generating process: m fresh draws from
/// `generator`, scored through `kappa_of_x`. Deterministic in the seed.
double expected_loglik(const std::function<double(const Eigen::VectorXd&)>& kappa_of_x,
                       const Family& fam, SimCase generator, int m, std::uint64_t seed);

struct SelectionRates {
    std::optional<double> tpr;  // absent when the truth has no nonzeros
    std::optional<double> tnr;  // absent when the truth has no zeros
};

/// Support recovery of the composite coefficients against the truth;
/// entries with |value| > 1e-10 count as selected.
SelectionRates tpr_tnr(const Eigen::VectorXd& zeta_hat, const Eigen::VectorXd& zeta_star);

/// Composite coefficients on the original variables: loadings * coef.
Eigen::VectorXd composite_coefficients(const Eigen::MatrixXd& loadings,
                                       const Eigen::VectorXd& coef);

struct MetricReport {
    double el_mean = 0.0;
    double el_sd = 0.0;  // NaN when undefined (single replication)
    std::optional<double> tpr_mean, tpr_sd;
    std::optional<double> tnr_mean, tnr_sd;
    // alternate selection reading: a variable counts as selected when any
    // loading entry in its row is nonzero
    std::optional<double> tpr_union_mean, tpr_union_sd;
    std::optional<double> tnr_union_mean, tnr_union_sd;
    int n_reps = 0;
};

struct MeanSd {
    double mean;
    double sd;  // NaN for fewer than 2 values
};
MeanSd mean_sd(const std::vector<double>& values);

} // namespace spcr
