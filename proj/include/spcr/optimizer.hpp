#pragma once

#include <vector>

#include <Eigen/Dense>

#include "spcr/family.hpp"
#include "spcr/linalg.hpp"

namespace spcr {

struct HyperParams {
    double w = 0.01;            // PCA-loss weight, > 0
    double xi = 0.001;          // ridge share of the loading penalty, in [0,1)
    double lambda_beta = 0.0;   // loading penalty level
    double lambda_gamma = 0.0;  // coefficient L1 penalty
    double q = 0.0;             // adaptive exponent; 0 = plain fit
    Eigen::MatrixXd lambda_entry; // optional p x k per-entry L1 weights; empty = all lambda_beta

    bool has_entry_weights() const { return lambda_entry.size() > 0; }
};

/// Model parameters. Single-response fits use one column of `coef` and a
/// length-1 `intercept`; the symmetric multiclass model uses G of each.
struct SpcrParams {
    Eigen::MatrixXd loadings;  // B, p x k
    Eigen::MatrixXd rotation;  // A, p x k with orthonormal columns
    Eigen::VectorXd intercept; // gamma0, size 1 or G
    Eigen::MatrixXd coef;      // gamma, k x 1 or k x G

    Eigen::Index n_components() const { return loadings.cols(); }
    Eigen::Index n_blocks() const { return coef.cols(); }
};

struct FitControls {
    int max_outer = 100;
    double tol = 1e-5;            // relative change of the exact objective
    int max_cycles_per_outer = 1; // coordinate cycles per re-linearization
};

struct FitResult {
    SpcrParams params;
    std::vector<double> objective_trace;               // exact objective per outer iteration
    std::vector<std::vector<double>> surrogate_trace;  // per outer: [start, after each phase]
    int n_outer = 0;
    bool converged = false;
};

/// Per-linearization caches. `omega`, `z` and the residuals carry one
/// column per response block (1 for a single response, G for multiclass);
/// `scores` = X B and `ystar` = X A are shared across blocks.
struct WorkingState {
    Eigen::MatrixXd omega;   // n x G
    Eigen::MatrixXd z;       // n x G
    Eigen::MatrixXd scores;  // n x k
    Eigen::MatrixXd ystar;   // n x k
    Eigen::MatrixXd res;     // n x G: z - intercept_g - scores * coef_g
    Eigen::MatrixXd wx2;     // p x G: sum_i omega_ig x_il^2
    Eigen::VectorXd sx2;     // p:     sum_i x_il^2
    SpcrParams params;
    HyperParams hyper;       // lambda_entry resolved to p x k
};

/// PCA warm start: loadings = top-k right singular vectors (sign-fixed),
/// rotation = loadings, coef = 0, intercept = canonical link of the
/// response mean.
SpcrParams init_params(const CenteredDesign& X, const Eigen::VectorXd& y,
                       const Family& fam, int k);

/// Multiclass warm start; Y is the n x G one-hot indicator matrix and the
/// intercepts are median-centered log class frequencies.
SpcrParams init_params_multiclass(const CenteredDesign& X, const Eigen::MatrixXd& Y, int k);

/// Builds all caches at the given parameters. `Y` has one column per
/// response block.
WorkingState make_working_state(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                const Family& fam, const SpcrParams& params,
                                const HyperParams& hyper);

/// Soft-thresholded argument of the loading update before thresholding;
/// exposed because the lambda-grid construction needs it at the warm start.
double loading_update_numerator(const WorkingState& s, const Eigen::MatrixXd& X,
                                Eigen::Index l, Eigen::Index j);

/// Exact 1-D minimizers over the surrogate-plus-penalty; each updates the
/// parameter and the incremental caches and returns the new value.
double update_loading_entry(WorkingState& s, const Eigen::MatrixXd& X,
                            Eigen::Index l, Eigen::Index j);
double update_coef_entry(WorkingState& s, Eigen::Index j, Eigen::Index g = 0);
double update_intercept(WorkingState& s, Eigen::Index g = 0);

/// Procrustes step for the rotation; refreshes ystar.
void update_rotation(WorkingState& s, const Eigen::MatrixXd& X);

/// Weighted-LS surrogate + PCA loss + penalties at the state's parameters.
double surrogate_value(const WorkingState& s, const Eigen::MatrixXd& X);

/// Exact penalized objective: negative log-likelihood + w * PCA
/// reconstruction loss + elastic-net loading penalty + L1 coefficient
/// penalty. The Gaussian likelihood keeps its normalizing constant, so
/// objective values are comparable across dispersion settings.
double objective_value(const SpcrParams& params, const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& y, const Family& fam,
                       const HyperParams& hyper);
double objective_value_multiclass(const SpcrParams& params, const Eigen::MatrixXd& X,
                                  const Eigen::MatrixXd& Y, const HyperParams& hyper);

/// Alternating IRLS / coordinate-descent fit: re-linearize, run
/// max_cycles_per_outer coordinate cycles (all loadings column-major, all
/// coefs, intercept, rotation), stop when the exact objective stalls.
FitResult fit(const CenteredDesign& X, const Eigen::VectorXd& y, const Family& fam,
              const HyperParams& hyper, int k, const FitControls& controls = {});

/// Two-stage adaptive fit: plain fit, then per-entry weights
/// lambda_beta / max(|loading|, 1e-4)^q. q == 0 short-circuits to fit().
FitResult fit_adaptive(const CenteredDesign& X, const Eigen::VectorXd& y, const Family& fam,
                       const HyperParams& hyper, int k, const FitControls& controls = {});

/// Symmetric multiclass fit over the n x G indicator matrix; rows of the
/// coefficient matrix are median-centered (and intercepts mean-centered)
/// after every outer iteration for identification.
FitResult fit_multiclass(const CenteredDesign& X, const Eigen::MatrixXd& Y,
                         const HyperParams& hyper, int k, const FitControls& controls = {});

/// Identification step used by fit_multiclass; exposed for tests.
void median_center(SpcrParams& params);

} // namespace spcr
