#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "spcr/optimizer.hpp"

namespace spcr {

struct CvSpec {
    int n_folds = 5;
    std::uint64_t seed = 0;
    std::vector<std::vector<int>> folds;  // held-out index sets; built from seed when empty
    std::vector<double> grid_beta;        // descending; built via lambda_grid when empty
    std::vector<double> grid_gamma;       // descending
    int grid_points = 10;                 // per axis, when grids are built here
};

struct LambdaGrids {
    std::vector<double> beta;
    std::vector<double> gamma;
    bool degenerate = false; // all-zero design: grids collapse to {0}
};

struct CvResult {
    Eigen::MatrixXd cv_surface;  // grid_beta.size() x grid_gamma.size()
    int best_row = 0;            // index into grid_beta
    int best_col = 0;            // index into grid_gamma
    double best_lambda_beta = 0.0;
    double best_lambda_gamma = 0.0;
    double best_value = 0.0;
    FitResult refit;                 // full-data fit at the best pair
    Eigen::VectorXd refit_col_means; // centering used for the refit
    Eigen::MatrixXd heldout_kappa;   // n x G held-out predictors at the best pair
    Eigen::VectorXd fold_dispersion; // per-fold dispersion at the best pair (1 unless gaussian)
    CvSpec spec;                     // folds and grids actually used
};

/// Balanced random partition of {0..n-1} into K folds (sizes differ by at
/// most one), deterministic in the seed.
std::vector<std::vector<int>> make_folds(int n, int K, std::uint64_t seed);

/// Class-stratified variant used for multiclass responses when every class
/// has at least K members; falls back to the plain partition otherwise.
std::vector<std::vector<int>> make_stratified_folds(const std::vector<int>& labels, int K,
                                                    std::uint64_t seed);

/// Held-out negative log-likelihood criterion, averaged over folds. X is
/// taken as supplied; each training block is centered internally and its
/// means are applied to the held-out rows. For the gaussian family the
/// fold dispersion is the training-residual mean square.
double cv_criterion_glm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Family& fam,
                        const HyperParams& hyper, int k, const CvSpec& cv,
                        const FitControls& controls = {});

/// Multiclass criterion: the per-class binary logistic held-out terms
/// summed over classes.
double cv_criterion_multiclass(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                               const HyperParams& hyper, int k, const CvSpec& cv,
                               const FitControls& controls = {});

/// glmnet-style grids: each axis descends log-linearly over three decades
/// from the smallest level that keeps the corresponding block inactive at
/// the warm start. X must be centered. hyper supplies w and xi.
LambdaGrids lambda_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Family& fam,
                        int k, int n_points = 10, const HyperParams& hyper = {});
LambdaGrids lambda_grid_multiclass(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, int k,
                                   int n_points = 10, const HyperParams& hyper = {});

/// Scans the (lambda_beta, lambda_gamma) surface with shared folds, picks
/// the minimizer (ties to larger penalties), refits on the full data.
/// base supplies w, xi and q (q > 0 switches every fit to the adaptive
/// two-stage variant). Grid points whose fold fits fail score +inf.
CvResult select_hyperparameters(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Family& fam, int k, CvSpec cv,
                                const HyperParams& base = {},
                                const FitControls& controls = {});
CvResult select_hyperparameters_multiclass(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                           int k, CvSpec cv, const HyperParams& base = {},
                                           const FitControls& controls = {});

} // namespace spcr
