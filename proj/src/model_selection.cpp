#include "spcr/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "spcr/parallel.hpp"
#include "spcr/rng.hpp"

namespace spcr {

namespace {

std::vector<int> shuffled_indices(int n, std::uint64_t seed) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    SplitMix64 rng(seed);
    for (int i = n - 1; i > 0; --i)
        std::swap(idx[i], idx[static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1))]);
    return idx;
}

std::vector<std::vector<int>> deal_round_robin(const std::vector<int>& order, int K) {
    std::vector<std::vector<int>> folds(K);
    for (std::size_t i = 0; i < order.size(); ++i)
        folds[i % K].push_back(order[i]);
    return folds;
}

std::vector<int> complement_of(const std::vector<int>& heldout, int n) {
    std::vector<char> mask(n, 0);
    for (int i : heldout) mask[i] = 1;
    std::vector<int> train;
    train.reserve(n - static_cast<int>(heldout.size()));
    for (int i = 0; i < n; ++i)
        if (!mask[i]) train.push_back(i);
    return train;
}

struct PointEval {
    double cv_value = 0.0;
    Eigen::MatrixXd heldout_kappa;   // n x G
    Eigen::VectorXd fold_dispersion; // per fold; 1 unless gaussian
};

FitResult fit_dispatch(const CenteredDesign& cd, const Eigen::MatrixXd& Yresp,
                       const Family& fam, const HyperParams& hyper, int k,
                       const FitControls& controls) {
    if (fam.is_multiclass()) return fit_multiclass(cd, Yresp, hyper, k, controls);
    const Eigen::VectorXd y = Yresp.col(0);
    if (hyper.q > 0.0) return fit_adaptive(cd, y, fam, hyper, k, controls);
    return fit(cd, y, fam, hyper, k, controls);
}

PointEval evaluate_cv_point(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Yresp,
                            const Family& fam, const HyperParams& hyper, int k,
                            const std::vector<std::vector<int>>& folds,
                            const FitControls& controls) {
    const int n = static_cast<int>(X.rows());
    const Eigen::Index G = Yresp.cols();
    const int K = static_cast<int>(folds.size());

    PointEval out;
    out.heldout_kappa.setConstant(n, G, std::numeric_limits<double>::quiet_NaN());
    out.fold_dispersion.setOnes(K);

    double total = 0.0;
    for (int f = 0; f < K; ++f) {
        const std::vector<int>& test = folds[f];
        const std::vector<int> train = complement_of(test, n);
        FitResult fold_fit;
        CenteredDesign cd;
        try {
            cd = center_columns(X(train, Eigen::all));
            fold_fit = fit_dispatch(cd, Yresp(train, Eigen::all), fam, hyper, k, controls);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "cv fold " << f << ": " << e.what();
            throw NumericError(msg.str());
        }
        const SpcrParams& params = fold_fit.params;

        double phi_hat = 1.0;
        if (fam.kind == FamilyKind::gaussian) {
            const Eigen::VectorXd kappa_train =
                ((cd.X * params.loadings) * params.coef.col(0)).array() + params.intercept(0);
            phi_hat = std::max((Yresp(train, 0) - kappa_train).squaredNorm() /
                                   static_cast<double>(train.size()),
                               1e-12);
        }
        out.fold_dispersion(f) = phi_hat;
        const Family eval_fam =
            fam.kind == FamilyKind::gaussian ? Family::gaussian(phi_hat) : fam;

        const Eigen::MatrixXd Xte_centered =
            X(test, Eigen::all).rowwise() - cd.col_means.transpose();
        const Eigen::MatrixXd score_te = Xte_centered * params.loadings;
        for (Eigen::Index g = 0; g < G; ++g) {
            const Eigen::VectorXd kappa =
                (score_te * params.coef.col(g)).array() + params.intercept(g);
            for (std::size_t t = 0; t < test.size(); ++t) {
                out.heldout_kappa(test[t], g) = kappa(static_cast<Eigen::Index>(t));
                total += log_likelihood(eval_fam, Yresp(test[t], g),
                                        kappa(static_cast<Eigen::Index>(t)));
            }
        }
    }
    out.cv_value = -total / static_cast<double>(K);
    return out;
}

std::vector<std::vector<int>> resolve_folds(const CvSpec& cv, int n,
                                            const std::vector<int>* labels) {
    if (!cv.folds.empty()) return cv.folds;
    if (cv.n_folds < 2 || cv.n_folds > n)
        throw InputError("cv: fold count must be in [2, n]");
    if (labels) return make_stratified_folds(*labels, cv.n_folds, cv.seed);
    return make_folds(n, cv.n_folds, cv.seed);
}

std::vector<double> descending_grid(double lmax, int n_points) {
    std::vector<double> g(n_points);
    for (int i = 0; i < n_points; ++i)
        g[i] = lmax * std::pow(10.0, -3.0 * i / (n_points - 1));
    return g;
}

LambdaGrids grid_impl(const Eigen::MatrixXd& Xc, const Eigen::MatrixXd& Yresp,
                      const Family& fam, int k, int n_points, const HyperParams& hyper) {
    if (n_points < 2) throw InputError("lambda_grid: need at least 2 points per axis");
    LambdaGrids grids;
    if (Xc.cwiseAbs().maxCoeff() == 0.0) {
        grids.beta = {0.0};
        grids.gamma = {0.0};
        grids.degenerate = true;
        return grids;
    }
    CenteredDesign cd{Xc, Eigen::VectorXd::Zero(Xc.cols())};
    const SpcrParams start = fam.is_multiclass()
                                 ? init_params_multiclass(cd, Yresp, k)
                                 : init_params(cd, Yresp.col(0), fam, k);
    const WorkingState s = make_working_state(Xc, Yresp, fam, start, hyper);

    // Smallest level keeping every coefficient at zero in its first update:
    // max |2 sum_i omega z x*_ij| over components and blocks.
    const Eigen::MatrixXd num_gamma =
        2.0 * s.scores.transpose() * s.omega.cwiseProduct(s.z);
    double lmax_gamma = num_gamma.cwiseAbs().maxCoeff();

    // Loading level: maximum update numerator the warm start actually
    // encounters. The coefficients start at zero, so only the PCA block
    // drives the sweep; entries die in column-major order and every
    // already-zeroed prefix feeds cross terms into the next numerator.
    // The zero state must then persist, which brings in the completed
    // rotation columns (canonical basis vectors).
    const Eigen::Index p = Xc.cols();
    const Eigen::MatrixXd XtX = Xc.transpose() * Xc;
    double lmax_beta = 0.0;
    for (Eigen::Index j = 0; j < start.loadings.cols(); ++j) {
        Eigen::VectorXd zeroed_prefix = Eigen::VectorXd::Zero(p);
        for (Eigen::Index l = 0; l < p; ++l) {
            const double num = 2.0 * hyper.w *
                               (XtX.row(l).dot(zeroed_prefix) +
                                start.loadings(l, j) * XtX(l, l));
            lmax_beta = std::max(lmax_beta, std::abs(num));
            zeroed_prefix(l) = start.loadings(l, j);
        }
    }
    for (Eigen::Index m = 0; m < start.loadings.cols(); ++m)
        for (Eigen::Index l = 0; l < p; ++l)
            lmax_beta = std::max(lmax_beta, 2.0 * hyper.w * std::abs(XtX(l, m)));
    lmax_beta /= (1.0 - hyper.xi);
    // the binding numerator recomputes through a different summation order
    // inside the sweep; a relative nudge keeps the threshold on the zero
    // side of the round-off
    lmax_beta *= 1.0 + 1e-9;

    grids.beta = descending_grid(lmax_beta, n_points);
    grids.gamma = descending_grid(lmax_gamma, n_points);
    return grids;
}

CvResult select_impl(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Yresp, const Family& fam,
                     int k, CvSpec cv, const HyperParams& base, const FitControls& controls,
                     const std::vector<int>* labels) {
    const int n = static_cast<int>(X.rows());
    const CenteredDesign full = center_columns(X);
    if (cv.grid_beta.empty() || cv.grid_gamma.empty()) {
        const LambdaGrids grids =
            grid_impl(full.X, Yresp, fam, k, cv.grid_points, base);
        if (cv.grid_beta.empty()) cv.grid_beta = grids.beta;
        if (cv.grid_gamma.empty()) cv.grid_gamma = grids.gamma;
    }
    cv.folds = resolve_folds(cv, n, labels);

    const int nb = static_cast<int>(cv.grid_beta.size());
    const int ng = static_cast<int>(cv.grid_gamma.size());
    CvResult result;
    result.cv_surface.setConstant(nb, ng, std::numeric_limits<double>::infinity());
    std::vector<PointEval> evals(static_cast<std::size_t>(nb) * ng);

    parallel_for(nb * ng, [&](int t) {
        const int i = t / ng;
        const int j = t % ng;
        HyperParams hyper = base;
        hyper.lambda_entry.resize(0, 0);
        hyper.lambda_beta = cv.grid_beta[i];
        hyper.lambda_gamma = cv.grid_gamma[j];
        try {
            evals[t] = evaluate_cv_point(X, Yresp, fam, hyper, k, cv.folds, controls);
            result.cv_surface(i, j) = evals[t].cv_value;
        } catch (const std::exception&) {
            // failed grid point stays at +inf
        }
    });

    // grids descend, so scanning order implements the tie-break toward
    // larger penalties
    int bi = 0, bj = 0;
    double bv = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < ng; ++j)
            if (result.cv_surface(i, j) < bv) {
                bv = result.cv_surface(i, j);
                bi = i;
                bj = j;
            }
    if (!std::isfinite(bv))
        throw NumericError("select_hyperparameters: every grid point failed");

    result.best_row = bi;
    result.best_col = bj;
    result.best_lambda_beta = cv.grid_beta[bi];
    result.best_lambda_gamma = cv.grid_gamma[bj];
    result.best_value = bv;
    result.heldout_kappa = evals[static_cast<std::size_t>(bi) * ng + bj].heldout_kappa;
    result.fold_dispersion = evals[static_cast<std::size_t>(bi) * ng + bj].fold_dispersion;

    HyperParams best = base;
    best.lambda_entry.resize(0, 0);
    best.lambda_beta = result.best_lambda_beta;
    best.lambda_gamma = result.best_lambda_gamma;
    result.refit = fit_dispatch(full, Yresp, fam, best, k, controls);
    result.refit_col_means = full.col_means;
    result.spec = std::move(cv);
    return result;
}

} // namespace

std::vector<std::vector<int>> make_folds(int n, int K, std::uint64_t seed) {
    if (K < 2 || K > n) throw InputError("make_folds: need 2 <= K <= n");
    return deal_round_robin(shuffled_indices(n, seed), K);
}

std::vector<std::vector<int>> make_stratified_folds(const std::vector<int>& labels, int K,
                                                    std::uint64_t seed) {
    const int n = static_cast<int>(labels.size());
    if (K < 2 || K > n) throw InputError("make_stratified_folds: need 2 <= K <= n");
    const int G = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<int>> by_class(G);
    for (int i = 0; i < n; ++i) {
        if (labels[i] < 0) throw InputError("make_stratified_folds: negative label");
        by_class[labels[i]].push_back(i);
    }
    for (const auto& cls : by_class)
        if (!cls.empty() && static_cast<int>(cls.size()) < K)
            return make_folds(n, K, seed); // too small to stratify

    SplitMix64 rng(seed);
    std::vector<std::vector<int>> folds(K);
    int cursor = 0;
    for (auto& cls : by_class) {
        for (int i = static_cast<int>(cls.size()) - 1; i > 0; --i)
            std::swap(cls[i], cls[static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1))]);
        for (int idx : cls) folds[cursor++ % K].push_back(idx);
    }
    return folds;
}

double cv_criterion_glm(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Family& fam,
                        const HyperParams& hyper, int k, const CvSpec& cv,
                        const FitControls& controls) {
    if (fam.is_multiclass())
        throw InputError("cv_criterion_glm: use cv_criterion_multiclass");
    const auto folds = resolve_folds(cv, static_cast<int>(X.rows()), nullptr);
    return evaluate_cv_point(X, y, fam, hyper, k, folds, controls).cv_value;
}

double cv_criterion_multiclass(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                               const HyperParams& hyper, int k, const CvSpec& cv,
                               const FitControls& controls) {
    const Family fam = Family::multiclass(static_cast<int>(Y.cols()));
    std::vector<int> labels(X.rows());
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        Eigen::Index g;
        Y.row(i).maxCoeff(&g);
        labels[i] = static_cast<int>(g);
    }
    const auto folds = resolve_folds(cv, static_cast<int>(X.rows()), &labels);
    return evaluate_cv_point(X, Y, fam, hyper, k, folds, controls).cv_value;
}

LambdaGrids lambda_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Family& fam,
                        int k, int n_points, const HyperParams& hyper) {
    if (fam.is_multiclass())
        throw InputError("lambda_grid: use lambda_grid_multiclass");
    return grid_impl(X, y, fam, k, n_points, hyper);
}

LambdaGrids lambda_grid_multiclass(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, int k,
                                   int n_points, const HyperParams& hyper) {
    return grid_impl(X, Y, Family::multiclass(static_cast<int>(Y.cols())), k, n_points, hyper);
}

CvResult select_hyperparameters(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Family& fam, int k, CvSpec cv, const HyperParams& base,
                                const FitControls& controls) {
    if (fam.is_multiclass())
        throw InputError("select_hyperparameters: use the multiclass variant");
    return select_impl(X, y, fam, k, std::move(cv), base, controls, nullptr);
}

CvResult select_hyperparameters_multiclass(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                           int k, CvSpec cv, const HyperParams& base,
                                           const FitControls& controls) {
    std::vector<int> labels(X.rows());
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        Eigen::Index g;
        Y.row(i).maxCoeff(&g);
        labels[i] = static_cast<int>(g);
    }
    const Family fam = Family::multiclass(static_cast<int>(Y.cols()));
    return select_impl(X, Y, fam, k, std::move(cv), base, controls, &labels);
}

} // namespace spcr
