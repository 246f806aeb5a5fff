#include "spcr/baselines.hpp"

#include <cmath>
#include <limits>

#include "spcr/linalg.hpp"

namespace spcr {

PcrModel fit_pcr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Family& fam, int k) {
    if (fam.is_multiclass()) throw InputError("fit_pcr: multiclass is not supported");
    if (k < 0 || k > X.cols()) throw InputError("fit_pcr: k must be in [0, p]");
    if (y.size() != X.rows()) throw InputError("fit_pcr: response length mismatch");

    const CenteredDesign cd = center_columns(X);
    const int n = static_cast<int>(X.rows());

    PcrModel model;
    model.family = fam;
    model.col_means = cd.col_means;
    model.loadings = k > 0 ? leading_right_singular_vectors(cd.X, k)
                           : Eigen::MatrixXd(X.cols(), 0);
    model.coef = Eigen::VectorXd::Zero(k);

    Eigen::MatrixXd D(n, k + 1);
    D.col(0).setOnes();
    if (k > 0) D.rightCols(k) = cd.X * model.loadings;

    Eigen::VectorXd c = Eigen::VectorXd::Zero(k + 1);
    double dev_prev = std::numeric_limits<double>::infinity();
    model.converged = false;
    for (int it = 0; it < 50; ++it) {
        const Eigen::VectorXd kappa = D * c;
        Eigen::VectorXd mu(n), wgt(n);
        for (int i = 0; i < n; ++i) {
            double kap = kappa(i);
            if (fam.kind == FamilyKind::poisson)
                kap = std::clamp(kap, -kPoissonPredictorClip, kPoissonPredictorClip);
            const CumulantEval ce = family_eval(fam, kap);
            mu(i) = ce.du;
            wgt(i) = std::max(ce.d2u, 1e-10);
        }
        const Eigen::VectorXd zvec = kappa + (y - mu).cwiseQuotient(wgt);
        const Eigen::MatrixXd WD = wgt.asDiagonal() * D;
        c = (D.transpose() * WD).ldlt().solve(D.transpose() * wgt.cwiseProduct(zvec));

        double dev = 0.0;
        const Eigen::VectorXd kap_new = D * c;
        for (int i = 0; i < n; ++i) dev -= 2.0 * log_likelihood(fam, y(i), kap_new(i));
        model.deviance_trace.push_back(dev);
        model.n_iterations = it + 1;
        if (std::abs(dev - dev_prev) < 1e-8) {
            model.converged = true;
            break;
        }
        dev_prev = dev;
    }

    model.intercept = c(0);
    if (k > 0) model.coef = c.tail(k);
    if (fam.kind == FamilyKind::gaussian) {
        const Eigen::VectorXd resid = y - D * c;
        model.dispersion = resid.squaredNorm() / static_cast<double>(n);
    }
    return model;
}

double expected_loglik(const std::function<double(const Eigen::VectorXd&)>& kappa_of_x,
                       const Family& fam, SimCase generator, int m, std::uint64_t seed) {
    if (m < 1) throw InputError("expected_loglik: m must be >= 1");
    const SimData fresh = gen_case(generator, m, seed);
    double total = 0.0;
    for (int i = 0; i < m; ++i)
        total += log_likelihood(fam, fresh.y(i), kappa_of_x(fresh.X.row(i).transpose()));
    return -total / static_cast<double>(m);
}

SelectionRates tpr_tnr(const Eigen::VectorXd& zeta_hat, const Eigen::VectorXd& zeta_star) {
    if (zeta_hat.size() != zeta_star.size()) throw InputError("tpr_tnr: length mismatch");
    constexpr double kZeroTol = 1e-10;
    int pos = 0, neg = 0, tp = 0, tn = 0;
    for (Eigen::Index j = 0; j < zeta_star.size(); ++j) {
        const bool sel = std::abs(zeta_hat(j)) > kZeroTol;
        if (zeta_star(j) != 0.0) {
            ++pos;
            if (sel) ++tp;
        } else {
            ++neg;
            if (!sel) ++tn;
        }
    }
    SelectionRates out;
    if (pos > 0) out.tpr = static_cast<double>(tp) / pos;
    if (neg > 0) out.tnr = static_cast<double>(tn) / neg;
    return out;
}

Eigen::VectorXd composite_coefficients(const Eigen::MatrixXd& loadings,
                                       const Eigen::VectorXd& coef) {
    if (loadings.cols() != coef.size())
        throw InputError("composite_coefficients: dimension mismatch");
    return loadings * coef;
}

MeanSd mean_sd(const std::vector<double>& values) {
    const int n = static_cast<int>(values.size());
    if (n == 0) return {std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN()};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    if (n < 2) return {mean, std::numeric_limits<double>::quiet_NaN()};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1))};
}

} // namespace spcr
