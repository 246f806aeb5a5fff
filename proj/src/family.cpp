#include "spcr/family.hpp"

#include <cmath>
#include <limits>

namespace spcr {

Family Family::gaussian(double phi) {
    if (!(phi > 0.0)) throw InputError("gaussian family needs phi > 0");
    return Family{FamilyKind::gaussian, phi, 0};
}

Family Family::binomial() { return Family{FamilyKind::binomial, 1.0, 0}; }

Family Family::poisson() { return Family{FamilyKind::poisson, 1.0, 0}; }

Family Family::multiclass(int n_classes) {
    if (n_classes < 2) throw InputError("multiclass family needs at least 2 classes");
    return Family{FamilyKind::multiclass, 1.0, n_classes};
}

namespace {

double logistic(double kappa) { return 1.0 / (1.0 + std::exp(-kappa)); }

// log(1 + exp(kappa)) without overflow on either tail
double log1pexp(double kappa) {
    if (kappa > 0.0) return kappa + std::log1p(std::exp(-kappa));
    return std::log1p(std::exp(kappa));
}

bool is_count(double y) { return y >= 0.0 && y == std::floor(y); }

} // namespace

CumulantEval family_eval(const Family& fam, double kappa) {
    if (!std::isfinite(kappa)) throw std::domain_error("family_eval: non-finite kappa");
    switch (fam.kind) {
    case FamilyKind::gaussian:
        return {0.5 * kappa * kappa, kappa, 1.0};
    case FamilyKind::binomial:
    case FamilyKind::multiclass: {
        const double p = logistic(kappa);
        return {log1pexp(kappa), p, p * (1.0 - p)};
    }
    case FamilyKind::poisson: {
        const double e = std::exp(kappa);
        return {e, e, e};
    }
    }
    throw std::domain_error("family_eval: unknown family");
}

double log_likelihood(const Family& fam, double y, double kappa) {
    if (!std::isfinite(kappa)) throw std::domain_error("log_likelihood: non-finite kappa");
    switch (fam.kind) {
    case FamilyKind::gaussian: {
        const double r = y - kappa;
        return -r * r / (2.0 * fam.phi) - 0.5 * std::log(2.0 * M_PI * fam.phi);
    }
    case FamilyKind::binomial:
    case FamilyKind::multiclass:
        if (y != 0.0 && y != 1.0)
            throw std::domain_error("log_likelihood: binary response must be 0 or 1");
        return y * kappa - log1pexp(kappa);
    case FamilyKind::poisson:
        if (!is_count(y))
            throw std::domain_error("log_likelihood: count response must be a non-negative integer");
        return y * kappa - std::exp(kappa) - std::lgamma(y + 1.0);
    }
    throw std::domain_error("log_likelihood: unknown family");
}

WorkingPoint working_quantities(const Family& fam, double y, double kappa) {
    if (!std::isfinite(kappa)) throw std::domain_error("working_quantities: non-finite kappa");
    if (fam.kind == FamilyKind::gaussian)
        return {1.0 / (2.0 * fam.phi), y}; // the quadratic surrogate is exact
    if (fam.kind == FamilyKind::poisson)
        kappa = std::clamp(kappa, -kPoissonPredictorClip, kPoissonPredictorClip);

    if (fam.kind == FamilyKind::multiclass) {
        // Per-class binary logistic surrogate; the z denominator floor is
        // 2*kOmegaMin so omega and the denominator share the same scale.
        const double p = logistic(kappa);
        const double pq = p * (1.0 - p);
        const double omega = std::max(pq / 2.0, kOmegaMin);
        const double z = kappa + (y - p) / std::max(pq, 2.0 * kOmegaMin);
        return {omega, z};
    }

    const CumulantEval c = family_eval(fam, kappa);
    const double omega = std::max(c.d2u / (2.0 * fam.phi), kOmegaMin);
    const double z = kappa + (y - c.du) / std::max(c.d2u, kOmegaMin);
    return {omega, z};
}

Eigen::VectorXd multiclass_probabilities(const Eigen::VectorXd& gamma0,
                                         const Eigen::MatrixXd& Gamma,
                                         const Eigen::MatrixXd& B,
                                         const Eigen::VectorXd& x) {
    const Eigen::Index G = gamma0.size();
    if (Gamma.cols() != G || Gamma.rows() != B.cols() || B.rows() != x.size())
        throw InputError("multiclass_probabilities: dimension mismatch");
    const Eigen::VectorXd score = B.transpose() * x;                 // k
    Eigen::VectorXd kappa = gamma0 + Gamma.transpose() * score;      // G
    const double m = kappa.maxCoeff();
    Eigen::VectorXd e = (kappa.array() - m).exp();
    return e / e.sum();
}

} // namespace spcr
