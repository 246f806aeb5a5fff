#pragma once

#include <Eigen/Dense>

#include "spcr/errors.hpp"

namespace spcr {

enum class FamilyKind { gaussian, binomial, poisson, multiclass };

/// Exponential-family description in canonical form: the density is
/// exp{ (y*kappa - u(kappa)) / phi + v(y, phi) } with the canonical link,
/// so the linear predictor kappa is the canonical parameter itself.
/// The multiclass kind treats each class indicator as a separate binary
/// logistic term (symmetric multiclass model), so its cumulant is the
/// binomial one.
struct Family {
    FamilyKind kind = FamilyKind::gaussian;
    double phi = 1.0;   // dispersion; fixed at 1 for binomial/poisson/multiclass
    int n_classes = 0;  // multiclass only

    static Family gaussian(double phi = 1.0);
    static Family binomial();
    static Family poisson();
    static Family multiclass(int n_classes);

    bool is_multiclass() const { return kind == FamilyKind::multiclass; }
};

struct CumulantEval {
    double u;    // cumulant
    double du;   // first derivative = mean function
    double d2u;  // second derivative = variance function
};

struct WorkingPoint {
    double omega;  // surrogate weight, > 0
    double z;      // working response
};

// Weight floor: keeps the quadratic surrogate strictly convex when fitted
// probabilities or rates saturate.
inline constexpr double kOmegaMin = 1e-5;
// Poisson linear predictors are clamped to this band inside
// working_quantities so exp() cannot overflow during re-linearization.
inline constexpr double kPoissonPredictorClip = 30.0;

/// Cumulant u and its first two derivatives at kappa. Binomial uses a
/// log1p/exp formulation that stays finite for |kappa| <= 700.
CumulantEval family_eval(const Family& fam, double kappa);

/// Log density log f(y | kappa) = (y*kappa - u(kappa))/phi + v(y, phi).
/// Validates y for the family (binary in {0,1}, counts are non-negative
/// integers).
double log_likelihood(const Family& fam, double y, double kappa);

/// Quadratic-surrogate weight and working response at the current
/// predictor: omega = u''(kappa)/(2 phi) floored at kOmegaMin,
/// z = kappa + (y - u'(kappa)) / max(u''(kappa), floor).
WorkingPoint working_quantities(const Family& fam, double y, double kappa);

/// Symmetric multiclass probabilities exp(kappa_g)/sum_g' exp(kappa_g')
/// at kappa_g = gamma0[g] + Gamma.col(g)' B' x, computed with
/// max-subtraction.
Eigen::VectorXd multiclass_probabilities(const Eigen::VectorXd& gamma0,
                                         const Eigen::MatrixXd& Gamma,
                                         const Eigen::MatrixXd& B,
                                         const Eigen::VectorXd& x);

} // namespace spcr
