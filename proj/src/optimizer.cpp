#include "spcr/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace spcr {

namespace {

constexpr double kAdaptiveFloor = 1e-4; // |loading| floor in the adaptive weights

void validate_hyper(const HyperParams& hyper, Eigen::Index p, Eigen::Index k) {
    if (!(hyper.w > 0.0)) throw InputError("hyper: w must be > 0");
    if (!(hyper.xi >= 0.0 && hyper.xi < 1.0)) throw InputError("hyper: xi must be in [0,1)");
    if (hyper.lambda_beta < 0.0 || hyper.lambda_gamma < 0.0)
        throw InputError("hyper: penalty levels must be >= 0");
    if (hyper.q < 0.0) throw InputError("hyper: q must be >= 0");
    if (hyper.has_entry_weights()) {
        if (hyper.lambda_entry.rows() != p || hyper.lambda_entry.cols() != k)
            throw InputError("hyper: lambda_entry must be p x k");
        if ((hyper.lambda_entry.array() < 0.0).any())
            throw InputError("hyper: lambda_entry must be >= 0");
    }
}

HyperParams resolve_entry_weights(const HyperParams& hyper, Eigen::Index p, Eigen::Index k) {
    HyperParams out = hyper;
    if (!out.has_entry_weights())
        out.lambda_entry = Eigen::MatrixXd::Constant(p, k, out.lambda_beta);
    return out;
}

double intercept_start(const Eigen::VectorXd& y, const Family& fam) {
    const double mean = y.mean();
    switch (fam.kind) {
    case FamilyKind::binomial: {
        const double m = std::clamp(mean, 1e-6, 1.0 - 1e-6);
        return std::log(m / (1.0 - m));
    }
    case FamilyKind::poisson:
        return std::log(std::max(mean, 1e-6));
    default:
        return mean;
    }
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    if (v.size() % 2 == 1) return v[m];
    return 0.5 * (v[m - 1] + v[m]);
}

// Family used for per-block working quantities and likelihood terms.
Family block_family(const Family& fam) {
    return fam.is_multiclass() ? Family::multiclass(fam.n_classes) : fam;
}

double penalty_value(const SpcrParams& params, const HyperParams& hyper) {
    const double ridge = hyper.lambda_beta * hyper.xi * params.loadings.squaredNorm();
    const double lasso =
        (1.0 - hyper.xi) * (hyper.lambda_entry.array() * params.loadings.array().abs()).sum();
    const double coef_l1 = hyper.lambda_gamma * params.coef.array().abs().sum();
    return ridge + lasso + coef_l1;
}

double objective_impl(const SpcrParams& params, const Eigen::MatrixXd& X,
                      const Eigen::MatrixXd& Y, const Family& fam, const HyperParams& hyper) {
    const Family bf = block_family(fam);
    const Eigen::MatrixXd scores = X * params.loadings; // n x k
    double reg = 0.0;
    for (Eigen::Index g = 0; g < Y.cols(); ++g) {
        const Eigen::VectorXd kappa =
            (scores * params.coef.col(g)).array() + params.intercept(g);
        for (Eigen::Index i = 0; i < Y.rows(); ++i) {
            if (!std::isfinite(kappa(i)))
                return std::numeric_limits<double>::infinity();
            reg -= log_likelihood(bf, Y(i, g), kappa(i));
        }
    }
    const double pca = (X - scores * params.rotation.transpose()).squaredNorm();
    return reg + hyper.w * pca + penalty_value(params, hyper);
}

SpcrParams init_common(const CenteredDesign& X, int k) {
    if (k < 1 || k > X.p()) throw InputError("init_params: k must be in [1, p]");
    if (X.X.cwiseAbs().maxCoeff() == 0.0)
        throw InputError("init_params: design has zero variance in all columns");
    SpcrParams params;
    params.loadings = leading_right_singular_vectors(X.X, k);
    params.rotation = params.loadings;
    return params;
}

struct Engine {
    const Eigen::MatrixXd& X;
    Eigen::MatrixXd Y;  // n x G response blocks
    Family fam;
    HyperParams hyper;
    FitControls controls;
    bool identify_multiclass = false;

    FitResult run(SpcrParams start) {
        FitResult out;
        WorkingState s = make_working_state(X, Y, fam, start, hyper);
        double obj_prev = exact_objective(s.params);
        check_finite(obj_prev, 0);

        const Eigen::Index p = X.cols();
        const Eigen::Index k = s.params.n_components();
        const Eigen::Index G = Y.cols();

        for (int outer = 0; outer < controls.max_outer; ++outer) {
            if (outer > 0) s = make_working_state(X, Y, fam, s.params, s.hyper);
            std::vector<double> strace;
            strace.push_back(surrogate_value(s, X));
            for (int cycle = 0; cycle < controls.max_cycles_per_outer; ++cycle) {
                for (Eigen::Index j = 0; j < k; ++j)
                    for (Eigen::Index l = 0; l < p; ++l)
                        update_loading_entry(s, X, l, j);
                strace.push_back(surrogate_value(s, X));
                for (Eigen::Index g = 0; g < G; ++g)
                    for (Eigen::Index j = 0; j < k; ++j)
                        update_coef_entry(s, j, g);
                strace.push_back(surrogate_value(s, X));
                for (Eigen::Index g = 0; g < G; ++g)
                    update_intercept(s, g);
                strace.push_back(surrogate_value(s, X));
                update_rotation(s, X);
                strace.push_back(surrogate_value(s, X));
            }
            out.surrogate_trace.push_back(std::move(strace));
            if (identify_multiclass) median_center(s.params);

            const double obj = exact_objective(s.params);
            check_finite(obj, outer + 1);
            out.objective_trace.push_back(obj);
            out.n_outer = outer + 1;
            if (std::abs(obj - obj_prev) / (std::abs(obj_prev) + 1e-10) < controls.tol) {
                out.converged = true;
                obj_prev = obj;
                break;
            }
            obj_prev = obj;
        }
        out.params = std::move(s.params);
        return out;
    }

    double exact_objective(const SpcrParams& params) const {
        return objective_impl(params, X, Y, fam, hyper);
    }

    void check_finite(double obj, int outer) const {
        if (std::isfinite(obj)) return;
        std::ostringstream msg;
        msg << "fit: objective became non-finite at outer iteration " << outer
            << " (diverging linear predictor; try larger penalties)";
        throw NumericError(msg.str());
    }
};

} // namespace

SpcrParams init_params(const CenteredDesign& X, const Eigen::VectorXd& y,
                       const Family& fam, int k) {
    if (fam.is_multiclass())
        throw InputError("init_params: use init_params_multiclass for the multiclass family");
    SpcrParams params = init_common(X, k);
    params.coef = Eigen::MatrixXd::Zero(k, 1);
    params.intercept = Eigen::VectorXd::Constant(1, intercept_start(y, fam));
    return params;
}

SpcrParams init_params_multiclass(const CenteredDesign& X, const Eigen::MatrixXd& Y, int k) {
    const Eigen::Index G = Y.cols();
    if (G < 2) throw InputError("init_params_multiclass: need at least 2 classes");
    SpcrParams params = init_common(X, k);
    params.coef = Eigen::MatrixXd::Zero(k, G);
    Eigen::VectorXd counts = Y.colwise().sum();
    if ((counts.array() <= 0.0).any())
        throw InputError("init_params_multiclass: a class has zero observations");
    Eigen::VectorXd logf = (counts.array() / static_cast<double>(Y.rows())).log();
    std::vector<double> vals(logf.data(), logf.data() + logf.size());
    params.intercept = logf.array() - median_of(vals);
    return params;
}

WorkingState make_working_state(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                const Family& fam, const SpcrParams& params,
                                const HyperParams& hyper) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const Eigen::Index k = params.n_components();
    const Eigen::Index G = Y.cols();
    if (params.loadings.rows() != p || params.coef.rows() != k ||
        params.coef.cols() != G || params.intercept.size() != G)
        throw InputError("make_working_state: dimension mismatch");

    WorkingState s;
    s.params = params;
    s.hyper = resolve_entry_weights(hyper, p, k);
    s.omega.resize(n, G);
    s.z.resize(n, G);
    s.res.resize(n, G);
    s.scores = X * params.loadings;
    s.ystar = X * params.rotation;
    s.sx2 = X.array().square().colwise().sum();

    const Family bf = block_family(fam);
    for (Eigen::Index g = 0; g < G; ++g) {
        const Eigen::VectorXd kappa = (s.scores * params.coef.col(g)).array() + params.intercept(g);
        for (Eigen::Index i = 0; i < n; ++i) {
            const WorkingPoint wp = working_quantities(bf, Y(i, g), kappa(i));
            s.omega(i, g) = wp.omega;
            s.z(i, g) = wp.z;
        }
        s.res.col(g) = s.z.col(g) - (s.scores * params.coef.col(g)).eval();
        s.res.col(g).array() -= params.intercept(g);
    }
    s.wx2 = X.array().square().matrix().transpose() * s.omega;
    return s;
}

double loading_update_numerator(const WorkingState& s, const Eigen::MatrixXd& X,
                                Eigen::Index l, Eigen::Index j) {
    const double old = s.params.loadings(l, j);
    double num = 0.0;
    for (Eigen::Index g = 0; g < s.res.cols(); ++g) {
        const double gjg = s.params.coef(j, g);
        if (gjg == 0.0) continue;
        // sum_i omega x_il Z_i with Z restored from the residual cache
        const double dot =
            (s.omega.col(g).cwiseProduct(X.col(l))).dot(s.res.col(g)) + gjg * old * s.wx2(l, g);
        num += 2.0 * gjg * dot;
    }
    // PCA part: Y*_ji = ystar_ij - scores_ij + old * x_il
    const double pca = X.col(l).dot(s.ystar.col(j) - s.scores.col(j)) + old * s.sx2(l);
    num += 2.0 * s.hyper.w * pca;
    return num;
}

double update_loading_entry(WorkingState& s, const Eigen::MatrixXd& X,
                            Eigen::Index l, Eigen::Index j) {
    const double old = s.params.loadings(l, j);
    double den = 2.0 * s.hyper.w * s.sx2(l) + 2.0 * s.hyper.lambda_beta * s.hyper.xi;
    for (Eigen::Index g = 0; g < s.res.cols(); ++g) {
        const double gjg = s.params.coef(j, g);
        if (gjg != 0.0) den += 2.0 * gjg * gjg * s.wx2(l, g);
    }
    double next = 0.0;
    if (den > 0.0) {
        const double num = loading_update_numerator(s, X, l, j);
        next = soft_threshold(num, (1.0 - s.hyper.xi) * s.hyper.lambda_entry(l, j)) / den;
    }
    if (next != old) {
        const double d = next - old;
        s.params.loadings(l, j) = next;
        s.scores.col(j) += d * X.col(l);
        for (Eigen::Index g = 0; g < s.res.cols(); ++g) {
            const double gjg = s.params.coef(j, g);
            if (gjg != 0.0) s.res.col(g) -= (gjg * d) * X.col(l);
        }
    }
    return next;
}

double update_coef_entry(WorkingState& s, Eigen::Index j, Eigen::Index g) {
    const double old = s.params.coef(j, g);
    const Eigen::VectorXd wscore = s.omega.col(g).cwiseProduct(s.scores.col(j));
    const double den = 2.0 * wscore.dot(s.scores.col(j));
    double next = 0.0;
    if (den > 0.0) {
        // y**_i = res_i + old * score_ij
        const double num = 2.0 * wscore.dot(s.res.col(g)) + old * den;
        next = soft_threshold(num, s.hyper.lambda_gamma) / den;
    }
    if (next != old) {
        s.res.col(g) -= (next - old) * s.scores.col(j);
        s.params.coef(j, g) = next;
    }
    return next;
}

double update_intercept(WorkingState& s, Eigen::Index g) {
    const double old = s.params.intercept(g);
    const double sw = s.omega.col(g).sum();
    const double next = old + s.omega.col(g).dot(s.res.col(g)) / sw;
    s.res.col(g).array() -= next - old;
    s.params.intercept(g) = next;
    return next;
}

void update_rotation(WorkingState& s, const Eigen::MatrixXd& X) {
    s.params.rotation = procrustes_rotation(X, s.params.loadings).A;
    s.ystar = X * s.params.rotation;
}

double surrogate_value(const WorkingState& s, const Eigen::MatrixXd& X) {
    double ls = 0.0;
    for (Eigen::Index g = 0; g < s.res.cols(); ++g)
        ls += s.omega.col(g).dot(s.res.col(g).cwiseAbs2());
    const double pca = (X - s.scores * s.params.rotation.transpose()).squaredNorm();
    return ls + s.hyper.w * pca + penalty_value(s.params, s.hyper);
}

double objective_value(const SpcrParams& params, const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& y, const Family& fam,
                       const HyperParams& hyper) {
    const HyperParams h = resolve_entry_weights(hyper, X.cols(), params.n_components());
    return objective_impl(params, X, y, fam, h);
}

double objective_value_multiclass(const SpcrParams& params, const Eigen::MatrixXd& X,
                                  const Eigen::MatrixXd& Y, const HyperParams& hyper) {
    const HyperParams h = resolve_entry_weights(hyper, X.cols(), params.n_components());
    return objective_impl(params, X, Y, Family::multiclass(static_cast<int>(Y.cols())), h);
}

FitResult fit(const CenteredDesign& X, const Eigen::VectorXd& y, const Family& fam,
              const HyperParams& hyper, int k, const FitControls& controls) {
    if (fam.is_multiclass())
        throw InputError("fit: use fit_multiclass for the multiclass family");
    if (y.size() != X.n()) throw InputError("fit: response length mismatch");
    validate_hyper(hyper, X.p(), k);
    Engine engine{X.X, y, fam, resolve_entry_weights(hyper, X.p(), k), controls, false};
    return engine.run(init_params(X, y, fam, k));
}

FitResult fit_adaptive(const CenteredDesign& X, const Eigen::VectorXd& y, const Family& fam,
                       const HyperParams& hyper, int k, const FitControls& controls) {
    validate_hyper(hyper, X.p(), k);
    HyperParams pilot_hyper = hyper;
    pilot_hyper.lambda_entry.resize(0, 0);
    if (hyper.q == 0.0) return fit(X, y, fam, pilot_hyper, k, controls);

    const FitResult pilot = fit(X, y, fam, pilot_hyper, k, controls);
    HyperParams stage2 = hyper;
    stage2.lambda_entry =
        hyper.lambda_beta /
        pilot.params.loadings.array().abs().max(kAdaptiveFloor).pow(hyper.q);
    return fit(X, y, fam, stage2, k, controls);
}

FitResult fit_multiclass(const CenteredDesign& X, const Eigen::MatrixXd& Y,
                         const HyperParams& hyper, int k, const FitControls& controls) {
    if (Y.rows() != X.n()) throw InputError("fit_multiclass: indicator rows mismatch");
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        double rowsum = 0.0;
        for (Eigen::Index g = 0; g < Y.cols(); ++g) {
            if (Y(i, g) != 0.0 && Y(i, g) != 1.0)
                throw InputError("fit_multiclass: indicator entries must be 0/1");
            rowsum += Y(i, g);
        }
        if (rowsum != 1.0) throw InputError("fit_multiclass: each row must be one-hot");
    }
    validate_hyper(hyper, X.p(), k);
    const Family fam = Family::multiclass(static_cast<int>(Y.cols()));
    Engine engine{X.X, Y, fam, resolve_entry_weights(hyper, X.p(), k), controls, true};
    return engine.run(init_params_multiclass(X, Y, k));
}

void median_center(SpcrParams& params) {
    const Eigen::Index G = params.coef.cols();
    if (G < 2) return;
    for (Eigen::Index j = 0; j < params.coef.rows(); ++j) {
        std::vector<double> row(params.coef.row(j).begin(), params.coef.row(j).end());
        params.coef.row(j).array() -= median_of(std::move(row));
    }
    params.intercept.array() -= params.intercept.mean();
}

} // namespace spcr
