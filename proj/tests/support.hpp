// Test-only helpers: independent oracle implementations (naive surrogate
// evaluation, refining grid search, clustering utilities) and random
// instance builders. Nothing here is used by the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "spcr/family.hpp"
#include "spcr/optimizer.hpp"
#include "spcr/rng.hpp"

namespace testsupport {

inline Eigen::MatrixXd random_matrix(spcr::SplitMix64& rng, int rows, int cols) {
    Eigen::MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = rng.next_normal();
    return M;
}

inline Eigen::MatrixXd random_orthonormal(spcr::SplitMix64& rng, int rows, int cols) {
    const Eigen::MatrixXd M = random_matrix(rng, rows, cols);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    return Q;
}

inline Eigen::MatrixXd centered(const Eigen::MatrixXd& M) {
    return M.rowwise() - M.colwise().mean();
}

// Definitional surrogate evaluation: rebuilds every matrix product from
// the parameters, no incremental caches. omega/z are the frozen
// linearization being tested.
inline double naive_surrogate(const Eigen::MatrixXd& X, const Eigen::MatrixXd& omega,
                              const Eigen::MatrixXd& z, const spcr::SpcrParams& params,
                              const spcr::HyperParams& hyper) {
    const Eigen::MatrixXd scores = X * params.loadings;
    double value = 0.0;
    for (Eigen::Index g = 0; g < omega.cols(); ++g) {
        const Eigen::VectorXd fitted =
            (scores * params.coef.col(g)).array() + params.intercept(g);
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double r = z(i, g) - fitted(i);
            value += omega(i, g) * r * r;
        }
    }
    value += hyper.w * (X - scores * params.rotation.transpose()).squaredNorm();
    value += hyper.lambda_beta * hyper.xi * params.loadings.squaredNorm();
    for (Eigen::Index j = 0; j < params.loadings.cols(); ++j)
        for (Eigen::Index l = 0; l < params.loadings.rows(); ++l)
            value += (1.0 - hyper.xi) * hyper.lambda_entry(l, j) *
                     std::abs(params.loadings(l, j));
    value += hyper.lambda_gamma * params.coef.array().abs().sum();
    return value;
}

// Coarse-to-fine grid minimizer for a convex 1-D function; refines until
// the step reaches `final_step` and expands the bracket when the minimum
// lands on an edge.
inline double grid_argmin(const std::function<double(double)>& f, double radius,
                          double final_step = 1e-6) {
    double lo = -radius, hi = radius;
    for (;;) {
        const int npts = 2001;
        const double step = (hi - lo) / (npts - 1);
        int best = 0;
        double best_val = f(lo);
        for (int i = 1; i < npts; ++i) {
            const double v = f(lo + i * step);
            if (v < best_val) {
                best_val = v;
                best = i;
            }
        }
        if (best == 0 || best == npts - 1) {
            const double width = hi - lo;
            const double mid = lo + best * step;
            lo = mid - width;
            hi = mid + width;
            continue;
        }
        const double center = lo + best * step;
        if (step <= final_step) return center;
        lo = center - 2.0 * step;
        hi = center + 2.0 * step;
    }
}

// --- clustering utilities for the score-plot checks ---

inline std::vector<int> kmeans_labels(const Eigen::MatrixXd& points, int n_clusters,
                                      std::uint64_t seed, int restarts = 10) {
    const int n = static_cast<int>(points.rows());
    std::vector<int> best_labels(n, 0);
    double best_inertia = std::numeric_limits<double>::infinity();
    spcr::SplitMix64 rng(seed);

    for (int r = 0; r < restarts; ++r) {
        // k-means++ seeding
        Eigen::MatrixXd centers(n_clusters, points.cols());
        centers.row(0) = points.row(static_cast<int>(rng.next_below(n)));
        Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
        for (int c = 1; c < n_clusters; ++c) {
            const double total = d2.sum();
            double target = rng.next_double() * total;
            int pick = 0;
            for (; pick < n - 1; ++pick) {
                target -= d2(pick);
                if (target <= 0.0) break;
            }
            centers.row(c) = points.row(pick);
            d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
        }

        std::vector<int> labels(n, 0);
        for (int iter = 0; iter < 100; ++iter) {
            bool changed = false;
            for (int i = 0; i < n; ++i) {
                int arg = 0;
                double best_d = (points.row(i) - centers.row(0)).squaredNorm();
                for (int c = 1; c < n_clusters; ++c) {
                    const double d = (points.row(i) - centers.row(c)).squaredNorm();
                    if (d < best_d) {
                        best_d = d;
                        arg = c;
                    }
                }
                if (labels[i] != arg) {
                    labels[i] = arg;
                    changed = true;
                }
            }
            Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n_clusters, points.cols());
            Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_clusters);
            for (int i = 0; i < n; ++i) {
                sums.row(labels[i]) += points.row(i);
                counts(labels[i]) += 1.0;
            }
            for (int c = 0; c < n_clusters; ++c)
                if (counts(c) > 0) centers.row(c) = sums.row(c) / counts(c);
            if (!changed) break;
        }
        double inertia = 0.0;
        for (int i = 0; i < n; ++i)
            inertia += (points.row(i) - centers.row(labels[i])).squaredNorm();
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best_labels = labels;
        }
    }
    return best_labels;
}

inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    const int n = static_cast<int>(a.size());
    const int ka = *std::max_element(a.begin(), a.end()) + 1;
    const int kb = *std::max_element(b.begin(), b.end()) + 1;
    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(ka, kb);
    for (int i = 0; i < n; ++i) table(a[i], b[i]) += 1.0;
    auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
    double sum_cells = 0.0;
    for (int i = 0; i < ka; ++i)
        for (int j = 0; j < kb; ++j) sum_cells += choose2(table(i, j));
    double sum_rows = 0.0, sum_cols = 0.0;
    for (int i = 0; i < ka; ++i) sum_rows += choose2(table.row(i).sum());
    for (int j = 0; j < kb; ++j) sum_cols += choose2(table.col(j).sum());
    const double expected = sum_rows * sum_cols / choose2(static_cast<double>(n));
    const double max_index = 0.5 * (sum_rows + sum_cols);
    return (sum_cells - expected) / (max_index - expected);
}

// Largest principal angle (radians) between the column spans of two
// orthonormalized bases.
inline double max_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qa(A), qb(B);
    const Eigen::MatrixXd Qa =
        qa.householderQ() * Eigen::MatrixXd::Identity(A.rows(), A.cols());
    const Eigen::MatrixXd Qb =
        qb.householderQ() * Eigen::MatrixXd::Identity(B.rows(), B.cols());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Qa.transpose() * Qb);
    const double c = std::min(1.0, svd.singularValues().minCoeff());
    return std::acos(c);
}

} // namespace testsupport
