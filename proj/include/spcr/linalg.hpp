#pragma once

#include <Eigen/Dense>

#include "spcr/errors.hpp"

namespace spcr {

/// Column-centered design matrix plus the removed means (needed to score
/// new observations).
struct CenteredDesign {
    Eigen::MatrixXd X;          // n x p, every column sums to ~0
    Eigen::VectorXd col_means;  // p

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
};

struct ProcrustesResult {
    Eigen::MatrixXd A;      // p x k, orthonormal columns
    bool degenerate = false; // true when X'X B was rank-deficient
};

/// sign(z) * max(|z| - eta, 0)
inline double soft_threshold(double zval, double eta) {
    if (zval > eta) return zval - eta;
    if (zval < -eta) return zval + eta;
    return 0.0;
}

CenteredDesign center_columns(const Eigen::MatrixXd& raw);

/// Orthonormal maximizer of trace(A' X'X B): A = U V' from the SVD
/// U D V' = X'X B. Zero singular directions are completed by
/// Gram-Schmidt over canonical basis vectors in index order, so the
/// result is deterministic and total even for rank-deficient B.
ProcrustesResult procrustes_rotation(const Eigen::MatrixXd& X, const Eigen::MatrixXd& B);

/// Score matrix X B.
Eigen::MatrixXd pc_scores(const Eigen::MatrixXd& X, const Eigen::MatrixXd& B);

/// Top-k right singular vectors of X with each column's largest-|entry|
/// element made positive.
Eigen::MatrixXd leading_right_singular_vectors(const Eigen::MatrixXd& X, int k);

} // namespace spcr
