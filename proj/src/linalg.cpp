#include "spcr/linalg.hpp"

#include <limits>

namespace spcr {

CenteredDesign center_columns(const Eigen::MatrixXd& raw) {
    if (raw.rows() < 2) throw InputError("center_columns: need at least 2 rows");
    CenteredDesign out;
    out.col_means = raw.colwise().mean();
    out.X = raw.rowwise() - out.col_means.transpose();
    return out;
}

namespace {

// Append orthonormal columns to Q (p x r, orthonormal) until it has `want`
// columns, drawing candidates from the canonical basis in index order.
Eigen::MatrixXd complete_orthonormal(const Eigen::MatrixXd& Q, Eigen::Index want) {
    const Eigen::Index p = Q.rows();
    Eigen::MatrixXd out(p, want);
    Eigen::Index have = Q.cols();
    out.leftCols(have) = Q;
    for (Eigen::Index e = 0; e < p && have < want; ++e) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(p, e);
        v -= out.leftCols(have) * (out.leftCols(have).transpose() * v);
        // second pass for orthogonality at machine precision
        v -= out.leftCols(have) * (out.leftCols(have).transpose() * v);
        const double nrm = v.norm();
        if (nrm > 1e-8) {
            out.col(have++) = v / nrm;
        }
    }
    if (have < want)
        throw NumericError("complete_orthonormal: could not complete basis");
    return out;
}

} // namespace

ProcrustesResult procrustes_rotation(const Eigen::MatrixXd& X, const Eigen::MatrixXd& B) {
    const Eigen::Index p = X.cols();
    const Eigen::Index k = B.cols();
    if (B.rows() != p) throw InputError("procrustes_rotation: dimension mismatch");
    if (k > p) throw InputError("procrustes_rotation: k > p");

    const Eigen::MatrixXd M = X.transpose() * (X * B); // p x k
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();

    const double tol = static_cast<double>(std::max(p, k)) *
                       std::numeric_limits<double>::epsilon() * (sv.size() ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > tol && sv(rank) > 0.0) ++rank;

    ProcrustesResult res;
    if (rank == k) {
        res.A = svd.matrixU() * svd.matrixV().transpose();
        return res;
    }
    res.degenerate = true;
    const Eigen::MatrixXd U = complete_orthonormal(svd.matrixU().leftCols(rank), k);
    const Eigen::MatrixXd V = complete_orthonormal(svd.matrixV().leftCols(rank), k);
    res.A = U * V.transpose();
    return res;
}

Eigen::MatrixXd pc_scores(const Eigen::MatrixXd& X, const Eigen::MatrixXd& B) {
    if (B.rows() != X.cols()) throw InputError("pc_scores: dimension mismatch");
    return X * B;
}

Eigen::MatrixXd leading_right_singular_vectors(const Eigen::MatrixXd& X, int k) {
    if (k < 1 || k > X.cols()) throw InputError("leading_right_singular_vectors: bad k");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinV);
    Eigen::MatrixXd V = svd.matrixV().leftCols(k);
    for (Eigen::Index j = 0; j < V.cols(); ++j) {
        Eigen::Index imax;
        V.col(j).cwiseAbs().maxCoeff(&imax);
        if (V(imax, j) < 0.0) V.col(j) = -V.col(j);
    }
    return V;
}

} // namespace spcr
