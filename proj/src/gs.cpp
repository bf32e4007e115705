#include "mdq/gs.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mdq {

void validate_covariance(const Eigen::MatrixXd& K) {
    if (K.rows() != K.cols()) throw std::invalid_argument("covariance must be square");
    const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
    const double asym = (K - K.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale)
        throw std::invalid_argument("covariance asymmetric beyond tolerance: max |K - K^T| = " +
                                    std::to_string(asym));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (lo < -1e-9 * std::max(K.trace(), 1.0))
        throw std::invalid_argument("covariance indefinite: eigenvalue " + std::to_string(lo));
}

InnovationsDecomposition ldl(const Eigen::MatrixXd& K) {
    validate_covariance(K);
    const Eigen::Index m = K.rows();
    InnovationsDecomposition out;
    out.L = Eigen::MatrixXd::Identity(m, m);
    out.D = Eigen::VectorXd::Zero(m);
    out.predictor_rows.resize(std::size_t(m));
    out.pass_through.assign(std::size_t(m), false);

    const double trace = std::max(K.trace(), 0.0);
    const double zero_tol = kSingularTol * std::max(trace, 1e-300);

    bool any_singular = false;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            if (out.D(j) == 0.0) {
                out.L(i, j) = 0.0; // free coefficient when B_j = 0; fix it at zero
                continue;
            }
            double acc = K(i, j);
            for (Eigen::Index k = 0; k < j; ++k) acc -= out.L(i, k) * out.L(j, k) * out.D(k);
            out.L(i, j) = acc / out.D(j);
        }
        double d = K(i, i);
        for (Eigen::Index k = 0; k < i; ++k) d -= out.L(i, k) * out.L(i, k) * out.D(k);
        if (d < -zero_tol)
            throw std::invalid_argument("covariance indefinite: pivot " + std::to_string(d) +
                                        " at index " + std::to_string(i));
        if (d <= zero_tol) {
            out.D(i) = 0.0;
            out.pass_through[std::size_t(i)] = true;
            any_singular = true;
        } else {
            out.D(i) = d;
        }
    }

    // MMSE predictor rows K_{i-1} with K_{i-1} K_{X_1^{i-1}} = K_{X_i X_1^{i-1}}.
    // Nonsingular leading blocks: forward substitution through L. Singular:
    // minimum-norm (pseudo-inverse) solution of the normal equations.
    for (Eigen::Index i = 1; i < m; ++i) {
        if (!any_singular) {
            // row = L(i, 0..i-1) * inv(L_leading)
            Eigen::RowVectorXd row = out.L.row(i).head(i);
            for (Eigen::Index j = i - 1; j >= 0; --j)
                for (Eigen::Index k = 0; k < j; ++k) row(k) -= row(j) * out.L(j, k);
            out.predictor_rows[std::size_t(i)] = row;
        } else {
            Eigen::MatrixXd lead = K.topLeftCorner(i, i);
            Eigen::RowVectorXd rhs = K.row(i).head(i);
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(lead);
            out.predictor_rows[std::size_t(i)] = cod.solve(rhs.transpose()).transpose();
        }
    }
    out.predictor_rows[0] = Eigen::RowVectorXd();
    return out;
}

Eigen::VectorXd innovations_variances(const Eigen::MatrixXd& K) {
    return ldl(K).D;
}

DegenerateSubspace vector_gs_degenerate(const Eigen::MatrixXd& K_B, double tol) {
    validate_covariance(K_B);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K_B);
    const Eigen::Index n = K_B.rows();

    DegenerateSubspace out;
    out.basis.resize(n, n);
    Eigen::VectorXd ev(n);
    for (Eigen::Index i = 0; i < n; ++i) { // descending order
        ev(i) = es.eigenvalues()(n - 1 - i);
        out.basis.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    const double lmax = std::max(ev(0), 0.0);
    int rank = 0;
    while (rank < n && ev(rank) > tol * std::max(lmax, 1e-300)) ++rank;
    out.rank = rank;
    out.lambda = ev.head(rank);
    return out;
}

} // namespace mdq
