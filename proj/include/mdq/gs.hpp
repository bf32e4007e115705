#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mdq {

// Innovations form of a covariance matrix: K = L diag(D) L^T with L unit
// lower triangular. D_i is the linear MMSE error of predicting variable i
// from its predecessors; predictor_rows[i] holds the MMSE weights.
struct InnovationsDecomposition {
    Eigen::MatrixXd L;
    Eigen::VectorXd D;                          // innovation variances, clamped >= 0
    std::vector<Eigen::RowVectorXd> predictor_rows; // row i has i entries (empty for i = 0)
    std::vector<bool> pass_through;             // D_i == 0: stage is a deterministic predictor

    Eigen::MatrixXd reconstruct() const {
        return L * D.asDiagonal() * L.transpose();
    }
};

// relative tolerance below which an innovation is treated as exactly zero
inline constexpr double kSingularTol = 1e-9;

void validate_covariance(const Eigen::MatrixXd& K);

InnovationsDecomposition ldl(const Eigen::MatrixXd& K);

Eigen::VectorXd innovations_variances(const Eigen::MatrixXd& K);

// Quantization subspace of a (possibly singular) innovation covariance:
// eigenvalues below tol * lambda_max are zeroed; the remaining coordinates
// of the stage output are completed deterministically from the predictor.
struct DegenerateSubspace {
    int rank;
    Eigen::MatrixXd basis;      // full orthonormal eigenbasis, descending eigenvalues
    Eigen::VectorXd lambda;     // the `rank` positive eigenvalues
};

DegenerateSubspace vector_gs_degenerate(const Eigen::MatrixXd& K_B, double tol = kSingularTol);

} // namespace mdq
