#pragma once

// Independent re-derivations used as test oracles. The library computes the
// region through the distortion-form expressions; this oracle goes through
// the test-channel mutual informations instead, so agreement checks both
// routes. Gram-Schmidt is re-done via explicit inner products.

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace oracle {

struct Region {
    double var, d1, d2, d3;

    double st0() const { return d3 * var / (var - d3); }
    double st1() const { return d1 * var / (var - d1) - st0(); }
    double st2() const { return d2 * var / (var - d2) - st0(); }

    // I(X;U1) + I(X;U2) + I(U1;U2|X), all in bits
    double sum_rate() const {
        const double u = st0(), v1 = st1(), v2 = st2();
        const double s12 = std::sqrt(v1) + std::sqrt(v2);
        return 0.5 * std::log2(var / d1) + 0.5 * std::log2(var / d2) +
               0.5 * std::log2((u + v1) * (u + v2) / (u * s12 * s12));
    }

    // psi backed out of the sum-rate identity
    double psi() const { return std::exp2(2.0 * (sum_rate() - 0.5 * std::log2(var / d3))); }

    double r1_v1() const {
        const double u = st0(), v1 = st1();
        return 0.5 * std::log2((var + u + v1) / (u + v1));
    }
    double r2_v1() const {
        const double u = st0(), v1 = st1(), v2 = st2();
        const double s12 = std::sqrt(v1) + std::sqrt(v2);
        return 0.5 * std::log2((var + u + v2) * (u + v1) / (u * s12 * s12));
    }
    double r1_v2() const {
        const double u = st0(), v1 = st1(), v2 = st2();
        const double s12 = std::sqrt(v1) + std::sqrt(v2);
        return 0.5 * std::log2((var + u + v1) * (u + v2) / (u * s12 * s12));
    }
    double r2_v2() const {
        const double u = st0(), v2 = st2();
        return 0.5 * std::log2((var + u + v2) / (u + v2));
    }

    // R1 as a function of sigma^2_T3, from I(b1 X + b2 U2'; U1)
    double r1_of_t3(double w) const {
        const double u = st0(), v1 = st1(), v2 = st2();
        const double s12 = std::sqrt(v1) + std::sqrt(v2);
        const double eb3 = (u * s12 * s12 + w * (u + v1)) / (u + v2 + w);
        return 0.5 * std::log2((var + u + v1) / eb3);
    }

    // balanced split solved by bisection on the monotone R1(T3) map
    double balanced_t3() const {
        const double target = 0.5 * sum_rate();
        double lo = 0.0, hi = 1.0;
        while (r1_of_t3(hi) > target) hi *= 2.0;
        for (int i = 0; i < 300; ++i) {
            const double mid = 0.5 * (lo + hi);
            (r1_of_t3(mid) > target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
};

// Gram-Schmidt on the covariance via explicit inner products; rows of C
// express B_i in the X basis.
inline void gs_bruteforce(const Eigen::MatrixXd& K, Eigen::MatrixXd& L, Eigen::VectorXd& D) {
    const Eigen::Index m = K.rows();
    Eigen::MatrixXd C = Eigen::MatrixXd::Identity(m, m);
    L = Eigen::MatrixXd::Identity(m, m);
    D = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const double nb = C.row(j) * K * C.row(j).transpose();
            if (nb <= 0.0) throw std::runtime_error("gs oracle: singular step");
            const double ip = K.row(i) * C.row(j).transpose(); // <X_i, B_j>
            L(i, j) = ip / nb;
            C.row(i) -= L(i, j) * C.row(j);
        }
        D(i) = C.row(i) * K * C.row(i).transpose();
    }
}

} // namespace oracle
