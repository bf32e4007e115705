#include <doctest.h>

#include <cmath>
#include <random>

#include "mdq/gs.hpp"
#include "mdq/lattice.hpp"
#include "mdq/region.hpp"
#include "mdq/rng.hpp"
#include "oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_psd(int m, unsigned seed, int rank = -1) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> g;
    const int r = rank < 0 ? m : rank;
    MatrixXd a(m, r);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < r; ++j) a(i, j) = g(gen);
    return a * a.transpose();
}

// covariance of (X, U1, U2) for the Gaussian test channel
MatrixXd test_channel_cov(const mdq::GaussMDParams& p) {
    const double s = p.var_x, u = p.var_t0;
    const double cross = s + u - std::sqrt(p.var_t1) * std::sqrt(p.var_t2);
    MatrixXd k(3, 3);
    k << s, s, s, s, s + u + p.var_t1, cross, s, cross, s + u + p.var_t2;
    return k;
}

} // namespace

TEST_CASE("identity covariance is already orthogonal") {
    auto dec = mdq::ldl(MatrixXd::Identity(3, 3));
    CHECK(dec.L.isApprox(MatrixXd::Identity(3, 3)));
    for (int i = 0; i < 3; ++i) CHECK(dec.D(i) == doctest::Approx(1.0));
}

TEST_CASE("hand-checked 2x2 factorization") {
    MatrixXd k(2, 2);
    k << 1.0, 0.5, 0.5, 1.0;
    auto dec = mdq::ldl(k);
    CHECK(dec.L(1, 0) == doctest::Approx(0.5));
    CHECK(dec.D(0) == doctest::Approx(1.0));
    CHECK(dec.D(1) == doctest::Approx(0.75));
    CHECK(dec.predictor_rows[1](0) == doctest::Approx(0.5));
}

TEST_CASE("innovation variances of the MD test channel match the closed forms") {
    mdq::GaussMDParams p = mdq::test_channel_params({1.0, 0.1, 0.1, 0.05});
    auto dec = mdq::ldl(test_channel_cov(p));
    CHECK(dec.D(1) == doctest::Approx(p.eb2).epsilon(1e-10)); // sigma_T0^2 + sigma_T1^2
    CHECK(dec.D(1) == doctest::Approx(0.111111).epsilon(1e-5));
    CHECK(dec.D(2) == doctest::Approx(p.eb3).epsilon(1e-10));
    CHECK(dec.D(2) == doctest::Approx(0.11080).epsilon(1e-4));
    // predictor row of U2 given (X, U1) carries (a1, a2)
    CHECK(dec.predictor_rows[2](0) == doctest::Approx(p.a1).epsilon(1e-10));
    CHECK(dec.predictor_rows[2](1) == doctest::Approx(p.a2).epsilon(1e-10));
}

TEST_CASE("innovations_variances shortcuts") {
    SUBCASE("diagonal") {
        VectorXd d = mdq::innovations_variances(Eigen::Vector3d(2.0, 3.0, 4.0).asDiagonal());
        CHECK(d(0) == 2.0);
        CHECK(d(1) == 3.0);
        CHECK(d(2) == 4.0);
    }
    SUBCASE("correlated pair") {
        MatrixXd k(2, 2);
        k << 1.0, 0.8, 0.8, 1.0;
        VectorXd d = mdq::innovations_variances(k);
        CHECK(d(1) == doctest::Approx(1.0 - 0.64));
    }
    SUBCASE("rank one kills later innovations") {
        Eigen::Vector3d v(1.0, 2.0, -1.0);
        auto dec = mdq::ldl(v * v.transpose());
        CHECK(dec.D(0) == doctest::Approx(1.0));
        CHECK(dec.D(1) == 0.0);
        CHECK(dec.D(2) == 0.0);
        CHECK(dec.pass_through[1]);
        CHECK(dec.pass_through[2]);
    }
}

TEST_CASE("reconstruction accuracy on random PSD matrices up to 16x16") {
    for (unsigned seed = 1; seed <= 6; ++seed) {
        const int m = 3 + int(seed * 2);
        MatrixXd k = random_psd(std::min(m, 16), seed);
        auto dec = mdq::ldl(k);
        const double err = (dec.reconstruct() - k).cwiseAbs().maxCoeff();
        CHECK(err <= 1e-10 * std::max(1.0, k.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("ldl matches brute-force Gram-Schmidt via inner products") {
    for (unsigned seed = 10; seed < 14; ++seed) {
        MatrixXd k = random_psd(6, seed);
        auto dec = mdq::ldl(k);
        MatrixXd l_ref;
        VectorXd d_ref;
        oracle::gs_bruteforce(k, l_ref, d_ref);
        CHECK((dec.L - l_ref).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((dec.D - d_ref).cwiseAbs().maxCoeff() < 1e-10 * k.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("empirical innovations are orthogonal") {
    MatrixXd k = random_psd(4, 99);
    auto dec = mdq::ldl(k);
    Eigen::LLT<MatrixXd> chol(k);
    MatrixXd linv = dec.L.inverse();
    mdq::CounterRng rng(17, 0);
    const std::size_t n = 1000000;
    MatrixXd acc = MatrixXd::Zero(4, 4);
    Eigen::Vector4d x, b;
    for (std::size_t t = 0; t < n; ++t) {
        for (int i = 0; i < 4; ++i) x(i) = rng.uniform_open(t, std::uint32_t(i));
        // gaussianize via Box-Muller pairs would be cleaner; moments suffice here
        for (int i = 0; i < 4; ++i)
            x(i) = std::sqrt(-2.0 * std::log(x(i))) *
                   std::cos(6.283185307179586 * rng.uniform_open(t, std::uint32_t(4 + i)));
        b = linv * (chol.matrixL() * x);
        acc += b * b.transpose();
    }
    acc /= double(n);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < i; ++j) {
            const double se = std::sqrt(dec.D(i) * dec.D(j) / double(n));
            CHECK(std::fabs(acc(i, j)) < 4.0 * se);
        }
}

TEST_CASE("sequential dithered chain reproduces the covariance") {
    // X~_1 = X_1, X~_i = Q_{i-1}(K_{i-1} X~ + Z) - Z with steps from the
    // innovation variances; second moments must match K for any source
    mdq::GaussMDParams p = mdq::test_channel_params({1.0, 0.1, 0.1, 0.05});
    MatrixXd k = test_channel_cov(p);
    auto dec = mdq::ldl(k);

    std::vector<mdq::DitheredLattice> q;
    for (int i = 1; i < 3; ++i)
        q.push_back(mdq::DitheredLattice::for_noise_variance(dec.D(i), 33, std::uint32_t(i)));

    mdq::CounterRng src(71, 0);
    const std::size_t n = 1000000;
    MatrixXd acc = MatrixXd::Zero(3, 3);
    Eigen::Vector3d xt;
    for (std::size_t t = 0; t < n; ++t) {
        xt(0) = src.gaussian(t);
        for (int i = 1; i < 3; ++i) {
            double pred = 0.0;
            for (int j = 0; j < i; ++j) pred += dec.predictor_rows[std::size_t(i)](j) * xt(j);
            xt(i) = q[std::size_t(i - 1)].quantize1(pred, t).w;
        }
        acc += xt * xt.transpose();
    }
    acc /= double(n);
    CHECK((acc - k).cwiseAbs().maxCoeff() < 0.01 * k.diagonal().maxCoeff());
}

TEST_CASE("degenerate covariance handling") {
    SUBCASE("duplicated variable gets a minimum-norm predictor") {
        MatrixXd k(3, 3);
        k << 1, 1, 1, 1, 1, 1, 1, 1, 2;
        auto dec = mdq::ldl(k);
        CHECK(dec.pass_through[1]);
        CHECK(dec.predictor_rows[2](0) == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(dec.predictor_rows[2](1) == doctest::Approx(0.5).epsilon(1e-9));
    }
    SUBCASE("subspace extraction") {
        MatrixXd k = Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal();
        auto sub = mdq::vector_gs_degenerate(k, 1e-9);
        CHECK(sub.rank == 2);
        CHECK(sub.lambda(0) == doctest::Approx(1.0));

        MatrixXd ones(2, 2);
        ones << 1, 1, 1, 1;
        auto s2 = mdq::vector_gs_degenerate(ones, 1e-9);
        CHECK(s2.rank == 1);
        CHECK(s2.lambda(0) == doctest::Approx(2.0));
        CHECK(std::fabs(s2.basis(0, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)));

        auto s0 = mdq::vector_gs_degenerate(MatrixXd::Zero(2, 2), 1e-9);
        CHECK(s0.rank == 0);
    }
}

TEST_CASE("covariance validation") {
    MatrixXd bad(2, 2);
    bad << 1.0, 0.5, 0.4, 1.0;
    CHECK_THROWS_AS(mdq::ldl(bad), std::invalid_argument);
    MatrixXd indef(2, 2);
    indef << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_WITH_AS(mdq::ldl(indef), doctest::Contains("eigenvalue"), std::invalid_argument);
}
