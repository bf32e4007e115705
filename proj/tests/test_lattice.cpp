#include <doctest.h>

#include <cmath>
#include <vector>

#include "mdq/entropy.hpp"
#include "mdq/lattice.hpp"
#include "mdq/rng.hpp"

using mdq::DitheredLattice;

TEST_CASE("lattice points map to themselves with zero dither") {
    DitheredLattice q(1, 1.0, 1, 0);
    auto s = q.quantize1_with_base_dither(0.0, 0.0);
    CHECK(s.index == 0);
    CHECK(s.w == 0.0);
}

TEST_CASE("forced-dither example: step 2, x=0.7, z=0.2") {
    DitheredLattice q(1, 2.0, 1, 0);
    auto s = q.quantize1_with_base_dither(0.7, 0.2);
    CHECK(s.index == 0);
    CHECK(s.w == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("error moments match the dither law") {
    DitheredLattice q(1, 1.0, 7, 3);
    const std::size_t n = 1000000;
    double mean = 0.0, var = 0.0;
    const double x = 0.379; // arbitrary fixed input
    for (std::size_t t = 0; t < n; ++t) {
        const double e = q.quantize1(x, t).w - x;
        mean += e;
        var += e * e;
    }
    mean /= double(n);
    var /= double(n);
    CHECK(std::fabs(mean) < 3.0 * (1.0 / std::sqrt(12.0)) / 1000.0);
    CHECK(std::fabs(var - 1.0 / 12.0) < 0.01 / 12.0);
}

TEST_CASE("quantization error is uniform (KS) and input-independent") {
    DitheredLattice q(1, 0.7, 11, 2);
    mdq::CounterRng src(3, 9);
    const std::size_t n = 200000;
    std::vector<double> err(n), x(n);
    for (std::size_t t = 0; t < n; ++t) {
        x[t] = src.gaussian(t);
        err[t] = q.quantize1(x[t], t).w - x[t];
    }
    CHECK(mdq::ks_statistic_uniform(err, -0.35, 0.35) < mdq::ks_critical(0.01));
    CHECK(std::fabs(mdq::correlation(x, err)) < 0.01);
}

TEST_CASE("identical seeds reproduce identical index streams") {
    DitheredLattice a(1, 0.9, 5, 1), b(1, 0.9, 5, 1), c(1, 0.9, 5, 2);
    mdq::CounterRng src(8, 0);
    bool any_differ = false;
    for (std::uint64_t t = 0; t < 2000; ++t) {
        const double x = src.gaussian(t);
        CHECK(a.quantize1(x, t).index == b.quantize1(x, t).index);
        any_differ = any_differ || a.quantize1(x, t).index != c.quantize1(x, t).index;
    }
    CHECK(any_differ);
}

TEST_CASE("decoder rebuilds the reproduction from the index alone") {
    DitheredLattice q(1, 1.3, 21, 4);
    mdq::CounterRng src(4, 0);
    for (std::uint64_t t = 0; t < 1000; ++t) {
        const double x = 2.0 * src.gaussian(t);
        auto s = q.quantize1(x, t);
        CHECK(q.reproduce1(s.index, t) == doctest::Approx(s.w).epsilon(1e-15));
    }
}

TEST_CASE("shaping") {
    DitheredLattice base(1, 1.0, 2, 0);

    SUBCASE("identity gain") {
        auto s = base.shaped(1.0);
        CHECK(s.effective_step() == 1.0);
        CHECK(s.quantize1(0.3, 5).w == base.quantize1(0.3, 5).w);
    }
    SUBCASE("gain 2 doubles the step and quadruples the moment") {
        auto s = base.shaped(2.0);
        CHECK(s.effective_step() == 2.0);
        CHECK(s.second_moment() == doctest::Approx(1.0 / 3.0));
        auto q = s.quantize1_with_base_dither(1.3, 0.0);
        CHECK(q.w == doctest::Approx(2.0)); // 2 * round(0.65)
    }
    SUBCASE("exact equivalence with the scaled base quantizer") {
        mdq::CounterRng src(6, 0);
        for (double a : {2.0, 0.3, -1.7}) {
            auto s = base.shaped(a);
            for (std::uint64_t t = 0; t < 500; ++t) {
                const double x = 3.0 * src.gaussian(t);
                auto lhs = s.quantize1(x, t);
                auto rhs = base.quantize1(x / a, t);
                CHECK(lhs.index == rhs.index);
                CHECK(lhs.w == a * rhs.w);
            }
        }
    }
    SUBCASE("zero gain rejected") { CHECK_THROWS_AS(base.shaped(0.0), std::invalid_argument); }
}

TEST_CASE("step from target noise variance") {
    CHECK(*DitheredLattice::step_for_noise_variance(1.0 / 12.0) == doctest::Approx(1.0));
    CHECK(*DitheredLattice::step_for_noise_variance(0.111111) == doctest::Approx(1.154700).epsilon(1e-5));
    CHECK(!DitheredLattice::step_for_noise_variance(0.0).has_value()); // pass-through stage
    CHECK_THROWS_AS(DitheredLattice::step_for_noise_variance(-0.1), std::invalid_argument);
}

TEST_CASE("input validation") {
    DitheredLattice q(1, 1.0, 1, 0);
    CHECK_THROWS_WITH_AS(q.quantize1(std::nan(""), 0), doctest::Contains("coordinate 0"),
                         std::invalid_argument);
    CHECK_THROWS_AS(q.quantize1(1e12, 0), std::domain_error); // index overflow
    CHECK_THROWS_AS(DitheredLattice(1, 0.0, 1, 0), std::invalid_argument);
}

TEST_CASE("vector quantization runs per axis with independent dither") {
    DitheredLattice q(3, 1.0, 9, 0);
    std::vector<double> x{0.2, -0.4, 1.1};
    auto s = q.quantize(x, 0);
    CHECK(s.index.size() == 3);
    auto w = q.reproduce(s.index, 0);
    for (int a = 0; a < 3; ++a) CHECK(w[std::size_t(a)] == doctest::Approx(s.w[std::size_t(a)]));
    // different axes see different dither
    CHECK(q.dither_component(0, 0) != q.dither_component(0, 1));
}

TEST_CASE("tabulated normalized second moments") {
    CHECK(mdq::gn_opt(1) == doctest::Approx(1.0 / 12.0));
    CHECK(mdq::gn_opt(2) == doctest::Approx(0.0801875).epsilon(1e-4));
    CHECK(mdq::gn_opt_limit() == doctest::Approx(0.05854983).epsilon(1e-6));
    CHECK_THROWS_AS(mdq::gn_opt(3), std::invalid_argument);
}
