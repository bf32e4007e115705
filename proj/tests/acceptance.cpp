// Acceptance suite: every end-to-end claim checked at its stated tolerance,
// one PASS/FAIL line per criterion. Exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "mdq/codec.hpp"
#include "mdq/entropy.hpp"
#include "mdq/geometry.hpp"
#include "mdq/harness.hpp"
#include "mdq/lattice.hpp"
#include "mdq/region.hpp"
#include "mdq/sources.hpp"
#include "oracles.hpp"

namespace {

int g_failures = 0;

struct Check {
    bool ok = true;
    std::string detail;
    Check& add(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
        return *this;
    }
};

void report(int idx, const std::string& name, const Check& c, double seconds) {
    std::printf("[%d/8] %-34s %s  (%.1fs)%s%s\n", idx, name.c_str(), c.ok ? "PASS" : "FAIL",
                seconds, c.detail.empty() ? "" : "  -- ", c.detail.c_str());
    if (!c.ok) ++g_failures;
}

double now() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

const mdq::DistortionTriple kRunning{1.0, 0.1, 0.1, 0.05};
const mdq::DistortionTriple kHarmonic{1.0, 0.1, 0.1, 1.0 / 19.0};
constexpr std::size_t kN = 1000000;

struct MatrixRun {
    mdq::SimReport report;
};

std::map<std::string, mdq::SimReport> g_runs; // "<source>/<kind>"

const mdq::SimReport& matrix_run(mdq::SourceFamily family, mdq::TopologyKind kind) {
    const std::string key = mdq::to_string(family) + "/" + mdq::to_string(kind);
    auto it = g_runs.find(key);
    if (it != g_runs.end()) return it->second;
    mdq::SourceSpec src;
    src.family = family;
    const mdq::DistortionTriple& d = kind == mdq::TopologyKind::separate ? kHarmonic : kRunning;
    const mdq::RateTarget target = kind == mdq::TopologyKind::successive
                                       ? mdq::RateTarget::vertex(1)
                                       : mdq::RateTarget::balanced();
    const std::uint64_t seed = 1000 + 13 * std::uint64_t(family) + std::uint64_t(kind);
    return g_runs.emplace(key, mdq::run_experiment(src, d, target, kind, kN, seed)).first->second;
}

void criterion1_region_closed_forms() {
    const double t0 = now();
    Check c;
    mdq::GaussMDParams p = mdq::test_channel_params(kRunning);
    oracle::Region o{1.0, 0.1, 0.1, 0.05};

    auto close = [](double a, double b) { return std::fabs(a - b) <= 1e-6; };
    c.add(close(p.psi, o.psi()), "psi " + std::to_string(p.psi) + " vs oracle");
    c.add(close(p.psi, 5.013889), "psi vs 5.013889");
    c.add(close(p.sum_rate, o.sum_rate()), "sum rate vs oracle");
    c.add(close(p.vertex1.r1, o.r1_v1()), "R1(V1)");
    c.add(close(p.vertex1.r2, o.r2_v1()), "R2(V1)");
    c.add(close(p.vertex1.r1, 1.660964), "R1(V1) vs 1.660964");
    auto t3 = mdq::split_sigma_t3_balanced(p);
    c.add(close(t3.value, o.balanced_t3()), "balanced T3 vs oracle");
    c.add(close(t3.value, 0.110957), "balanced T3 vs 0.110957");
    std::printf("      psi=%.9f sum=%.9f V1=(%.9f, %.9f) T3=%.9f\n", p.psi, p.sum_rate,
                p.vertex1.r1, p.vertex1.r2, t3.value);
    report(1, "region closed forms (1e-6)", c, now() - t0);
}

void criterion2_ecdq_properties() {
    const double t0 = now();
    Check c;
    mdq::GaussMDParams p = mdq::test_channel_params(kRunning);
    mdq::DitheredLattice q = mdq::DitheredLattice::for_noise_variance(p.eb2, 77, 1);
    mdq::SourceSpec src;
    src.seed = 78;
    mdq::SourceSampler sampler(src);
    std::vector<double> x(kN), err(kN);
    double var = 0.0;
    for (std::size_t t = 0; t < kN; ++t) {
        x[t] = sampler.sample(t);
        err[t] = q.quantize1(x[t], t).w - x[t];
        var += err[t] * err[t];
    }
    var /= double(kN);
    const double half = 0.5 * q.effective_step();
    const double ks = mdq::ks_statistic_uniform(err, -half, half);
    const double corr = mdq::correlation(x, err);
    c.add(ks < mdq::ks_critical(0.01), "KS " + std::to_string(ks) + " >= 1.628");
    c.add(std::fabs(corr) < 0.01, "corr " + std::to_string(corr));
    c.add(std::fabs(var - p.eb2) <= 0.01 * p.eb2, "error variance " + std::to_string(var));
    std::printf("      KS=%.3f (crit 1.628), corr=%.5f, var=%.6f vs %.6f\n", ks, corr, var, p.eb2);
    report(2, "ECDQ properties 1-3", c, now() - t0);
}

void criterion3_covariance_matching() {
    const double t0 = now();
    Check c;
    for (auto family :
         {mdq::SourceFamily::gaussian, mdq::SourceFamily::uniform, mdq::SourceFamily::laplacian})
        for (auto kind : {mdq::TopologyKind::successive, mdq::TopologyKind::splitting}) {
            const mdq::SimReport& r = matrix_run(family, kind);
            c.add(r.cov_max_delta <= 0.01, mdq::to_string(family) + "/" + mdq::to_string(kind) +
                                               " delta " + std::to_string(r.cov_max_delta));
        }
    report(3, "covariance matching (thm 2-3)", c, now() - t0);
}

void criterion4_distortions() {
    const double t0 = now();
    Check c;
    for (auto family :
         {mdq::SourceFamily::gaussian, mdq::SourceFamily::uniform, mdq::SourceFamily::laplacian})
        for (auto kind : {mdq::TopologyKind::successive, mdq::TopologyKind::splitting,
                          mdq::TopologyKind::separate, mdq::TopologyKind::reuse}) {
            const mdq::SimReport& r = matrix_run(family, kind);
            const std::string key = mdq::to_string(family) + "/" + mdq::to_string(kind);
            c.add(std::fabs(r.d1.mean - r.d.d1) <= 3.0 * r.d1.std_error, key + " D1");
            c.add(std::fabs(r.d2.mean - r.d.d2) <= 3.0 * r.d2.std_error, key + " D2");
            c.add(std::fabs(r.d3.mean - r.d.d3) <= 3.0 * r.d3.std_error, key + " D3");
        }
    report(4, "distortions within 3 SE", c, now() - t0);
}

void criterion5_rate_budgets() {
    const double t0 = now();
    Check c;
    const double red = mdq::scalar_stage_redundancy();

    // gaussian budgets, splitting (two-stage description 2)
    const mdq::SimReport& g = matrix_run(mdq::SourceFamily::gaussian, mdq::TopologyKind::splitting);
    const double b1 = g.params.r1_split + 0.2546 + 0.02;
    const double b2 = g.params.r2_split + 0.5092 + 0.03;
    c.add(g.rate1 <= b1, "gaussian R1 " + std::to_string(g.rate1) + " > " + std::to_string(b1));
    c.add(g.rate2 <= b2, "gaussian R2 " + std::to_string(g.rate2) + " > " + std::to_string(b2));

    // gaussian successive at V1: single-stage budgets
    const mdq::SimReport& gs = matrix_run(mdq::SourceFamily::gaussian, mdq::TopologyKind::successive);
    c.add(gs.rate1 <= gs.params.vertex1.r1 + red + 0.02, "succ R1");
    c.add(gs.rate2 <= gs.params.vertex1.r2 + red + 0.02, "succ R2");

    // non-gaussian sources stay within the gaussian-case budgets
    for (auto family : {mdq::SourceFamily::uniform, mdq::SourceFamily::laplacian}) {
        const mdq::SimReport& r = matrix_run(family, mdq::TopologyKind::splitting);
        c.add(r.rate1 <= b1, mdq::to_string(family) + " R1");
        c.add(r.rate2 <= b2, mdq::to_string(family) + " R2");
    }
    std::printf("      gaussian R1=%.4f (<= %.4f)  R2=%.4f (<= %.4f)\n", g.rate1, b1, g.rate2, b2);
    report(5, "rate budgets (nbound1/nbound2)", c, now() - t0);
}

void criterion6_special_cases() {
    const double t0 = now();
    Check c;
    // harmonic bound: empirical error cross-correlation vanishes
    const mdq::SimReport& sep = matrix_run(mdq::SourceFamily::gaussian, mdq::TopologyKind::separate);
    mdq::GaussMDParams hp = sep.params;
    mdq::CodecTopology topo = mdq::build(mdq::TopologyKind::separate, hp, 314);
    mdq::SourceSpec src;
    src.seed = 314;
    auto x = mdq::SourceSampler(src).samples(kN);
    auto streams = mdq::encode(topo, x);
    Eigen::MatrixXd ke = mdq::empirical_second_moments(topo, x, streams);
    const double e12 = ke(1, 2) - ke(0, 1) - ke(0, 2) + ke(0, 0); // E(W1-X)(W2-X)
    const double v1 = ke(1, 1) - 2.0 * ke(0, 1) + ke(0, 0);
    const double v2 = ke(2, 2) - 2.0 * ke(0, 2) + ke(0, 0);
    const double rho = e12 / std::sqrt(v1 * v2);
    c.add(std::fabs(rho) <= 0.01, "error correlation " + std::to_string(rho));

    // no excess sum rate: E(U1 U2) = 0 from the closed forms
    mdq::GaussMDParams ns = mdq::test_channel_params({1.0, 0.6, 0.6, 0.2});
    c.add(std::fabs(ns.eu1u2()) <= 1e-10, "E U1U2 " + std::to_string(ns.eu1u2()));
    std::printf("      harmonic error corr=%.5f, no-excess-sum E(U1U2)=%.2e\n", rho, ns.eu1u2());
    report(6, "special cases (IV-D)", c, now() - t0);
}

void criterion7_scalar_geometry() {
    const double t0 = now();
    Check c;
    // Fig 8(a)
    mdq::ScalarScheme fa;
    fa.a1 = 2.0;
    fa.a2 = -1.0;
    fa.delta_a = fa.delta_b = 1.0 / 16.0;
    fa.x_lo = -8.0;
    fa.x_hi = 8.0;
    auto da = mdq::cell_distortions(fa, mdq::compute_cells(fa), mdq::gaussian_pdf(1.0));
    c.add(std::fabs(da.d_central / da.d_cx - 0.25) <= 0.05,
          "fig8a D3/D1 " + std::to_string(da.d_central / da.d_cx));

    // Fig 8(b), border cells excluded
    mdq::ScalarScheme fb = fa;
    fb.delta_b = fb.delta_a / 64.0;
    auto db = mdq::cell_distortions(fb, mdq::compute_cells(fb), mdq::gaussian_pdf(1.0));
    c.add(std::fabs(db.d_cs / db.d_cx - 0.75) <= 0.05,
          "fig8b D2/D1 " + std::to_string(db.d_cs / db.d_cx));

    const double a2 = mdq::solve_balanced_a2();
    c.add(std::fabs(a2 + 1.0445) <= 0.0005, "a2 root " + std::to_string(a2));
    c.add(std::fabs(mdq::balanced_a2_cubic_residual(a2)) <= 1e-8, "cubic residual");

    mdq::BalancedSplitConfig cfg; // R = 8 bits, q_a at 4
    auto rep = mdq::balanced_split_analysis(cfg);
    c.add(std::fabs(rep.gap_db - 2.596) <= 0.05, "product gap " + std::to_string(rep.gap_db));

    const double mdsq = mdq::mdsq_reference_gap_db();
    c.add(std::fabs(mdsq - 2.67) <= 0.005, "MDSQ reference " + std::to_string(mdsq));
    std::printf("      fig8a D3/D1=%.4f fig8b D2/D1=%.4f a2=%.5f gap=%.4f dB mdsq=%.4f dB\n",
                da.d_central / da.d_cx, db.d_cs / db.d_cx, a2, rep.gap_db, mdsq);
    report(7, "scalar geometry (VI, App IV)", c, now() - t0);
}

void criterion8_highres_trend() {
    const double t0 = now();
    Check c;
    auto rows = mdq::highres_acceptance(kRunning, {1.0, 0.25, 0.0625}, 4000000, 2026);
    for (const auto& r : rows) {
        c.add(std::fabs(r.outer_sum - r.theory_sum) <= 1e-12, "phi != psi at scale");
        std::printf("      scale %-7.4f redundancy %.4f bits (budget %.4f)\n", r.scale,
                    r.redundancy, r.budget + 0.05);
    }
    // estimator noise allowance on the monotonicity comparison
    for (std::size_t i = 1; i < rows.size(); ++i)
        c.add(rows[i].redundancy <= rows[i - 1].redundancy + 0.005,
              "redundancy not non-increasing at scale " + std::to_string(rows[i].scale));
    c.add(rows.back().redundancy <= 3.0 * 0.2546 + 0.05,
          "final redundancy " + std::to_string(rows.back().redundancy));
    report(8, "high-resolution trend (thm 4)", c, now() - t0);
}

} // namespace

int main() {
    std::printf("acceptance suite: Gaussian MD quantization via Gram-Schmidt\n");
    criterion1_region_closed_forms();
    criterion2_ecdq_properties();
    criterion3_covariance_matching();
    criterion4_distortions();
    criterion5_rate_budgets();
    criterion6_special_cases();
    criterion7_scalar_geometry();
    criterion8_highres_trend();
    if (g_failures == 0)
        std::printf("all 8 criteria PASS\n");
    else
        std::printf("%d criterion(s) FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
