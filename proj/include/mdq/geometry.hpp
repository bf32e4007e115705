#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mdq {

using Pdf = std::function<double(double)>;

Pdf gaussian_pdf(double variance);
Pdf uniform_pdf(double variance);
Pdf laplacian_pdf(double variance);

// Undithered scalar scheme of the geometric analysis. q_a has step delta_a
// with thresholds at (j + qa_offset) delta_a and midpoint reproductions;
// q_b quantizes s = a1 x + a2 y where y is the q_a reproduction. The
// optional refinement stage q_c quantizes r = b3 x + b4 t + b5 y with t the
// q_b (s-space) reproduction, inside one q_a cell at a time.
struct ScalarScheme {
    double delta_a = 0.0, delta_b = 0.0;
    double a1 = 2.0, a2 = -1.0;
    double x_lo = 0.0, x_hi = 0.0;
    double qa_offset = -0.5; // thresholds at (j - 1/2) delta_a: reproductions at j delta_a
    double qb_offset = 0.0;  // thresholds at i delta_b: staggered against q_a

    bool has_refinement = false;
    double b3 = 2.0, b4 = -1.0, b5 = 0.0;
    double delta_c = 0.0;
    double qc_offset = 0.0;

    double qa_threshold(long long j) const { return (double(j) + qa_offset) * delta_a; }
    double qa_rep(long long j) const { return qa_threshold(j) + 0.5 * delta_a; }
    double qb_threshold(long long i) const { return (double(i) + qb_offset) * delta_b; }
    double qb_rep(long long i) const { return qb_threshold(i) + 0.5 * delta_b; }
    double qc_threshold(long long m) const { return (double(m) + qc_offset) * delta_c; }
};

struct Interval {
    double lo = 0.0, hi = 0.0;
    double length() const { return hi - lo; }
};

struct PartitionCell {
    enum class Owner { cx, cs, cxr };
    Owner owner;
    long long i1 = 0, i2 = 0; // cx: (j,-); cs: (i,-); cxr: (i_a, i_c)
    std::vector<Interval> parts;
    bool border = false; // a constituent segment is cut at a q_a cell border
};

struct CellSet {
    std::vector<PartitionCell> cx, cs, cxr;
    // finest joint cells: one entry per (q_a cell j, q_b cell i[, q_c cell m])
    struct Atom {
        Interval iv;
        long long j = 0, i = 0, m = 0;
        bool border = false;
    };
    std::vector<Atom> atoms;
    bool low_ratio_flag = false; // delta_a / delta_b < 8
};

CellSet compute_cells(const ScalarScheme& s);

enum class ReproductionMode { midpoint, centroid };

struct CellDistortions {
    // per-partition mean squared errors, border C_s cells excluded / included
    double d_cx = 0.0;
    double d_cs = 0.0, d_cs_all = 0.0;
    double d_cxr = 0.0;
    double d_central = 0.0;
    double mass = 0.0;          // pdf mass covered by the analysis range
    double mass_excluded = 0.0; // mass of excluded border cells
    // three-interval C_s statistics (interior cells)
    double three_piece_mass_fraction = 0.0;
    double three_piece_count_fraction = 0.0;
    // partition entropies, bits
    double h_qa = 0.0, h_qb = 0.0, h_qc_given_qa = 0.0;
};

CellDistortions cell_distortions(const ScalarScheme& s, const CellSet& cells, const Pdf& pdf,
                                 ReproductionMode mode = ReproductionMode::midpoint);

// E(r | q_a(x) = j) under locally-uniform weighting, and the b5 that zeroes it
double expected_r_given_qa(const ScalarScheme& s, long long j);
double refine_b5(const ScalarScheme& s, long long j = 1);

// root of the balanced-side-distortion cubic 5 a^3 + 4 a^2 + 4/3 = 0 on (-4/3, -1)
double solve_balanced_a2();
double balanced_a2_cubic_residual(double a);

// closed-form q_b entropy rate: -log2(delta_b) + (3 + 3 a2) log2(3/2) + h
double qb_rate_closed_form(double delta_b, double a2, double h_bits);

// D3*D1 against the high-resolution product bound var^2 2^{-4R} / 4, in dB
double distortion_product_gap_db(double d1, double d3, double rate, double var_x);

// reference gap of index-assignment MDSQ with optimized central cells:
// 10 log10((2 pi e / 12)^2) - 0.4, the published 2.67 dB figure
double mdsq_reference_gap_db();

struct HighresPoint {
    double r1 = 0.0, r2 = 0.0;
    double d1 = 0.0, d2 = 0.0, d3 = 0.0;
    bool high_resolution_valid = true; // rates >= 4 bits
    double product_gap_db = 0.0;       // balanced product gap
};

// Fig. 8(b)-style successive operating point, plus the timeshared balanced
// point obtained by swapping the descriptions
struct SuccessivePoint {
    HighresPoint corner;    // (R1, R2, D1, 3/4 D1, D3)
    HighresPoint timeshare; // balanced: ((R1+R2)/2, ..., 7/8 D1, 7/8 D1, D3)
};
SuccessivePoint highres_successive(double r1, double r2, double var_x);

// balanced splitting construction at description rate R with q_a spending
// qa_rate of description 1
HighresPoint highres_splitting_balanced(double rate, double qa_rate, double var_x);

// Build + analyze the full balanced-splitting scalar scheme and measure the
// distortion product gap from the computed partition.
struct BalancedSplitConfig {
    double rate = 8.0;
    double qa_rate = 2.0; // keeps delta_a / delta_b past the border-cell regime
    double var_x = 1.0;
    bool refine_b5 = true; // false: keep the nominal 2.9555 tap
    double range_sigmas = 8.0;
};

struct BalancedSplitReport {
    ScalarScheme scheme;
    CellDistortions dist;
    double d_side_qb = 0.0;   // description carrying the q_b index
    double d_side_qaqc = 0.0; // description carrying (q_a, q_c)
    double d_central = 0.0;
    double gap_db = 0.0;           // measured product gap at the nominal rate
    double gap_db_predicted = 0.0; // closed form
    double b5_used = 0.0;
    double er_given_qa1_nominal = 0.0; // E(r | q_a = 1) with b5 = 2.9555
    double er_given_qa1_used = 0.0;
};

BalancedSplitReport balanced_split_analysis(const BalancedSplitConfig& cfg);

// deterministic undithered run mapping samples through the scheme; decoders
// reproduce via the partition cells (mode-matched to cell_distortions)
struct SchemeSim {
    double d_cx = 0.0, d_cs = 0.0, d_central = 0.0;
    std::size_t samples = 0;
    std::size_t out_of_range = 0;
};
SchemeSim simulate_scheme(const ScalarScheme& s, const CellSet& cells,
                          const std::vector<double>& x, ReproductionMode mode);

std::string cells_to_csv(const ScalarScheme& s, const CellSet& cells, const Pdf& pdf,
                         ReproductionMode mode = ReproductionMode::midpoint);

// adaptive Gauss-Legendre quadrature (7/15 pair)
double integrate(const std::function<double(double)>& f, double lo, double hi, double abs_tol);

} // namespace mdq
