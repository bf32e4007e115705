#include "mdq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mdq {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1]
constexpr double kX7[] = {0.0, 0.4058451513773972, -0.4058451513773972, 0.7415311855993945,
                          -0.7415311855993945, 0.9491079123427585, -0.9491079123427585};
constexpr double kW7[] = {0.4179591836734694, 0.3818300505051189, 0.3818300505051189,
                          0.2797053914892766, 0.2797053914892766, 0.1294849661688697,
                          0.1294849661688697};

constexpr double kX15[] = {0.0,
                           0.2011940939974345,
                           -0.2011940939974345,
                           0.3941513470775634,
                           -0.3941513470775634,
                           0.5709721726085388,
                           -0.5709721726085388,
                           0.7244177313601701,
                           -0.7244177313601701,
                           0.8482065834104272,
                           -0.8482065834104272,
                           0.9372733924007060,
                           -0.9372733924007060,
                           0.9879925180204854,
                           -0.9879925180204854};
constexpr double kW15[] = {0.2025782419255613, 0.1984314853271116, 0.1984314853271116,
                           0.1861610000155622, 0.1861610000155622, 0.1662692058169939,
                           0.1662692058169939, 0.1395706779261543, 0.1395706779261543,
                           0.1071592204671719, 0.1071592204671719, 0.0703660474881081,
                           0.0703660474881081, 0.0307532419961173, 0.0307532419961173};

double gl(const std::function<double(double)>& f, double lo, double hi, const double* x,
          const double* w, int n) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += w[i] * f(c + h * x[i]);
    return acc * h;
}

double integrate_rec(const std::function<double(double)>& f, double lo, double hi, double abs_tol,
                     int depth) {
    const double i7 = gl(f, lo, hi, kX7, kW7, 7);
    const double i15 = gl(f, lo, hi, kX15, kW15, 15);
    if (std::fabs(i15 - i7) <= abs_tol || depth >= 24) return i15;
    const double mid = 0.5 * (lo + hi);
    return integrate_rec(f, lo, mid, 0.5 * abs_tol, depth + 1) +
           integrate_rec(f, mid, hi, 0.5 * abs_tol, depth + 1);
}

struct CellMoments { // integrals of p, x p, x^2 p over the cell parts
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
};

CellMoments moments(const std::vector<Interval>& parts, const Pdf& pdf, double abs_tol) {
    CellMoments m;
    for (const Interval& iv : parts) {
        m.m0 += integrate_rec([&](double x) { return pdf(x); }, iv.lo, iv.hi, abs_tol, 0);
        m.m1 += integrate_rec([&](double x) { return x * pdf(x); }, iv.lo, iv.hi, abs_tol, 0);
        m.m2 += integrate_rec([&](double x) { return x * x * pdf(x); }, iv.lo, iv.hi, abs_tol, 0);
    }
    return m;
}

double span_midpoint(const std::vector<Interval>& parts) {
    double lo = parts.front().lo, hi = parts.front().hi;
    for (const Interval& iv : parts) {
        lo = std::min(lo, iv.lo);
        hi = std::max(hi, iv.hi);
    }
    return 0.5 * (lo + hi);
}

// E (x - rep)^2 restricted to the cell, given its moments
double sq_error(const CellMoments& m, double rep) {
    return m.m2 - 2.0 * rep * m.m1 + rep * rep * m.m0;
}

} // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi, double abs_tol) {
    if (!(hi > lo)) return 0.0;
    return integrate_rec(f, lo, hi, abs_tol, 0);
}

Pdf gaussian_pdf(double variance) {
    const double c = 1.0 / std::sqrt(2.0 * M_PI * variance), s2 = 2.0 * variance;
    return [c, s2](double x) { return c * std::exp(-x * x / s2); };
}

Pdf uniform_pdf(double variance) {
    const double half = std::sqrt(3.0 * variance);
    return [half](double x) { return std::fabs(x) <= half ? 0.5 / half : 0.0; };
}

Pdf laplacian_pdf(double variance) {
    const double b = std::sqrt(variance / 2.0);
    return [b](double x) { return std::exp(-std::fabs(x) / b) / (2.0 * b); };
}

CellSet compute_cells(const ScalarScheme& s) {
    if (!(s.delta_a > 0.0) || !(s.delta_b > 0.0))
        throw std::invalid_argument("compute_cells: stepsizes must be positive");
    if (!(s.x_hi > s.x_lo)) throw std::invalid_argument("compute_cells: empty analysis range");
    if (s.a2 > 0.0)
        throw std::invalid_argument("compute_cells: a2 > 0 breaks the staircase geometry (a2 <= 0 on the dominant face)");
    if (!(s.a1 > 0.0)) throw std::invalid_argument("compute_cells: a1 must be positive");
    if (s.has_refinement) {
        if (!(s.delta_c > 0.0)) throw std::invalid_argument("compute_cells: delta_c must be positive");
        if (!(s.b3 > 0.0)) throw std::invalid_argument("compute_cells: b3 must be positive");
    }

    CellSet out;
    out.low_ratio_flag = s.delta_a / s.delta_b < 8.0;
    const double snap = 1e-12 * (s.x_hi - s.x_lo);

    const long long j_lo = (long long)std::floor((s.x_lo - s.qa_offset * s.delta_a) / s.delta_a) - 1;
    const long long j_hi = (long long)std::floor((s.x_hi - s.qa_offset * s.delta_a) / s.delta_a) + 1;

    std::map<long long, std::vector<std::pair<Interval, bool>>> cs_map; // i -> pieces
    std::map<std::pair<long long, long long>, std::vector<std::pair<Interval, bool>>> cxr_map;

    for (long long j = j_lo; j <= j_hi; ++j) {
        const double c_lo = std::max(s.qa_threshold(j), s.x_lo);
        const double c_hi = std::min(s.qa_threshold(j) + s.delta_a, s.x_hi);
        if (!(c_hi > c_lo + snap)) continue;
        const bool clipped = c_lo > s.qa_threshold(j) + snap || c_hi < s.qa_threshold(j) + s.delta_a - snap;

        PartitionCell cx;
        cx.owner = PartitionCell::Owner::cx;
        cx.i1 = j;
        cx.parts = {{c_lo, c_hi}};
        cx.border = clipped;
        out.cx.push_back(cx);

        const double y = s.qa_rep(j);
        const double s_lo = s.a1 * c_lo + s.a2 * y;
        const double s_hi = s.a1 * c_hi + s.a2 * y;
        const long long i_lo = (long long)std::floor((s_lo - s.qb_offset * s.delta_b) / s.delta_b) - 1;
        const long long i_hi = (long long)std::floor((s_hi - s.qb_offset * s.delta_b) / s.delta_b) + 1;
        for (long long i = i_lo; i <= i_hi; ++i) {
            const double t0 = s.qb_threshold(i), t1 = t0 + s.delta_b;
            const double p0 = std::max(s_lo, t0), p1 = std::min(s_hi, t1);
            if (!(p1 > p0 + snap)) continue;
            // cut: the s-cell continues past this q_a cell (or the range)
            const bool cut = p0 > t0 + snap || p1 < t1 - snap;
            Interval xi{(p0 - s.a2 * y) / s.a1, (p1 - s.a2 * y) / s.a1};
            cs_map[i].push_back({xi, cut || clipped});

            if (!s.has_refinement) {
                out.atoms.push_back({xi, j, i, 0, cut || clipped});
            } else {
                const double t_rep = s.qb_rep(i);
                const double r0 = s.b3 * xi.lo + s.b4 * t_rep + s.b5 * y;
                const double r1 = s.b3 * xi.hi + s.b4 * t_rep + s.b5 * y;
                const long long m_lo =
                    (long long)std::floor((r0 - s.qc_offset * s.delta_c) / s.delta_c) - 1;
                const long long m_hi =
                    (long long)std::floor((r1 - s.qc_offset * s.delta_c) / s.delta_c) + 1;
                for (long long m = m_lo; m <= m_hi; ++m) {
                    const double u0 = std::max(r0, s.qc_threshold(m));
                    const double u1 = std::min(r1, s.qc_threshold(m) + s.delta_c);
                    if (!(u1 > u0 + snap)) continue;
                    Interval slice{xi.lo + (u0 - r0) / s.b3, xi.lo + (u1 - r0) / s.b3};
                    const bool slice_cut = u0 > s.qc_threshold(m) + snap || u1 < s.qc_threshold(m) + s.delta_c - snap;
                    cxr_map[{j, m}].push_back({slice, slice_cut || cut || clipped});
                    out.atoms.push_back({slice, j, i, m, slice_cut || cut || clipped});
                }
            }
        }
    }

    // assemble cells; contiguous pieces (e.g. the aligned case where a cell
    // straddles a q_a threshold seamlessly) merge into one interval
    auto assemble = [&](PartitionCell::Owner owner, long long i1, long long i2,
                        std::vector<std::pair<Interval, bool>>& pieces) {
        PartitionCell cell;
        cell.owner = owner;
        cell.i1 = i1;
        cell.i2 = i2;
        std::sort(pieces.begin(), pieces.end(),
                  [](const auto& a, const auto& b) { return a.first.lo < b.first.lo; });
        for (auto& [iv, cut] : pieces) {
            if (!cell.parts.empty() && iv.lo - cell.parts.back().hi <= snap)
                cell.parts.back().hi = iv.hi;
            else
                cell.parts.push_back(iv);
            cell.border = cell.border || cut;
        }
        return cell;
    };
    for (auto& [i, pieces] : cs_map)
        out.cs.push_back(assemble(PartitionCell::Owner::cs, i, 0, pieces));
    for (auto& [key, slices] : cxr_map)
        out.cxr.push_back(assemble(PartitionCell::Owner::cxr, key.first, key.second, slices));
    return out;
}

CellDistortions cell_distortions(const ScalarScheme& s, const CellSet& cells, const Pdf& pdf,
                                 ReproductionMode mode) {
    CellDistortions out;
    const double tol = 1e-12; // absolute tolerance per integral, variance units

    auto rep_of = [&](const std::vector<Interval>& parts, const CellMoments& m) {
        if (mode == ReproductionMode::centroid && m.m0 > 0.0) return m.m1 / m.m0;
        return span_midpoint(parts);
    };

    double mass_cx = 0.0;
    for (const PartitionCell& c : cells.cx) {
        CellMoments m = moments(c.parts, pdf, tol);
        out.d_cx += sq_error(m, rep_of(c.parts, m));
        mass_cx += m.m0;
        if (m.m0 > 0.0) out.h_qa -= m.m0 * std::log2(m.m0);
    }
    out.mass = mass_cx;
    if (mass_cx > 0.0) {
        out.h_qa = out.h_qa / mass_cx + std::log2(mass_cx);
        out.d_cx /= mass_cx;
    }

    double err_incl = 0.0, err_excl = 0.0, mass_excl = 0.0;
    double mass3 = 0.0, mass_int = 0.0;
    std::size_t count3 = 0, count_int = 0;
    for (const PartitionCell& c : cells.cs) {
        CellMoments m = moments(c.parts, pdf, tol);
        const double e = sq_error(m, rep_of(c.parts, m));
        err_incl += e;
        if (!c.border) {
            err_excl += e;
            mass_excl += m.m0;
            ++count_int;
            mass_int += m.m0;
            if (c.parts.size() >= 3) {
                ++count3;
                mass3 += m.m0;
            }
        }
        if (m.m0 > 0.0) out.h_qb -= m.m0 * std::log2(m.m0);
    }
    if (mass_cx > 0.0) {
        out.h_qb = out.h_qb / mass_cx + std::log2(mass_cx);
        out.d_cs_all = err_incl / mass_cx;
    }
    out.d_cs = mass_excl > 0.0 ? err_excl / mass_excl : 0.0;
    out.mass_excluded = mass_cx - mass_excl;
    out.three_piece_mass_fraction = mass_int > 0.0 ? mass3 / mass_int : 0.0;
    out.three_piece_count_fraction = count_int > 0 ? double(count3) / double(count_int) : 0.0;

    if (!cells.cxr.empty()) {
        double err = 0.0, mass = 0.0;
        std::map<long long, double> qa_mass;
        std::map<long long, double> qa_h;
        for (const PartitionCell& c : cells.cxr) {
            CellMoments m = moments(c.parts, pdf, tol);
            err += sq_error(m, rep_of(c.parts, m));
            mass += m.m0;
            if (m.m0 > 0.0) {
                qa_mass[c.i1] += m.m0;
                qa_h[c.i1] -= m.m0 * std::log2(m.m0);
            }
        }
        out.d_cxr = mass > 0.0 ? err / mass : 0.0;
        // H(i_c | i_a) = sum_j p(j) H(m | j)
        for (const auto& [j, pj] : qa_mass) {
            const double h = qa_h[j] / pj + std::log2(pj);
            out.h_qc_given_qa += pj / mass * h;
        }
    }

    double err_central = 0.0, mass_central = 0.0;
    for (const CellSet::Atom& a : cells.atoms) {
        CellMoments m = moments({a.iv}, pdf, tol);
        const double rep = mode == ReproductionMode::centroid && m.m0 > 0.0
                               ? m.m1 / m.m0
                               : 0.5 * (a.iv.lo + a.iv.hi);
        err_central += sq_error(m, rep);
        mass_central += m.m0;
    }
    out.d_central = mass_central > 0.0 ? err_central / mass_central : 0.0;
    return out;
}

double expected_r_given_qa(const ScalarScheme& s, long long j) {
    if (!s.has_refinement) throw std::invalid_argument("expected_r_given_qa: no refinement stage");
    const double y = s.qa_rep(j);
    const double c_lo = s.qa_threshold(j), c_hi = c_lo + s.delta_a;
    const double s_lo = s.a1 * c_lo + s.a2 * y, s_hi = s.a1 * c_hi + s.a2 * y;
    const long long i_lo = (long long)std::floor((s_lo - s.qb_offset * s.delta_b) / s.delta_b) - 1;
    const long long i_hi = (long long)std::floor((s_hi - s.qb_offset * s.delta_b) / s.delta_b) + 1;
    double acc = 0.0, len = 0.0;
    for (long long i = i_lo; i <= i_hi; ++i) {
        const double p0 = std::max(s_lo, s.qb_threshold(i));
        const double p1 = std::min(s_hi, s.qb_threshold(i) + s.delta_b);
        if (!(p1 > p0)) continue;
        const double x0 = (p0 - s.a2 * y) / s.a1, x1 = (p1 - s.a2 * y) / s.a1;
        const double t = s.qb_rep(i);
        const double r_mid = s.b3 * 0.5 * (x0 + x1) + s.b4 * t + s.b5 * y;
        acc += r_mid * (x1 - x0);
        len += x1 - x0;
    }
    return acc / len;
}

double refine_b5(const ScalarScheme& s, long long j) {
    const double y = s.qa_rep(j);
    if (y == 0.0) throw std::invalid_argument("refine_b5: pick a cell with nonzero reproduction");
    ScalarScheme probe = s;
    probe.b5 = 0.0;
    return -expected_r_given_qa(probe, j) / y; // E(r|j) is affine in b5 with slope y
}

double balanced_a2_cubic_residual(double a) { return 5.0 * a * a * a + 4.0 * a * a + 4.0 / 3.0; }

double solve_balanced_a2() {
    double lo = -4.0 / 3.0, hi = -1.0;
    // residual is negative at -4/3, positive at -1, increasing between
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (balanced_a2_cubic_residual(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 1e-14) break;
    }
    return 0.5 * (lo + hi);
}

double qb_rate_closed_form(double delta_b, double a2, double h_bits) {
    return -std::log2(delta_b) + (3.0 + 3.0 * a2) * std::log2(1.5) + h_bits;
}

double distortion_product_gap_db(double d1, double d3, double rate, double var_x) {
    const double bound = var_x * var_x * std::exp2(-4.0 * rate) / 4.0;
    return 10.0 * std::log10(d1 * d3 / bound);
}

double mdsq_reference_gap_db() {
    const double uniform_central = 10.0 * std::log10(std::pow(2.0 * M_PI * M_E / 12.0, 2.0));
    return uniform_central - 0.4; // cell-optimized improvement, 2.67 dB at quoted precision
}

SuccessivePoint highres_successive(double r1, double r2, double var_x) {
    const double tpe = 2.0 * M_PI * M_E;
    SuccessivePoint out;
    out.corner.r1 = r1;
    out.corner.r2 = r2;
    out.corner.d1 = tpe / 12.0 * std::exp2(-2.0 * r1) * var_x;
    out.corner.d2 = 0.75 * out.corner.d1;
    out.corner.d3 = tpe / 48.0 * std::exp2(-2.0 * r2) * var_x;
    out.corner.high_resolution_valid = r1 >= 4.0 && r2 >= 4.0;
    const double rbal = 0.5 * (r1 + r2);
    out.corner.product_gap_db = distortion_product_gap_db(out.corner.d1, out.corner.d3, rbal, var_x);

    out.timeshare.r1 = out.timeshare.r2 = rbal;
    out.timeshare.d1 = out.timeshare.d2 = 7.0 / 8.0 * out.corner.d1;
    out.timeshare.d3 = out.corner.d3;
    out.timeshare.high_resolution_valid = out.corner.high_resolution_valid;
    out.timeshare.product_gap_db =
        distortion_product_gap_db(out.timeshare.d1, out.timeshare.d3, rbal, var_x);
    return out;
}

HighresPoint highres_splitting_balanced(double rate, double qa_rate, double var_x) {
    const double tpe = 2.0 * M_PI * M_E;
    const double a2 = solve_balanced_a2();
    const double kappa = std::pow(1.5, 2.0 * (3.0 + 3.0 * a2)); // ~0.8975
    HighresPoint p;
    p.r1 = p.r2 = rate;
    p.d1 = p.d2 = tpe / 12.0 * std::exp2(-2.0 * qa_rate) * var_x;
    p.d3 = kappa * tpe / 48.0 * std::exp2(-2.0 * (2.0 * rate - qa_rate)) * var_x;
    p.high_resolution_valid = rate >= 4.0 && qa_rate >= 2.0 && rate - qa_rate >= 1.0;
    p.product_gap_db = distortion_product_gap_db(p.d1, p.d3, rate, var_x);
    return p;
}

BalancedSplitReport balanced_split_analysis(const BalancedSplitConfig& cfg) {
    const double h = 0.5 * std::log2(2.0 * M_PI * M_E * cfg.var_x);
    const double a2 = solve_balanced_a2();
    const int refine_bits = int(std::lround(cfg.rate - cfg.qa_rate));
    if (refine_bits < 1) throw std::invalid_argument("balanced split: rate must exceed qa_rate by >= 1 bit");

    ScalarScheme s;
    s.a1 = 2.0;
    s.a2 = a2;
    s.delta_a = std::exp2(h - cfg.qa_rate);
    s.delta_b = std::exp2(h - cfg.rate + (3.0 + 3.0 * a2) * std::log2(1.5));
    s.x_hi = cfg.range_sigmas * std::sqrt(cfg.var_x);
    s.x_lo = -s.x_hi;
    s.has_refinement = true;
    s.b3 = 2.0;
    s.b4 = -1.0;
    s.b5 = 2.9555; // nominal tap; see refine_b5
    s.delta_c = s.delta_b / std::exp2(double(refine_bits));

    BalancedSplitReport rep;
    rep.er_given_qa1_nominal = expected_r_given_qa(s, 1);
    if (cfg.refine_b5) s.b5 = refine_b5(s, 1);
    rep.er_given_qa1_used = expected_r_given_qa(s, 1);
    rep.b5_used = s.b5;
    rep.scheme = s;

    CellSet cells = compute_cells(s);
    rep.dist = cell_distortions(s, cells, gaussian_pdf(cfg.var_x), ReproductionMode::midpoint);
    rep.d_side_qb = rep.dist.d_cs;
    rep.d_side_qaqc = rep.dist.d_cxr;
    rep.d_central = rep.dist.d_central;
    rep.gap_db = distortion_product_gap_db(std::max(rep.d_side_qb, rep.d_side_qaqc), rep.d_central,
                                           cfg.rate, cfg.var_x);
    rep.gap_db_predicted = highres_splitting_balanced(cfg.rate, cfg.qa_rate, cfg.var_x).product_gap_db;
    return rep;
}

SchemeSim simulate_scheme(const ScalarScheme& s, const CellSet& cells,
                          const std::vector<double>& x, ReproductionMode mode) {
    if (s.has_refinement)
        throw std::invalid_argument("simulate_scheme: only the successive (two-index) scheme");
    std::map<long long, double> cx_rep, cs_rep;
    std::map<std::pair<long long, long long>, double> central_rep;
    const Pdf pdf = gaussian_pdf(1.0); // centroid mode only; midpoint ignores it
    auto cell_rep = [&](const std::vector<Interval>& parts) {
        if (mode == ReproductionMode::centroid) {
            CellMoments m = moments(parts, pdf, 1e-12);
            if (m.m0 > 0.0) return m.m1 / m.m0;
        }
        return span_midpoint(parts);
    };
    for (const PartitionCell& c : cells.cx) cx_rep[c.i1] = cell_rep(c.parts);
    for (const PartitionCell& c : cells.cs) cs_rep[c.i1] = cell_rep(c.parts);
    for (const CellSet::Atom& a : cells.atoms) central_rep[{a.j, a.i}] = cell_rep({a.iv});

    SchemeSim sim;
    for (double v : x) {
        if (v <= s.x_lo || v > s.x_hi) {
            ++sim.out_of_range;
            continue;
        }
        const long long j = (long long)std::floor(v / s.delta_a - s.qa_offset);
        const double y = s.qa_rep(j);
        const double sv = s.a1 * v + s.a2 * y;
        const long long i = (long long)std::floor(sv / s.delta_b - s.qb_offset);
        ++sim.samples;
        const double rx = cx_rep.count(j) ? cx_rep[j] : y;
        const double rs = cs_rep.count(i) ? cs_rep[i] : rx;
        const auto key = std::make_pair(j, i);
        const double rc = central_rep.count(key) ? central_rep[key] : rx;
        sim.d_cx += (v - rx) * (v - rx);
        sim.d_cs += (v - rs) * (v - rs);
        sim.d_central += (v - rc) * (v - rc);
    }
    if (sim.samples > 0) {
        sim.d_cx /= double(sim.samples);
        sim.d_cs /= double(sim.samples);
        sim.d_central /= double(sim.samples);
    }
    return sim;
}

std::string cells_to_csv(const ScalarScheme& s, const CellSet& cells, const Pdf& pdf,
                         ReproductionMode mode) {
    std::ostringstream os;
    os.precision(12);
    os << "owner,index1,index2,border,n_parts,intervals,reproduction,mass,distortion\n";
    auto emit = [&](const PartitionCell& c, const char* owner) {
        CellMoments m = moments(c.parts, pdf, 1e-12);
        double rep = span_midpoint(c.parts);
        if (mode == ReproductionMode::centroid && m.m0 > 0.0) rep = m.m1 / m.m0;
        os << owner << ',' << c.i1 << ',' << c.i2 << ',' << (c.border ? 1 : 0) << ','
           << c.parts.size() << ',';
        for (std::size_t k = 0; k < c.parts.size(); ++k) {
            if (k) os << ' ';
            os << '[' << c.parts[k].lo << ';' << c.parts[k].hi << ']';
        }
        os << ',' << rep << ',' << m.m0 << ',' << sq_error(m, rep) << '\n';
    };
    for (const auto& c : cells.cx) emit(c, "C_x");
    for (const auto& c : cells.cs) emit(c, "C_s");
    for (const auto& c : cells.cxr) emit(c, "C_xr");
    return os.str();
}

} // namespace mdq
