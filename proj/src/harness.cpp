#include "mdq/harness.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mdq {

namespace {

constexpr std::size_t kMinSamplesForRates = 100000;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<double> squared_errors(std::span<const double> x, const std::vector<double>& rec) {
    std::vector<double> e(x.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = (rec[i] - x[i]) * (rec[i] - x[i]);
    return e;
}

} // namespace

std::string RateTarget::describe() const {
    switch (kind) {
    case Kind::vertex1: return "vertex1";
    case Kind::vertex2: return "vertex2";
    case Kind::balanced: return "balanced";
    case Kind::r1: return "r1=" + std::to_string(r1);
    }
    return "?";
}

double scalar_stage_redundancy() { return 0.5 * std::log2(2.0 * M_PI * M_E / 12.0); }

GaussMDParams resolve_params(const DistortionTriple& d, const RateTarget& target) {
    GaussMDParams p = test_channel_params(d);
    switch (target.kind) {
    case RateTarget::Kind::vertex1: apply_split(p, SigmaT3{true, 0.0, false}); break;
    case RateTarget::Kind::vertex2: apply_split(p, SigmaT3{false, 0.0, false}); break;
    case RateTarget::Kind::balanced: apply_split(p, split_sigma_t3_balanced(p)); break;
    case RateTarget::Kind::r1: apply_split(p, split_sigma_t3(p, target.r1)); break;
    }
    return p;
}

SimReport run_experiment(const SourceSpec& source, DistortionTriple d, const RateTarget& target,
                         TopologyKind kind, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < kMinSamplesForRates)
        throw std::invalid_argument("run_experiment: rate estimation needs at least " +
                                    std::to_string(kMinSamplesForRates) + " samples");

    SimReport rep;
    rep.source = to_string(source.family) + (source.path.empty() ? "" : ":" + source.path);
    rep.kind = kind;
    rep.target = target;
    rep.samples = n_samples;
    rep.seed = seed;

    ClampResult cl = clamp_degenerate(d);
    rep.clamp_fired = cl.fired;
    rep.d = cl.d;

    // successive quantization reaches the vertices; V2 runs the mirrored
    // encoder order, with the descriptions swapped back in the report
    bool mirrored = false;
    DistortionTriple dd = rep.d;
    RateTarget tt = target;
    if (kind == TopologyKind::successive || kind == TopologyKind::separate) {
        if (target.kind == RateTarget::Kind::balanced || target.kind == RateTarget::Kind::r1) {
            if (kind == TopologyKind::successive)
                throw std::invalid_argument(
                    "run_experiment: successive quantization achieves the vertices; interior "
                    "rate splits need the splitting topology");
            tt = RateTarget::vertex(1); // separate: vertices coincide at the harmonic bound
        }
        if (tt.kind == RateTarget::Kind::vertex2 && kind == TopologyKind::successive) {
            std::swap(dd.d1, dd.d2);
            tt = RateTarget::vertex(1);
            mirrored = true;
        }
    }
    rep.mirrored = mirrored;

    GaussMDParams p = resolve_params(dd, tt);
    rep.params = p;

    CodecTopology topo = build(kind, p, seed);
    SourceSpec src = source;
    src.seed = seed;
    SourceSampler sampler(src, 0); // stream 0; stage dithers use 1..3
    rep.entropy_power = sampler.entropy_power();
    std::vector<double> x = sampler.samples(n_samples);

    DescriptionStreams streams = encode(topo, x);
    std::vector<double> x1 = decode_side1(topo, streams);
    std::vector<double> x2 = decode_side2(topo, streams);
    std::vector<double> x3 = decode_central(topo, streams);
    if (mirrored) std::swap(x1, x2);

    const std::vector<double> e1 = squared_errors(x, x1);
    const std::vector<double> e2 = squared_errors(x, x2);
    const std::vector<double> e3 = squared_errors(x, x3);
    rep.d1 = batch_means(e1);
    rep.d2 = batch_means(e2);
    rep.d3 = batch_means(e3);
    rep.batch_d1.resize(20);
    rep.batch_d2.resize(20);
    rep.batch_d3.resize(20);
    const std::size_t per = n_samples / 20;
    for (int b = 0; b < 20; ++b) {
        double a1 = 0, a2 = 0, a3 = 0;
        for (std::size_t i = 0; i < per; ++i) {
            a1 += e1[std::size_t(b) * per + i];
            a2 += e2[std::size_t(b) * per + i];
            a3 += e3[std::size_t(b) * per + i];
        }
        rep.batch_d1[std::size_t(b)] = a1 / double(per);
        rep.batch_d2[std::size_t(b)] = a2 / double(per);
        rep.batch_d3[std::size_t(b)] = a3 / double(per);
    }

    RateReport rates = measure_rate(topo, streams);
    rep.rate1 = mirrored ? rates.desc2_bits : rates.desc1_bits;
    rep.rate2 = mirrored ? rates.desc1_bits : rates.desc2_bits;
    rep.rate_tolerance = rates.tolerance;
    if (rates.desc2_joint) rep.rate2_joint = rates.desc2_joint->bits;

    // Gaussian-reference rates and budgets (valid for any unit-variance
    // source; Gaussian maximizes the stage entropies)
    const double red = scalar_stage_redundancy();
    double tr1, tr2;
    int stages1 = 1, stages2 = 1;
    if (kind == TopologyKind::separate) {
        tr1 = 0.5 * std::log2(p.var_x / p.d1);
        tr2 = 0.5 * std::log2(p.var_x / p.d2);
    } else if (kind == TopologyKind::successive) {
        tr1 = mirrored ? p.vertex1.r2 : p.vertex1.r1;
        tr2 = mirrored ? p.vertex1.r1 : p.vertex1.r2;
    } else if (p.t3.infinite) {
        tr1 = p.vertex1.r1;
        tr2 = p.vertex1.r2;
    } else {
        tr1 = p.r1_split;
        tr2 = p.r2_split;
        stages2 = 2;
    }
    if (mirrored) std::swap(stages1, stages2);
    rep.theory_r1 = tr1;
    rep.theory_r2 = tr2;
    rep.budget_r1 = tr1 + double(stages1) * red + (stages1 == 2 ? 1.5 : 1.0) * rep.rate_tolerance;
    rep.budget_r2 = tr2 + double(stages2) * red + (stages2 == 2 ? 1.5 : 1.0) * rep.rate_tolerance;
    rep.outer_sum_rate = outer_bound_sum_rate(rep.d, rep.entropy_power);

    rep.pass_rates = rep.rate1 <= rep.budget_r1 && rep.rate2 <= rep.budget_r2;
    rep.pass_distortions = std::fabs(rep.d1.mean - rep.d.d1) <= 3.0 * rep.d1.std_error &&
                           std::fabs(rep.d2.mean - rep.d.d2) <= 3.0 * rep.d2.std_error &&
                           std::fabs(rep.d3.mean - rep.d.d3) <= 3.0 * rep.d3.std_error;

    Eigen::MatrixXd kt = theory_second_moments(topo);
    Eigen::MatrixXd ke = empirical_second_moments(topo, x, streams);
    rep.cov_max_delta = (kt - ke).cwiseAbs().maxCoeff();
    rep.pass_covariance = rep.cov_max_delta <= 0.01 * p.var_x;

    std::ostringstream cfg;
    cfg << rep.source << '|' << to_string(kind) << '|' << target.describe() << '|' << n_samples
        << '|' << seed << '|' << rep.d.var_x << ',' << rep.d.d1 << ',' << rep.d.d2 << ',' << rep.d.d3;
    rep.fingerprint = fnv1a(cfg.str());
    return rep;
}

std::string SimReport::to_json(int indent) const {
    nlohmann::ordered_json j;
    j["config"]["source"] = source;
    j["config"]["kind"] = to_string(kind);
    j["config"]["target"] = target.describe();
    j["config"]["samples"] = samples;
    j["config"]["seed"] = seed;
    j["config"]["var_x"] = d.var_x;
    j["config"]["D"] = {d.d1, d.d2, d.d3};
    j["config"]["clamp_fired"] =
        clamp_fired == ClampBound::none ? "none" : (clamp_fired == ClampBound::low ? "low" : "high");
    j["config"]["mirrored"] = mirrored;
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)fingerprint);
    j["config"]["fingerprint"] = buf;

    j["theory"] = nlohmann::ordered_json::parse(params_to_json(params));
    j["theory"]["entropy_power"] = entropy_power;
    j["theory"]["R1_reference"] = theory_r1;
    j["theory"]["R2_reference"] = theory_r2;
    j["theory"]["stage_redundancy"] = scalar_stage_redundancy();
    j["theory"]["outer_sum_rate"] = outer_sum_rate;

    j["empirical"]["rate1_bits"] = rate1;
    j["empirical"]["rate2_bits"] = rate2;
    j["empirical"]["rate_tolerance"] = rate_tolerance;
    if (rate2_joint) j["empirical"]["rate2_joint_bits"] = *rate2_joint;
    j["empirical"]["D1"] = {{"mean", d1.mean}, {"std_error", d1.std_error}};
    j["empirical"]["D2"] = {{"mean", d2.mean}, {"std_error", d2.std_error}};
    j["empirical"]["D3"] = {{"mean", d3.mean}, {"std_error", d3.std_error}};
    j["empirical"]["covariance_max_delta"] = cov_max_delta;

    j["checks"]["rate_budget_r1"] = budget_r1;
    j["checks"]["rate_budget_r2"] = budget_r2;
    j["checks"]["pass_rates"] = pass_rates;
    j["checks"]["pass_distortions"] = pass_distortions;
    j["checks"]["pass_covariance"] = pass_covariance;
    j["checks"]["pass"] = pass();
    return j.dump(indent);
}

std::string SimReport::batches_csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "batch,D1,D2,D3\n";
    for (std::size_t b = 0; b < batch_d1.size(); ++b)
        os << b << ',' << batch_d1[b] << ',' << batch_d2[b] << ',' << batch_d3[b] << '\n';
    return os.str();
}

std::vector<SweepRow> sweep_dominant_face(const DistortionTriple& d, int steps,
                                          std::size_t n_samples, std::uint64_t seed) {
    if (steps < 2) throw std::invalid_argument("sweep: need at least 2 steps");
    GaussMDParams base = test_channel_params(clamp_degenerate(d).d);
    std::vector<SweepRow> rows;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k < steps; ++k) {
        const double frac = double(k) / double(steps - 1);
        const double r1 = base.vertex1.r1 + frac * (base.vertex2.r1 - base.vertex1.r1);
        GaussMDParams p = base;
        apply_split(p, split_sigma_t3(p, r1));
        SweepRow row;
        row.t3_infinite = p.t3.infinite;
        row.var_t3 = p.t3.infinite ? nan : p.t3.value;
        row.r1_theory = p.r1_split;
        row.r2_theory = p.r2_split;
        row.r1_measured = nan;
        row.r2_measured = nan;
        if (n_samples > 0) {
            SourceSpec src;
            src.family = SourceFamily::gaussian;
            src.seed = seed + std::uint64_t(k);
            RateTarget t = p.t3.infinite ? RateTarget::vertex(1) : RateTarget::at_r1(r1);
            SimReport rep = run_experiment(src, d, t, TopologyKind::splitting, n_samples,
                                           seed + std::uint64_t(k));
            row.r1_measured = rep.rate1;
            row.r2_measured = rep.rate2;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os.precision(12);
    os << "sigma2_T3,R1_theory,R2_theory,sum_theory,R1_measured,R2_measured\n";
    for (const auto& r : rows) {
        if (r.t3_infinite)
            os << "inf";
        else
            os << r.var_t3;
        os << ',' << r.r1_theory << ',' << r.r2_theory << ',' << (r.r1_theory + r.r2_theory) << ','
           << r.r1_measured << ',' << r.r2_measured << '\n';
    }
    return os.str();
}

std::vector<HighresRow> highres_acceptance(const DistortionTriple& base,
                                           const std::vector<double>& scales,
                                           std::size_t n_samples, std::uint64_t seed) {
    std::vector<HighresRow> rows;
    for (double s : scales) {
        HighresRow row;
        row.scale = s;
        row.d = DistortionTriple{base.var_x, base.d1 * s, base.d2 * s, base.d3 * s};
        SourceSpec src;
        src.family = SourceFamily::gaussian;
        src.seed = seed;
        SimReport rep = run_experiment(src, row.d, RateTarget::balanced(), TopologyKind::splitting,
                                       n_samples, seed);
        row.measured_sum = rep.rate1 + rep.rate2;
        row.theory_sum = rep.params.sum_rate;
        row.outer_sum = outer_bound_sum_rate(row.d, 1.0); // Gaussian: P_X = var, phi = psi
        row.redundancy = row.measured_sum - row.outer_sum;
        row.budget = 3.0 * scalar_stage_redundancy();
        rows.push_back(row);
    }
    return rows;
}

std::string highres_to_csv(const std::vector<HighresRow>& rows) {
    std::ostringstream os;
    os.precision(12);
    os << "scale,D1,D2,D3,measured_sum,theory_sum,outer_sum,redundancy,budget\n";
    for (const auto& r : rows)
        os << r.scale << ',' << r.d.d1 << ',' << r.d.d2 << ',' << r.d.d3 << ',' << r.measured_sum
           << ',' << r.theory_sum << ',' << r.outer_sum << ',' << r.redundancy << ',' << r.budget
           << '\n';
    return os.str();
}

} // namespace mdq
