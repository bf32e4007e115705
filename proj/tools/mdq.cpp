#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mdq/geometry.hpp"
#include "mdq/harness.hpp"

namespace {

struct DistortionOpts {
    double var = 1.0, d1 = 0.1, d2 = 0.1, d3 = 0.05;
    mdq::DistortionTriple triple() const { return {var, d1, d2, d3}; }
};

void add_distortions(CLI::App* cmd, DistortionOpts& d) {
    cmd->add_option("--var", d.var, "source variance");
    cmd->add_option("--d1", d.d1, "side distortion D1")->required();
    cmd->add_option("--d2", d.d2, "side distortion D2")->required();
    cmd->add_option("--d3", d.d3, "central distortion D3")->required();
}

struct TargetOpts {
    std::optional<double> r1;
    bool balanced = false;
    int vertex = 0;
    mdq::RateTarget resolve() const {
        if (r1) return mdq::RateTarget::at_r1(*r1);
        if (vertex == 1 || vertex == 2) return mdq::RateTarget::vertex(vertex);
        return mdq::RateTarget::balanced();
    }
};

void add_target(CLI::App* cmd, TargetOpts& t) {
    auto* a = cmd->add_option("--r1", t.r1, "description-1 rate target (bits)");
    auto* b = cmd->add_flag("--balanced", t.balanced, "equal description rates");
    auto* c = cmd->add_option("--vertex", t.vertex, "dominant-face vertex (1 or 2)")
                  ->check(CLI::IsMember({1, 2}));
    a->excludes(b);
    a->excludes(c);
    b->excludes(c);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << content;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiple-description quantization via Gram-Schmidt orthogonalization"};
    app.require_subcommand(1);
    bool check = false;
    app.add_flag("--check", check, "exit nonzero when an acceptance rule fails");

    // region
    auto* region = app.add_subcommand("region", "Gaussian MD region closed forms");
    DistortionOpts rd;
    add_distortions(region, rd);
    bool region_json = false;
    region->add_flag("--json", region_json, "emit JSON");

    // params
    auto* params = app.add_subcommand("params", "codec coefficients for one operating point");
    DistortionOpts pd;
    TargetOpts pt;
    add_distortions(params, pd);
    add_target(params, pt);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a codec on a sample stream");
    DistortionOpts sd;
    TargetOpts st;
    add_distortions(sim, sd);
    add_target(sim, st);
    std::string source = "gaussian", kind = "splitting", csv_path, dump_path;
    std::size_t n_samples = 1000000;
    std::uint64_t seed = 1;
    sim->add_option("--source", source, "gaussian|uniform|laplacian|file:PATH");
    sim->add_option("--kind", kind, "successive|splitting|separate|reuse");
    sim->add_option("--n-samples", n_samples, "sample count (>= 1e5)");
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--csv", csv_path, "write per-batch distortions CSV");
    sim->add_option("--dump", dump_path, "write the binary index-stream dump");

    // scalar-analysis
    auto* geo = app.add_subcommand("scalar-analysis", "undithered scalar partition analysis");
    std::string mode = "balanced", cells_csv;
    double rate = 8.0, qa_rate = 2.0;
    bool nominal_b5 = false;
    geo->add_option("--mode", mode, "fig8a|fig8b|balanced")
        ->check(CLI::IsMember({"fig8a", "fig8b", "balanced"}));
    geo->add_option("--rate", rate, "description rate (bits)");
    geo->add_option("--qa-rate", qa_rate, "q_a share of description-1 rate (balanced mode)");
    geo->add_flag("--nominal-b5", nominal_b5, "keep the 2.9555 tap instead of the refined one");
    geo->add_option("--cells-csv", cells_csv, "dump the partition cells");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "dominant-face sweep");
    DistortionOpts wd;
    add_distortions(sweep, wd);
    int steps = 9;
    std::size_t sweep_n = 0;
    std::uint64_t sweep_seed = 1;
    std::string sweep_csv;
    sweep->add_option("--steps", steps, "number of sweep points");
    sweep->add_option("--n-samples", sweep_n, "samples per point (0: theory only)");
    sweep->add_option("--seed", sweep_seed, "RNG seed");
    sweep->add_option("--csv", sweep_csv, "output CSV path");

    for (auto* sc : {region, params, sim, geo, sweep}) sc->fallthrough();
    CLI11_PARSE(app, argc, argv);

    try {
        if (region->parsed()) {
            mdq::GaussMDParams p = mdq::test_channel_params(mdq::clamp_degenerate(rd.triple()).d);
            if (region_json) {
                std::cout << mdq::params_to_json(p) << "\n";
            } else {
                std::printf("psi            %.9f\n", p.psi);
                std::printf("sum rate       %.9f bits\n", p.sum_rate);
                std::printf("V1             (%.9f, %.9f)\n", p.vertex1.r1, p.vertex1.r2);
                std::printf("V2             (%.9f, %.9f)\n", p.vertex2.r1, p.vertex2.r2);
                std::printf("sigma2_T0/1/2  %.9f %.9f %.9f\n", p.var_t0, p.var_t1, p.var_t2);
                std::printf("alpha          %.9f %.9f\n", p.alpha1, p.alpha2);
                std::printf("beta           %.9f %.9f\n", p.beta1, p.beta2);
                std::printf("a1, a2         %.9f %.9f\n", p.a1, p.a2);
                std::printf("EB2^2, EB3^2   %.9f %.9f\n", p.eb2, p.eb3);
                if (p.harmonic_bound) std::printf("note: D3 at the harmonic (no-excess-marginal) bound\n");
                if (p.no_excess_sum) std::printf("note: D3 at the no-excess-sum-rate bound\n");
            }
        } else if (params->parsed()) {
            mdq::GaussMDParams p =
                mdq::resolve_params(mdq::clamp_degenerate(pd.triple()).d, pt.resolve());
            std::cout << mdq::params_to_json(p) << "\n";
        } else if (sim->parsed()) {
            mdq::SourceSpec spec = mdq::parse_source(source, seed);
            mdq::SimReport rep =
                mdq::run_experiment(spec, sd.triple(), st.resolve(),
                                    mdq::topology_from_string(kind), n_samples, seed);
            std::cout << rep.to_json() << "\n";
            if (!csv_path.empty()) write_file(csv_path, rep.batches_csv());
            if (!dump_path.empty()) {
                // deterministic re-encode of the same run
                mdq::CodecTopology topo = mdq::build(rep.kind, rep.params, seed);
                mdq::SourceSpec s2 = spec;
                s2.seed = seed;
                auto x = mdq::SourceSampler(s2).samples(n_samples);
                auto streams = mdq::encode(topo, x);
                mdq::StreamDump dump;
                dump.kind = std::uint8_t(rep.kind);
                dump.dim = std::uint16_t(topo.dim);
                dump.seed = seed;
                dump.params_fingerprint = topo.fingerprint();
                dump.samples = n_samples;
                dump.stage_indices = std::move(streams.stage_indices);
                std::ofstream f(dump_path, std::ios::binary);
                if (!f) throw std::runtime_error("cannot open " + dump_path);
                mdq::write_stream_dump(f, dump);
            }
            if (check && !rep.pass()) return 2;
        } else if (geo->parsed()) {
            nlohmann::ordered_json j;
            if (mode == "balanced") {
                mdq::BalancedSplitConfig cfg;
                cfg.rate = rate;
                cfg.qa_rate = qa_rate;
                cfg.refine_b5 = !nominal_b5;
                mdq::BalancedSplitReport rep = mdq::balanced_split_analysis(cfg);
                j["mode"] = "balanced";
                j["rate"] = rate;
                j["qa_rate"] = qa_rate;
                j["a2_root"] = mdq::solve_balanced_a2();
                j["b5_used"] = rep.b5_used;
                j["E_r_given_qa1_nominal"] = rep.er_given_qa1_nominal;
                j["E_r_given_qa1_used"] = rep.er_given_qa1_used;
                j["delta_a"] = rep.scheme.delta_a;
                j["delta_b"] = rep.scheme.delta_b;
                j["delta_c"] = rep.scheme.delta_c;
                j["D_side_qb"] = rep.d_side_qb;
                j["D_side_qaqc"] = rep.d_side_qaqc;
                j["D_central"] = rep.d_central;
                j["H_qa"] = rep.dist.h_qa;
                j["H_qb"] = rep.dist.h_qb;
                j["H_qc_given_qa"] = rep.dist.h_qc_given_qa;
                j["three_piece_mass_fraction"] = rep.dist.three_piece_mass_fraction;
                j["product_gap_db"] = rep.gap_db;
                j["product_gap_db_predicted"] = rep.gap_db_predicted;
                j["mdsq_reference_gap_db"] = mdq::mdsq_reference_gap_db();
                if (!cells_csv.empty()) {
                    mdq::CellSet cells = mdq::compute_cells(rep.scheme);
                    write_file(cells_csv, mdq::cells_to_csv(rep.scheme, cells,
                                                            mdq::gaussian_pdf(1.0)));
                }
                if (check && std::fabs(rep.gap_db - 2.596) > 0.05) return 2;
            } else {
                const double h = 0.5 * std::log2(2.0 * M_PI * M_E);
                mdq::ScalarScheme s;
                s.a1 = 2.0;
                s.a2 = -1.0;
                s.delta_a = std::exp2(h - rate);
                s.delta_b = mode == "fig8a" ? s.delta_a : s.delta_a / 64.0;
                s.x_hi = 8.0;
                s.x_lo = -8.0;
                mdq::CellSet cells = mdq::compute_cells(s);
                mdq::CellDistortions d =
                    mdq::cell_distortions(s, cells, mdq::gaussian_pdf(1.0));
                j["mode"] = mode;
                j["delta_a"] = s.delta_a;
                j["delta_b"] = s.delta_b;
                j["D_cx"] = d.d_cx;
                j["D_cs"] = d.d_cs;
                j["D_cs_with_border"] = d.d_cs_all;
                j["D_central"] = d.d_central;
                j["D_cs_over_D_cx"] = d.d_cs / d.d_cx;
                j["D_central_over_D_cx"] = d.d_central / d.d_cx;
                j["H_qa"] = d.h_qa;
                j["H_qb"] = d.h_qb;
                if (!cells_csv.empty())
                    write_file(cells_csv, mdq::cells_to_csv(s, cells, mdq::gaussian_pdf(1.0)));
            }
            std::cout << j.dump(2) << "\n";
        } else if (sweep->parsed()) {
            auto rows = mdq::sweep_dominant_face(wd.triple(), steps, sweep_n, sweep_seed);
            std::string csv = mdq::sweep_to_csv(rows);
            if (sweep_csv.empty())
                std::cout << csv;
            else
                write_file(sweep_csv, csv);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
