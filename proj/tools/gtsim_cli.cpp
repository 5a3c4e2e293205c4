// Command-line front end: spectral reports, verification reports, single runs
// and the noise-floor sweeps. Exit codes: 0 ok, 1 invalid input,
// 2 verification failure, 3 divergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gtsim/gtsim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Topology spec strings: ring:<n>[:<w>], torus:<r>x<c>, complete:<n>,
// mh:<n>:<seed>, interp:<n>:<alpha>, file:<path>.
gtsim::MixingMatrix parse_topology(const std::string& spec) {
    auto fields = [&spec]() {
        std::vector<std::string> out;
        std::istringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ':')) out.push_back(tok);
        return out;
    }();
    if (fields.empty()) throw gtsim::invalid_input("empty topology spec");
    try {
        const std::string& kind = fields[0];
        if (kind == "ring" && fields.size() == 2) return gtsim::build_ring_uniform(std::stoi(fields[1]));
        if (kind == "ring" && fields.size() == 3)
            return gtsim::build_ring_self_weight(std::stoi(fields[1]), std::stod(fields[2]));
        if (kind == "complete" && fields.size() == 2)
            return gtsim::build_fully_connected(std::stoi(fields[1]));
        if (kind == "torus" && fields.size() == 2) {
            const auto x = fields[1].find('x');
            if (x == std::string::npos) throw gtsim::invalid_input("torus spec: expected <r>x<c>");
            return gtsim::build_torus(std::stoi(fields[1].substr(0, x)),
                                      std::stoi(fields[1].substr(x + 1)));
        }
        if (kind == "mh" && fields.size() == 3)
            return gtsim::build_metropolis_hastings(
                gtsim::random_connected_graph(std::stoi(fields[1]), 0.08, std::stoull(fields[2])));
        if (kind == "interp" && fields.size() == 3) {
            const int n = std::stoi(fields[1]);
            return gtsim::interpolate(gtsim::build_ring_uniform(n), gtsim::build_fully_connected(n),
                                      std::stod(fields[2]));
        }
        if (kind == "file" && fields.size() >= 2)
            return gtsim::build_metropolis_hastings(
                gtsim::load_adjacency_list(spec.substr(spec.find(':') + 1)));
    } catch (const std::invalid_argument&) {
        throw gtsim::invalid_input("malformed number in topology spec: " + spec);
    } catch (const std::out_of_range&) {
        throw gtsim::invalid_input("out-of-range number in topology spec: " + spec);
    }
    throw gtsim::invalid_input("unrecognized topology spec: " + spec);
}

json spectral_json(const gtsim::SpectralParams& sp) {
    json j;
    j["lambda2"] = sp.lambda2;
    j["lambdaN"] = sp.lambdaN;
    j["delta"] = sp.delta;
    j["p"] = sp.p;
    j["c"] = sp.c;
    j["tau"] = sp.tau;
    j["eigenvalues"] = sp.eigenvalues;
    return j;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw gtsim::invalid_input("cannot write " + path.string());
    f << content;
}

// --- verify-lemmas -------------------------------------------------------------

json verify_topology(const gtsim::MixingMatrix& w) {
    const gtsim::SpectralParams sp = gtsim::spectral_params(w);
    json j;
    j["n"] = w.n;
    j["p"] = sp.p;
    j["c"] = sp.c;
    j["tau"] = sp.tau;

    // lifted-power contraction at tau
    const gtsim::KeyLemmaReport key = gtsim::verify_key_lemma(w);
    j["lifted_power_contraction"] = {
        {"tau", key.tau}, {"norm_sq", key.norm_sq}, {"bound", 0.5}, {"pass", key.pass}};

    // operator-norm bounds over i = 0..3 tau (spectrum route; the matrix route
    // is checked against it on a subsample)
    const long imax = 3 * sp.tau;
    const long stride = std::max(1L, imax / 2000);
    double worst_diff = 0.0, worst_scaled = 0.0, worst_lifted = 0.0;
    bool lifted_bound_pass = true;
    for (long i = 0; i <= imax; i += stride) {
        worst_diff = std::max(worst_diff, gtsim::diff_power_norm_from_spectrum(sp, i));
        worst_scaled = std::max(worst_scaled, gtsim::scaled_power_norm_from_spectrum(sp, i));
        const double jn = gtsim::j_power_norm_from_spectrum(sp, i);
        const double ii = static_cast<double>(i);
        const double bound = std::pow(1.0 - sp.p, ii) * (1.0 + ii * ii);
        worst_lifted = std::max(worst_lifted, jn - bound);
        if (jn > bound + 1e-9) lifted_bound_pass = false;
    }
    const double diff_bound = 16.0 / (sp.c * sp.c);
    const double scaled_bound = 4.0 / (sp.p * sp.p);
    j["difference_power_bound"] = {{"max_norm_sq", worst_diff},
                                   {"bound", diff_bound},
                                   {"pass", worst_diff <= diff_bound + 1e-9}};
    j["scaled_power_bound"] = {{"max_norm_sq", worst_scaled},
                               {"bound", scaled_bound},
                               {"pass", worst_scaled <= scaled_bound + 1e-9}};
    j["lifted_power_bound"] = {{"max_excess", worst_lifted}, {"pass", lifted_bound_pass}};
    return j;
}

int cmd_verify_lemmas(const std::vector<std::string>& specs, const fs::path& out_dir) {
    json report;
    bool all_pass = true;
    for (const auto& spec : specs) {
        json j = verify_topology(parse_topology(spec));
        for (const char* k :
             {"lifted_power_contraction", "difference_power_bound", "scaled_power_bound",
              "lifted_power_bound"})
            all_pass = all_pass && j[k]["pass"].get<bool>();
        report["topologies"][spec] = j;
    }
    const gtsim::ConsensusBoundReport cb = gtsim::verify_consensus_bound(0.01);
    report["consensus_block_bound"] = {{"pass", cb.pass},
                                       {"worst_margin", cb.worst_margin},
                                       {"closed_form_matches", cb.closed_form_matches},
                                       {"max_closed_form_error", cb.max_closed_form_error},
                                       {"monotone_in_gamma", cb.monotone_in_gamma}};
    all_pass = all_pass && cb.pass && cb.closed_form_matches && cb.monotone_in_gamma;
    report["all_pass"] = all_pass;
    const std::string text = report.dump(2) + "\n";
    std::cout << text;
    if (!out_dir.empty()) write_file(out_dir / "verify_lemmas.json", text);
    return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradient-tracking gossip simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config");

    std::string out_dir = ".";
    std::uint64_t seed = 1;
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "base RNG seed")->capture_default_str();

    // spectrum
    auto* sc_spectrum = app.add_subcommand("spectrum", "eigenvalue summary of a topology");
    int sp_ring = 0, sp_complete = 0;
    std::vector<int> sp_torus;
    std::string sp_file;
    double sp_self_weight = 1.0 / 3.0, sp_alpha = 1.0;
    sc_spectrum->add_option("--ring", sp_ring, "ring on n nodes");
    sc_spectrum->add_option("--self-weight", sp_self_weight, "ring self-weight");
    sc_spectrum->add_option("--alpha", sp_alpha, "blend ring toward complete");
    sc_spectrum->add_option("--complete", sp_complete, "fully connected on n nodes");
    sc_spectrum->add_option("--torus", sp_torus, "torus rows cols")->expected(2);
    sc_spectrum->add_option("--file", sp_file, "adjacency-list file (Metropolis-Hastings weights)");

    // verify-lemmas
    auto* sc_verify = app.add_subcommand("verify-lemmas", "contraction/operator-norm verification");
    std::vector<std::string> verify_specs;
    sc_verify->add_option("topologies", verify_specs, "topology specs, e.g. ring:50 torus:10x10")
        ->required();

    // run
    auto* sc_run = app.add_subcommand("run", "single optimization run, trace to CSV");
    std::string run_topology = "ring:20", run_oracle = "gaussian", run_algorithm = "gt",
                run_init = "zero", run_targets;
    double run_gamma = 0.02, run_sigma2 = 1.0;
    long run_steps = 1000, run_record = 10;
    int run_d = 10;
    sc_run->add_option("--topology", run_topology)->capture_default_str();
    sc_run->add_option("--oracle", run_oracle, "gaussian | structured | consensus")
        ->capture_default_str();
    sc_run->add_option("--algorithm", run_algorithm, "gt | dsgd")->capture_default_str();
    sc_run->add_option("--gamma", run_gamma)->capture_default_str();
    sc_run->add_option("--steps", run_steps)->capture_default_str();
    sc_run->add_option("--record-every", run_record)->capture_default_str();
    sc_run->add_option("--sigma2", run_sigma2)->capture_default_str();
    sc_run->add_option("--d", run_d)->capture_default_str();
    sc_run->add_option("--init", run_init, "zero | gaussian")->capture_default_str();
    sc_run->add_option("--targets", run_targets, "consensus targets CSV (one row per worker)");

    // sweeps
    auto* sc_sweep_p = app.add_subcommand("sweep-p", "noise floor vs mixing parameter p");
    auto* sc_sweep_c = app.add_subcommand("sweep-c", "noise floor vs parameter c");
    gtsim::SweepSpec swp = gtsim::default_sweep_p_spec();
    gtsim::SweepSpec swc = gtsim::default_sweep_c_spec();
    std::vector<double> swp_alphas, swc_weights;
    std::string swp_noise = "gaussian", swc_noise = "gaussian";
    for (auto [sc, spec, noise] :
         {std::tuple{sc_sweep_p, &swp, &swp_noise}, std::tuple{sc_sweep_c, &swc, &swc_noise}}) {
        sc->add_option("--n", spec->n)->capture_default_str();
        sc->add_option("--d", spec->d)->capture_default_str();
        sc->add_option("--sigma2", spec->sigma2)->capture_default_str();
        sc->add_option("--gamma", spec->gamma)->capture_default_str();
        sc->add_option("--steps", spec->T)->capture_default_str();
        sc->add_option("--record-every", spec->record_every)->capture_default_str();
        sc->add_option("--seeds", spec->seeds, "seed list")->capture_default_str();
        sc->add_option("--noise", *noise, "gaussian | structured")->capture_default_str();
    }
    sc_sweep_p->add_option("--alphas", swp_alphas, "ring-to-complete blend factors");
    sc_sweep_c->add_option("--weights", swc_weights, "ring self-weights");

    // consensus-demo
    auto* sc_demo = app.add_subcommand("consensus-demo", "GT vs D-SGD on heterogeneous targets");
    int demo_n = 20;
    double demo_gamma = 0.1;
    long demo_steps = 5000;
    std::string demo_topology;
    sc_demo->add_option("--n", demo_n)->capture_default_str();
    sc_demo->add_option("--gamma", demo_gamma)->capture_default_str();
    sc_demo->add_option("--steps", demo_steps)->capture_default_str();
    sc_demo->add_option("--topology", demo_topology, "defaults to ring:<n>");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        fs::path out(out_dir);
        if (!out.empty()) fs::create_directories(out);

        if (*sc_spectrum) {
            gtsim::MixingMatrix w;
            if (sp_ring > 0) {
                w = gtsim::build_ring_self_weight(sp_ring, sp_self_weight);
                if (sp_alpha < 1.0)
                    w = gtsim::interpolate(w, gtsim::build_fully_connected(sp_ring), sp_alpha);
            } else if (sp_complete > 0) {
                w = gtsim::build_fully_connected(sp_complete);
            } else if (sp_torus.size() == 2) {
                w = gtsim::build_torus(sp_torus[0], sp_torus[1]);
            } else if (!sp_file.empty()) {
                w = gtsim::build_metropolis_hastings(gtsim::load_adjacency_list(sp_file));
            } else {
                throw gtsim::invalid_input("spectrum: pick one of --ring/--complete/--torus/--file");
            }
            const gtsim::SpectralParams sp = gtsim::spectral_params(w);
            std::cout << "n=" << w.n << " lambda2=" << gtsim::format_g17(sp.lambda2)
                      << " lambdaN=" << gtsim::format_g17(sp.lambdaN)
                      << " delta=" << gtsim::format_g17(sp.delta)
                      << " p=" << gtsim::format_g17(sp.p) << " c=" << gtsim::format_g17(sp.c)
                      << " tau=" << sp.tau << "\n";
            json j = spectral_json(sp);
            j["n"] = w.n;
            std::cout << j.dump(2) << "\n";
            write_file(out / "spectrum.json", j.dump(2) + "\n");
            return 0;
        }

        if (*sc_verify) return cmd_verify_lemmas(verify_specs, out);

        if (*sc_run) {
            gtsim::MixingMatrix w = parse_topology(run_topology);
            gtsim::GradientOracle oracle;
            if (run_oracle == "gaussian") {
                oracle = gtsim::make_quadratic_gaussian(w.n, run_d, run_sigma2, seed);
            } else if (run_oracle == "structured") {
                oracle = gtsim::make_quadratic_structured(w, run_d, run_sigma2, seed);
            } else if (run_oracle == "consensus") {
                Eigen::MatrixXd mus;
                if (!run_targets.empty()) {
                    mus = gtsim::load_targets_csv(run_targets);
                    if (mus.cols() != w.n)
                        throw gtsim::invalid_input("targets: row count must equal node count");
                } else {
                    mus = Eigen::MatrixXd::Zero(w.n, w.n);
                    for (int i = 0; i < w.n; ++i) mus(i, i) = static_cast<double>(i + 1);
                }
                oracle = gtsim::make_consensus(mus, seed);
            } else {
                throw gtsim::invalid_input("run: unknown oracle " + run_oracle);
            }
            gtsim::RunConfig cfg;
            cfg.algorithm = (run_algorithm == "dsgd") ? gtsim::Algorithm::DSGD : gtsim::Algorithm::GT;
            if (run_algorithm != "gt" && run_algorithm != "dsgd")
                throw gtsim::invalid_input("run: unknown algorithm " + run_algorithm);
            cfg.T = run_steps;
            cfg.gamma = run_gamma;
            cfg.record_every = run_record;
            cfg.seed = seed;
            Eigen::MatrixXd X0 = Eigen::MatrixXd::Zero(oracle.d, w.n);
            if (run_init == "gaussian") {
                gtsim::NormalStream ns(gtsim::rng_key(seed, 0x1717ULL, 0));
                std::uint64_t k = 0;
                for (int c = 0; c < X0.cols(); ++c)
                    for (int r = 0; r < X0.rows(); ++r) X0(r, c) = ns(k++);
            } else if (run_init != "zero") {
                throw gtsim::invalid_input("run: unknown init " + run_init);
            }
            gtsim::RunTrace trace = gtsim::run(cfg, w, oracle, X0);
            std::ostringstream csv;
            gtsim::write_trace_csv(csv, trace);
            write_file(out / "trace.csv", csv.str());
            std::cout << "wrote " << (out / "trace.csv").string() << " ("
                      << trace.snapshots.size() << " snapshots)\n";
            return 0;
        }

        if (*sc_sweep_p || *sc_sweep_c) {
            gtsim::SweepSpec spec = *sc_sweep_p ? swp : swc;
            if (*sc_sweep_p) {
                if (!swp_alphas.empty()) spec.alphas = swp_alphas;
                else if (spec.n != 300) spec.alphas = gtsim::default_sweep_p_alphas(spec.n);
                spec.noise =
                    (swp_noise == "structured") ? gtsim::NoiseKind::Structured : gtsim::NoiseKind::Gaussian;
            } else {
                if (!swc_weights.empty()) spec.self_weights = swc_weights;
                spec.noise =
                    (swc_noise == "structured") ? gtsim::NoiseKind::Structured : gtsim::NoiseKind::Gaussian;
            }
            const gtsim::SweepResult res = gtsim::run_sweep(spec);
            const std::string base = *sc_sweep_p ? "sweep_p" : "sweep_c";
            std::ostringstream csv, dat;
            gtsim::write_sweep_csv(csv, res);
            gtsim::write_sweep_dat(dat, res);
            write_file(out / (base + ".csv"), csv.str());
            write_file(out / (base + ".dat"), dat.str());
            if (!res.guard_pass) {
                std::cout << "noise-floor guard violated: fully-connected control plateau "
                          << gtsim::format_g17(res.control_plateau) << " is "
                          << gtsim::format_g17(res.guard_ratio)
                          << " of the smallest swept plateau (limit 0.1); no slopes reported\n";
                return 2;
            }
            std::cout << gtsim::sweep_summary(res);
            return 0;
        }

        if (*sc_demo) {
            gtsim::MixingMatrix w = demo_topology.empty()
                                        ? gtsim::build_ring_uniform(demo_n)
                                        : parse_topology(demo_topology);
            Eigen::MatrixXd mus = Eigen::MatrixXd::Zero(w.n, w.n);
            for (int i = 0; i < w.n; ++i) mus(i, i) = static_cast<double>(i + 1);
            gtsim::GradientOracle oracle = gtsim::make_consensus(mus, seed);
            gtsim::RunConfig cfg;
            cfg.T = demo_steps;
            cfg.gamma = demo_gamma;
            cfg.record_every = 10;
            cfg.seed = seed;
            const Eigen::MatrixXd X0 = Eigen::MatrixXd::Zero(oracle.d, w.n);
            cfg.algorithm = gtsim::Algorithm::GT;
            gtsim::RunTrace gt = gtsim::run(cfg, w, oracle, X0);
            cfg.algorithm = gtsim::Algorithm::DSGD;
            gtsim::RunTrace ds = gtsim::run(cfg, w, oracle, X0);
            std::ostringstream a, b;
            gtsim::write_trace_csv(a, gt);
            gtsim::write_trace_csv(b, ds);
            write_file(out / "gt_trace.csv", a.str());
            write_file(out / "dsgd_trace.csv", b.str());
            const double gt_err = gt.snapshots.back().mean_dist + gt.snapshots.back().consensus_dist;
            const double ds_err = ds.snapshots.back().mean_dist + ds.snapshots.back().consensus_dist;
            std::cout << "gt final error=" << gtsim::format_g17(gt_err)
                      << " dsgd final error=" << gtsim::format_g17(ds_err) << "\n";
            return 0;
        }
    } catch (const gtsim::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
