#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gtsim/algorithms.hpp"
#include "gtsim/common.hpp"
#include "gtsim/metrics.hpp"
#include "gtsim/mixing.hpp"
#include "gtsim/problems.hpp"

namespace gtsim {

enum class SweepMode { P, C };
enum class NoiseKind { Gaussian, Structured };

struct SweepSpec {
    SweepMode mode = SweepMode::P;
    int n = 300;
    int d = 100;
    double sigma2 = 1.0;
    double gamma = 0.02;
    long T = 20000;
    long record_every = 10;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::vector<double> alphas;        // sweep-p: ring-to-complete blend factors
    std::vector<double> self_weights;  // sweep-c: ring self-weights
    NoiseKind noise = NoiseKind::Gaussian;
    double tail_fraction = 0.25;
};

// Blend factors placing p on a log grid over [p_lo, p_hi] for the
// ring-to-complete family (whose non-principal spectrum scales by alpha, so c
// stays near the uniform-ring constant).
inline std::vector<double> default_sweep_p_alphas(int n, double p_lo = 0.02, double p_hi = 0.2,
                                                  int count = 6) {
    const SpectralParams ring = spectral_params(build_ring_uniform(n));
    std::vector<double> alphas;
    for (int k = 0; k < count; ++k) {
        const double p = p_lo * std::pow(p_hi / p_lo, static_cast<double>(k) / (count - 1));
        alphas.push_back(std::sqrt(1.0 - p) / ring.lambda2);
    }
    return alphas;
}

// Self-weights chosen inside the small-c regime where the floor's c-term
// dominates while gossip stays stable at the default stepsize.
inline std::vector<double> default_sweep_c_weights() {
    return {0.04, 0.032, 0.025, 0.02, 0.016, 0.012};
}

inline SweepSpec default_sweep_p_spec() {
    SweepSpec s;
    s.mode = SweepMode::P;
    s.gamma = 0.02;
    s.alphas = default_sweep_p_alphas(s.n);
    return s;
}

inline SweepSpec default_sweep_c_spec() {
    SweepSpec s;
    s.mode = SweepMode::C;
    s.gamma = 0.015;
    s.self_weights = default_sweep_c_weights();
    return s;
}

struct SweepRow {
    double parameter = 0.0;  // alpha or self-weight
    double p = 0.0;
    double c = 0.0;
    double plateau = 0.0;
    double predicted_floor = 0.0;
    bool stationary = true;
};

struct SweepResult {
    SweepMode mode = SweepMode::P;
    std::vector<SweepRow> rows;
    double control_plateau = 0.0;
    double guard_ratio = 0.0;  // control / min plateau; must be <= 0.1
    bool guard_pass = false;
    FitResult fit_primary;    // sweep-p: vs 1/p;     sweep-c: vs 1/(p c)
    FitResult fit_secondary;  // sweep-p: vs 1/p^2;   sweep-c: vs 1/(p c^2)
};

namespace detail {

inline GradientOracle sweep_oracle(const SweepSpec& spec, const MixingMatrix& w,
                                   std::uint64_t seed) {
    if (spec.noise == NoiseKind::Structured)
        return make_quadratic_structured(w, spec.d, spec.sigma2, seed);
    return make_quadratic_gaussian(w.n, spec.d, spec.sigma2, seed);
}

// Plateau of opt_error + consensus_dist, averaged over seeds. Starting from
// consensus at the optimum reaches the same stationary level as a random start
// but with a far shorter transient.
inline std::pair<double, bool> cell_plateau(const SweepSpec& spec, const MixingMatrix& w) {
    double acc = 0.0;
    bool stationary = true;
    for (std::uint64_t seed : spec.seeds) {
        RunConfig cfg;
        cfg.algorithm = Algorithm::GT;
        cfg.T = spec.T;
        cfg.gamma = spec.gamma;
        cfg.record_every = spec.record_every;
        cfg.seed = seed;
        GradientOracle oracle = sweep_oracle(spec, w, seed);
        RunTrace trace = run(cfg, w, oracle, Eigen::MatrixXd::Zero(spec.d, w.n));
        const std::vector<double> series = combined_error_series(trace);
        acc += tail_mean(series, spec.tail_fraction);
        stationary = stationary && tail_is_stationary(series, spec.tail_fraction);
    }
    return {acc / spec.seeds.size(), stationary};
}

}  // namespace detail

inline SweepResult run_sweep(const SweepSpec& spec) {
    const std::vector<double>& params =
        (spec.mode == SweepMode::P) ? spec.alphas : spec.self_weights;
    if (params.empty()) throw invalid_input("sweep: empty parameter list");
    if (spec.seeds.empty()) throw invalid_input("sweep: empty seed list");

    SweepResult out;
    out.mode = spec.mode;
    const MixingMatrix complete = build_fully_connected(spec.n);

    for (double prm : params) {
        MixingMatrix w = (spec.mode == SweepMode::P)
                             ? interpolate(build_ring_uniform(spec.n), complete, prm)
                             : build_ring_self_weight(spec.n, prm);
        const SpectralParams sp = spectral_params(w);
        SweepRow row;
        row.parameter = prm;
        row.p = sp.p;
        row.c = sp.c;
        auto [plateau, stationary] = detail::cell_plateau(spec, w);
        row.plateau = plateau;
        row.stationary = stationary;
        row.predicted_floor = predict_noise_floor(spec.gamma, spec.sigma2, spec.n, sp.p, sp.c);
        out.rows.push_back(row);
    }

    auto [control, control_stat] = detail::cell_plateau(spec, complete);
    out.control_plateau = control;
    double min_plateau = out.rows.front().plateau;
    for (const auto& r : out.rows) min_plateau = std::min(min_plateau, r.plateau);
    out.guard_ratio = (min_plateau > 0.0) ? control / min_plateau : 1e300;
    out.guard_pass = control_stat && out.guard_ratio <= 0.1;

    std::vector<double> x1, x2, y;
    for (const auto& r : out.rows) {
        y.push_back(r.plateau);
        if (spec.mode == SweepMode::P) {
            x1.push_back(1.0 / r.p);
            x2.push_back(1.0 / (r.p * r.p));
        } else {
            x1.push_back(1.0 / (r.p * r.c));
            x2.push_back(1.0 / (r.p * r.c * r.c));
        }
    }
    out.fit_primary = loglog_slope(x1, y);
    out.fit_secondary = loglog_slope(x2, y);
    return out;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
    os << ((r.mode == SweepMode::P) ? "alpha" : "self_weight")
       << ",p,c,plateau,predicted_floor,stationary\n";
    for (const auto& row : r.rows)
        os << format_g17(row.parameter) << "," << format_g17(row.p) << "," << format_g17(row.c)
           << "," << format_g17(row.plateau) << "," << format_g17(row.predicted_floor) << ","
           << (row.stationary ? 1 : 0) << "\n";
}

// gnuplot-friendly: space separated, commented header.
inline void write_sweep_dat(std::ostream& os, const SweepResult& r) {
    os << "# " << ((r.mode == SweepMode::P) ? "alpha" : "self_weight")
       << " p c plateau predicted_floor\n";
    for (const auto& row : r.rows)
        os << format_g17(row.parameter) << " " << format_g17(row.p) << " " << format_g17(row.c)
           << " " << format_g17(row.plateau) << " " << format_g17(row.predicted_floor) << "\n";
}

inline std::string sweep_summary(const SweepResult& r) {
    std::ostringstream os;
    if (r.mode == SweepMode::P) {
        os << "fit plateau ~ 1/p:    slope=" << format_g17(r.fit_primary.slope)
           << " r2=" << format_g17(r.fit_primary.r2) << "\n"
           << "fit plateau ~ 1/p^2:  slope=" << format_g17(r.fit_secondary.slope)
           << " r2=" << format_g17(r.fit_secondary.r2) << "\n";
    } else {
        os << "fit plateau ~ 1/(pc):   slope=" << format_g17(r.fit_primary.slope)
           << " r2=" << format_g17(r.fit_primary.r2) << "\n"
           << "fit plateau ~ 1/(pc^2): slope=" << format_g17(r.fit_secondary.slope)
           << " r2=" << format_g17(r.fit_secondary.r2) << "\n";
    }
    os << "control plateau=" << format_g17(r.control_plateau)
       << " guard ratio=" << format_g17(r.guard_ratio) << " (limit 0.1) -> "
       << (r.guard_pass ? "ok" : "VIOLATED") << "\n";
    return os.str();
}

}  // namespace gtsim
