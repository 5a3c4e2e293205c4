#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gtsim/algorithms.hpp"
#include "gtsim/common.hpp"

namespace gtsim {

// Predicted stationary error level for constant-stepsize GT under gradient
// noise: gamma sigma^2 / n + gamma^2 sigma^2 / (p c^2), unit constants.
inline double predict_noise_floor(double gamma, double sigma2, int n, double p, double c) {
    if (!(gamma > 0.0) || !(sigma2 >= 0.0) || n < 1 || !(p > 0.0) || !(c > 0.0))
        throw invalid_input("predict_noise_floor: parameters must be positive");
    return gamma * sigma2 / n + gamma * gamma * sigma2 / (p * c * c);
}

enum class Regime { StronglyConvex, Convex, NonConvex };

struct RateInputs {
    double L = 1.0;
    double mu = 0.0;
    double sigma = 0.0;
    int n = 1;
    double p = 1.0;
    double c = 1.0;
    double F0 = 1.0;       // f(xbar0) - f*
    double R0 = 1.0;       // ||xbar0 - x*||
    double Rtilde0 = 0.0;  // initial consensus radius
};

struct RatePrediction {
    Regime regime = Regime::StronglyConvex;
    double statistical_term = 0.0;  // leading term; independent of p and c
    double network_term = 0.0;
    double optimization_term = 0.0;
    double total() const { return statistical_term + network_term + optimization_term; }
};

// Iteration-count predictor with all hidden constants set to 1 and log factors
// evaluated as ln(1/eps). Order-of-magnitude tool for relative comparisons
// across (p, c, n) only, not a bound.
inline RatePrediction predict_iterations(Regime regime, const RateInputs& in, double eps) {
    if (!(eps > 0.0)) throw invalid_input("predict_iterations: eps must be positive");
    if (in.n < 1 || !(in.p > 0.0) || !(in.c > 0.0) || in.L < 0.0 || in.sigma < 0.0)
        throw invalid_input("predict_iterations: invalid inputs");
    const double log_eps = std::log(1.0 / eps);
    RatePrediction out;
    out.regime = regime;
    switch (regime) {
        case Regime::StronglyConvex: {
            if (!(in.mu > 0.0))
                throw invalid_input("predict_iterations: strongly-convex regime needs mu > 0");
            out.statistical_term = in.sigma * in.sigma / (in.mu * in.n * eps);
            out.network_term =
                std::sqrt(in.L) * in.sigma / (in.mu * std::sqrt(in.p) * in.c * std::sqrt(eps));
            out.optimization_term = in.L / (in.mu * in.p * in.c) * log_eps;
            break;
        }
        case Regime::Convex: {
            const double r0sq = in.R0 * in.R0;
            if (!(r0sq > 0.0)) throw invalid_input("predict_iterations: convex regime needs R0 > 0");
            out.statistical_term = in.sigma * in.sigma / (in.n * eps * eps) * r0sq;
            out.network_term =
                std::sqrt(in.L) * in.sigma / (std::sqrt(in.p) * in.c * std::pow(eps, 1.5)) * r0sq;
            out.optimization_term =
                in.L * (1.0 + in.Rtilde0 * in.Rtilde0 / r0sq) / (in.p * in.c * eps) * r0sq;
            break;
        }
        case Regime::NonConvex: {
            if (!(in.F0 > 0.0)) throw invalid_input("predict_iterations: non-convex regime needs F0 > 0");
            const double lf0 = in.L * in.F0;
            out.statistical_term = in.sigma * in.sigma / (in.n * eps) * lf0;
            out.network_term = in.sigma /
                               ((std::sqrt(in.p) * in.c + in.p * std::sqrt(double(in.n))) *
                                std::pow(eps, 1.5)) *
                               lf0;
            out.optimization_term =
                (1.0 + in.L * in.Rtilde0 * in.Rtilde0 / in.F0) / (in.p * in.c * eps) * lf0;
            break;
        }
    }
    return out;
}

// Mean of the trailing tail_fraction of a series (the floor readout).
inline double tail_mean(const std::vector<double>& values, double tail_fraction) {
    if (values.size() < 10) throw invalid_input("plateau: need at least 10 snapshots");
    if (!(tail_fraction > 0.0 && tail_fraction <= 0.5))
        throw invalid_input("plateau: tail fraction must be in (0, 0.5]");
    const std::size_t count =
        std::max<std::size_t>(1, static_cast<std::size_t>(values.size() * tail_fraction));
    double s = 0.0;
    for (std::size_t i = values.size() - count; i < values.size(); ++i) s += values[i];
    return s / count;
}

// Tail still drifting? Compare the two halves of the tail window; a mismatch
// beyond 20% means the trace has not reached its floor.
inline bool tail_is_stationary(const std::vector<double>& values, double tail_fraction) {
    const std::size_t count =
        std::max<std::size_t>(2, static_cast<std::size_t>(values.size() * tail_fraction));
    const std::size_t start = values.size() - count;
    const std::size_t mid = start + count / 2;
    double a = 0.0, b = 0.0;
    for (std::size_t i = start; i < mid; ++i) a += values[i];
    for (std::size_t i = mid; i < values.size(); ++i) b += values[i];
    a /= (mid - start);
    b /= (values.size() - mid);
    const double denom = std::max(std::abs(a), std::abs(b));
    if (denom == 0.0) return true;
    return std::abs(a - b) <= 0.2 * denom;
}

inline std::vector<double> opt_error_series(const RunTrace& trace) {
    std::vector<double> v;
    v.reserve(trace.snapshots.size());
    for (const auto& s : trace.snapshots) v.push_back(s.opt_error);
    return v;
}

// opt_error + consensus_dist: the metric the sweeps fit, since it carries the
// topology-dependent part of the stationary error.
inline std::vector<double> combined_error_series(const RunTrace& trace) {
    std::vector<double> v;
    v.reserve(trace.snapshots.size());
    for (const auto& s : trace.snapshots) v.push_back(s.opt_error + s.consensus_dist);
    return v;
}

inline double plateau_estimate(const RunTrace& trace, double tail_fraction = 0.25) {
    return tail_mean(opt_error_series(trace), tail_fraction);
}

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Least squares of ln y on ln x.
inline FitResult loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw invalid_input("loglog_slope: need >= 3 paired points");
    const std::size_t m = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> lx(m), ly(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw invalid_input("loglog_slope: inputs must be positive");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) throw invalid_input("loglog_slope: degenerate x values");
    FitResult f;
    f.slope = (m * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / m;
    double ss_res = 0.0, ss_tot = 0.0;
    const double ymean = sy / m;
    for (std::size_t i = 0; i < m; ++i) {
        const double pred = f.slope * lx[i] + f.intercept;
        ss_res += (ly[i] - pred) * (ly[i] - pred);
        ss_tot += (ly[i] - ymean) * (ly[i] - ymean);
    }
    f.r2 = (ss_tot == 0.0) ? 1.0 : 1.0 - ss_res / ss_tot;
    return f;
}

}  // namespace gtsim
