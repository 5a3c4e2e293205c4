#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gtsim/common.hpp"
#include "gtsim/mixing.hpp"
#include "gtsim/problems.hpp"

namespace gtsim {

struct WorkerState {
    Eigen::MatrixXd X;      // d x n, column i = worker i's model
    Eigen::MatrixXd Y;      // d x n tracking variables
    Eigen::MatrixXd Gprev;  // d x n last sampled gradients
    long t = 0;
    double gamma = 0.0;
};

enum class Algorithm { GT, DSGD };

struct RunConfig {
    Algorithm algorithm = Algorithm::GT;
    long T = 1;
    double gamma = 0.0;
    long record_every = 1;
    std::uint64_t seed = 0;
    bool use_matrix_form = true;  // the structure-aware code path
};

struct Snapshot {
    long t = 0;
    double opt_error = 0.0;       // f(xbar) - f*
    double consensus_dist = 0.0;  // ||Psi_t||^2
    double mean_dist = 0.0;       // ||xbar - x*||^2
};

struct RunTrace {
    std::vector<Snapshot> snapshots;
    RunConfig config;
};

inline void check_finite(const WorkerState& s) {
    if (!s.X.allFinite() || !s.Y.allFinite() ||
        s.X.norm() > 1e12)  // Frobenius blow-up counts as divergence too
        throw divergence("iterates diverged at step " + std::to_string(s.t));
}

inline WorkerState gt_init(const Eigen::MatrixXd& X0, const GradientOracle& oracle, double gamma,
                           std::uint64_t /*seed folded into the oracle*/ = 0) {
    if (!X0.allFinite()) throw invalid_input("gt_init: X0 must be finite");
    if (!(gamma > 0.0)) throw invalid_input("gt_init: gamma must be positive");
    WorkerState s;
    s.X = X0;
    s.Gprev = oracle.sample_gradient(X0, 0);
    s.Y = s.Gprev;
    s.t = 0;
    s.gamma = gamma;
    return s;
}

// One GT round written exactly as the per-worker protocol: every worker mixes
// its neighbors' (x - gamma y) and y values from the previous round, then
// samples a fresh gradient and updates its tracking variable.
inline void gt_step(WorkerState& s, const MixingMatrix& w, const GradientOracle& oracle) {
    const int n = static_cast<int>(s.X.cols());
    const int d = static_cast<int>(s.X.rows());
    Eigen::MatrixXd Z = s.X - s.gamma * s.Y;
    Eigen::MatrixXd Xn(d, n), Yn(d, n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd xi = Eigen::VectorXd::Zero(d);
        Eigen::VectorXd yi = Eigen::VectorXd::Zero(d);
        for (int j = 0; j < n; ++j) {
            const double wij = w.weights(j, i);
            if (wij == 0.0) continue;
            xi += wij * Z.col(j);
            yi += wij * s.Y.col(j);
        }
        Xn.col(i) = xi;
        Yn.col(i) = yi;
    }
    Eigen::MatrixXd Gn = oracle.sample_gradient(Xn, static_cast<std::uint64_t>(s.t + 1));
    s.X = std::move(Xn);
    s.Y = Yn + (Gn - s.Gprev);
    s.Gprev = std::move(Gn);
    s.t += 1;
    check_finite(s);
}

// The same round in lifted matrix form: [X', gamma Y'] = [X, gamma Y] * [[W, 0], [-W, W]]
// followed by the gradient-difference injection into Y.
inline void gt_step_matrix(WorkerState& s, const MixingMatrix& w, const GradientOracle& oracle) {
    Eigen::MatrixXd XW = w.apply(s.X);
    Eigen::MatrixXd YW = w.apply(s.Y);
    Eigen::MatrixXd Xn = XW - s.gamma * YW;
    Eigen::MatrixXd Gn = oracle.sample_gradient(Xn, static_cast<std::uint64_t>(s.t + 1));
    s.X = std::move(Xn);
    s.Y = YW + (Gn - s.Gprev);
    s.Gprev = std::move(Gn);
    s.t += 1;
    check_finite(s);
}

inline void dsgd_step(WorkerState& s, const MixingMatrix& w, const GradientOracle& oracle) {
    Eigen::MatrixXd G = oracle.sample_gradient(s.X, static_cast<std::uint64_t>(s.t));
    s.X = w.apply(s.X - s.gamma * G);
    s.Gprev = std::move(G);
    s.t += 1;
    check_finite(s);
}

// ||Psi_t||^2 = (1/n) sum ||x_i - xbar||^2 + (gamma^2/n) sum ||y_i - ybar||^2.
inline double consensus_distance(const WorkerState& s) {
    const int n = static_cast<int>(s.X.cols());
    Eigen::VectorXd xbar = s.X.rowwise().mean();
    Eigen::VectorXd ybar = s.Y.rowwise().mean();
    const double dx = (s.X.colwise() - xbar).squaredNorm() / n;
    const double dy = (s.Y.colwise() - ybar).squaredNorm() / n;
    return dx + s.gamma * s.gamma * dy;
}

inline Snapshot take_snapshot(const WorkerState& s, const GradientOracle& oracle) {
    Snapshot snap;
    snap.t = s.t;
    Eigen::VectorXd xbar = s.X.rowwise().mean();
    auto clamp0 = [](double v) { return (v < 0.0 && v > -1e-12) ? 0.0 : v; };
    snap.opt_error = clamp0(oracle.objective(xbar) - oracle.objective_min());
    snap.consensus_dist = clamp0(consensus_distance(s));
    snap.mean_dist = clamp0((xbar - oracle.optimum()).squaredNorm());
    return snap;
}

inline RunTrace run(const RunConfig& config, const MixingMatrix& w, const GradientOracle& oracle,
                    const Eigen::MatrixXd& X0) {
    if (config.T < 0) throw invalid_input("run: T must be >= 0");
    if (config.record_every < 1) throw invalid_input("run: record_every must be >= 1");
    RunTrace trace;
    trace.config = config;
    WorkerState s = gt_init(X0, oracle, config.gamma);
    trace.snapshots.push_back(take_snapshot(s, oracle));
    for (long t = 1; t <= config.T; ++t) {
        if (config.algorithm == Algorithm::GT) {
            if (config.use_matrix_form)
                gt_step_matrix(s, w, oracle);
            else
                gt_step(s, w, oracle);
        } else {
            dsgd_step(s, w, oracle);
        }
        if (t % config.record_every == 0 || t == config.T)
            trace.snapshots.push_back(take_snapshot(s, oracle));
    }
    return trace;
}

}  // namespace gtsim
