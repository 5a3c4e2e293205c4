#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "gtsim/common.hpp"

namespace gtsim {

// Tags let the simulator apply the matrix in O(n d) when the structure allows
// it; Dense is the general fallback.
enum class TopologyKind { Dense, Ring, InterpolatedRing, Complete };

// Symmetric doubly stochastic gossip weights.
struct MixingMatrix {
    int n = 0;
    Eigen::MatrixXd weights;

    TopologyKind kind = TopologyKind::Dense;
    double ring_self_weight = 0.0;  // Ring / InterpolatedRing
    double alpha = 1.0;             // InterpolatedRing: blend toward complete

    // Z <- Z * W for row-major worker layout Z (d x n), exploiting structure.
    Eigen::MatrixXd apply(const Eigen::MatrixXd& Z) const {
        switch (kind) {
            case TopologyKind::Complete: {
                Eigen::VectorXd m = Z.rowwise().mean();
                return m.replicate(1, n);
            }
            case TopologyKind::Ring:
                return ring_apply(Z, ring_self_weight);
            case TopologyKind::InterpolatedRing: {
                Eigen::MatrixXd R = ring_apply(Z, ring_self_weight);
                Eigen::VectorXd m = Z.rowwise().mean();
                return alpha * R + (1.0 - alpha) * m.replicate(1, n);
            }
            case TopologyKind::Dense:
            default:
                return Z * weights;
        }
    }

  private:
    Eigen::MatrixXd ring_apply(const Eigen::MatrixXd& Z, double w) const {
        const double side = (1.0 - w) / 2.0;
        Eigen::MatrixXd out(Z.rows(), n);
        for (int j = 0; j < n; ++j) {
            const int l = (j + n - 1) % n;
            const int r = (j + 1) % n;
            out.col(j) = w * Z.col(j) + side * (Z.col(l) + Z.col(r));
        }
        return out;
    }
};

struct SpectralParams {
    std::vector<double> eigenvalues;  // descending
    double lambda2 = 0.0;
    double lambdaN = 0.0;
    double delta = 0.0;
    double p = 0.0;
    double c = 0.0;
    long tau = 0;
};

struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  // i < j
    std::vector<int> degree;

    static Graph from_edges(int n, std::vector<std::pair<int, int>> edges) {
        Graph g;
        g.n = n;
        g.degree.assign(n, 0);
        for (auto& e : edges) {
            if (e.first == e.second) throw invalid_input("graph: self-loop not allowed");
            if (e.first < 0 || e.second < 0 || e.first >= n || e.second >= n)
                throw invalid_input("graph: node index out of range");
            if (e.first > e.second) std::swap(e.first, e.second);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        for (auto& e : edges) {
            g.degree[e.first]++;
            g.degree[e.second]++;
        }
        g.edges = std::move(edges);
        return g;
    }

    bool connected() const {
        if (n <= 1) return true;
        std::vector<std::vector<int>> adj(n);
        for (auto& e : edges) {
            adj[e.first].push_back(e.second);
            adj[e.second].push_back(e.first);
        }
        std::vector<char> seen(n, 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        int cnt = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[u])
                if (!seen[v]) {
                    seen[v] = 1;
                    ++cnt;
                    q.push(v);
                }
        }
        return cnt == n;
    }
};

struct ValidationReport {
    bool symmetric = false;
    bool doubly_stochastic = false;
    bool nonnegative = false;
    bool connected = false;
    double max_row_sum_error = 0.0;
    double min_entry = 0.0;

    bool ok() const { return symmetric && doubly_stochastic && nonnegative && connected; }
};

// --- builders ----------------------------------------------------------------

inline MixingMatrix build_ring_self_weight(int n, double w) {
    if (n < 3) throw invalid_input("ring: need n >= 3");
    if (!(w > 0.0 && w < 1.0)) throw invalid_input("ring: self-weight must be in (0,1)");
    MixingMatrix m;
    m.n = n;
    m.kind = TopologyKind::Ring;
    m.ring_self_weight = w;
    m.weights = Eigen::MatrixXd::Zero(n, n);
    const double side = (1.0 - w) / 2.0;
    for (int i = 0; i < n; ++i) {
        m.weights(i, i) = w;
        m.weights(i, (i + 1) % n) += side;
        m.weights(i, (i + n - 1) % n) += side;
    }
    return m;
}

inline MixingMatrix build_ring_uniform(int n) { return build_ring_self_weight(n, 1.0 / 3.0); }

inline MixingMatrix build_torus(int rows, int cols) {
    if (rows < 3 || cols < 3) throw invalid_input("torus: need rows, cols >= 3");
    const int n = rows * cols;
    MixingMatrix m;
    m.n = n;
    m.weights = Eigen::MatrixXd::Zero(n, n);
    auto id = [cols](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int u = id(r, c);
            m.weights(u, u) = 0.2;
            m.weights(u, id((r + 1) % rows, c)) += 0.2;
            m.weights(u, id((r + rows - 1) % rows, c)) += 0.2;
            m.weights(u, id(r, (c + 1) % cols)) += 0.2;
            m.weights(u, id(r, (c + cols - 1) % cols)) += 0.2;
        }
    return m;
}

inline MixingMatrix build_fully_connected(int n) {
    if (n < 1) throw invalid_input("complete: need n >= 1");
    MixingMatrix m;
    m.n = n;
    m.kind = TopologyKind::Complete;
    m.weights = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    return m;
}

inline MixingMatrix build_metropolis_hastings(const Graph& g) {
    if (!g.connected()) throw invalid_input("metropolis-hastings: graph is disconnected");
    MixingMatrix m;
    m.n = g.n;
    m.weights = Eigen::MatrixXd::Zero(g.n, g.n);
    for (auto& e : g.edges) {
        const double w = std::min(1.0 / (g.degree[e.first] + 1), 1.0 / (g.degree[e.second] + 1));
        m.weights(e.first, e.second) = w;
        m.weights(e.second, e.first) = w;
    }
    for (int i = 0; i < g.n; ++i) m.weights(i, i) = 1.0 - m.weights.row(i).sum();
    return m;
}

inline MixingMatrix interpolate(const MixingMatrix& wa, const MixingMatrix& wb, double alpha) {
    if (wa.n != wb.n) throw invalid_input("interpolate: dimension mismatch");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw invalid_input("interpolate: alpha must be in [0,1]");
    if (alpha == 1.0) return wa;
    if (alpha == 0.0) return wb;
    MixingMatrix m;
    m.n = wa.n;
    m.weights = alpha * wa.weights + (1.0 - alpha) * wb.weights;
    if (wa.kind == TopologyKind::Ring && wb.kind == TopologyKind::Complete) {
        m.kind = TopologyKind::InterpolatedRing;
        m.ring_self_weight = wa.ring_self_weight;
        m.alpha = alpha;
    }
    return m;
}

// --- spectral quantities -------------------------------------------------------

// Gossip rounds needed before the lifted iteration matrix contracts below 1/2.
// Smallest integer strictly greater than (2/p) ln((50/p)(1 + ln(1/p))), with
// ln(1/p) clamped at 0 so the expression stays defined at p = 1.
inline long tau_threshold(double p) {
    if (!(p > 0.0)) throw invalid_input("tau: p must be positive");
    const double log_inv_p = std::max(0.0, std::log(1.0 / p));
    const double x = (2.0 / p) * std::log((50.0 / p) * (1.0 + log_inv_p));
    return static_cast<long>(std::floor(x)) + 1;
}

inline SpectralParams spectral_params(const MixingMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.weights);
    if (es.info() != Eigen::Success) throw invalid_input("spectral_params: eigensolver failed");
    SpectralParams sp;
    sp.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + m.n);
    std::reverse(sp.eigenvalues.begin(), sp.eigenvalues.end());  // descending

    if (std::abs(sp.eigenvalues.front() - 1.0) > 1e-10)
        throw invalid_input("spectral_params: top eigenvalue is not 1 (not doubly stochastic?)");
    if (sp.eigenvalues.back() <= -1.0 + 1e-12)
        throw invalid_input("spectral_params: eigenvalue at -1 (periodic gossip)");

    sp.lambda2 = (m.n >= 2) ? sp.eigenvalues[1] : 0.0;
    sp.lambdaN = (m.n >= 2) ? sp.eigenvalues.back() : 0.0;
    const double rho = std::max(std::abs(sp.lambda2), std::abs(sp.lambdaN));
    sp.delta = 1.0 - rho;
    sp.p = 1.0 - rho * rho;
    sp.c = 1.0 - std::min(sp.lambdaN, 0.0) * std::min(sp.lambdaN, 0.0);
    if (sp.p <= 1e-12) throw invalid_input("spectral_params: p ~ 0 (graph effectively disconnected)");
    sp.tau = tau_threshold(sp.p);
    return sp;
}

inline ValidationReport validate(const MixingMatrix& m) {
    ValidationReport r;
    r.symmetric = (m.weights.array() == m.weights.transpose().array()).all();
    r.min_entry = m.weights.minCoeff();
    r.nonnegative = r.min_entry >= 0.0;
    r.max_row_sum_error = (m.weights.rowwise().sum().array() - 1.0).abs().maxCoeff();
    r.doubly_stochastic = r.max_row_sum_error <= 1e-12;
    r.connected = false;
    if (r.symmetric && r.doubly_stochastic && r.nonnegative) {
        try {
            spectral_params(m);
            r.connected = true;
        } catch (const SimError&) {
            r.connected = false;
        }
    }
    return r;
}

// Seed-fixed Erdos-Renyi graph, resampled until connected.
inline Graph random_connected_graph(int n, double edge_prob, std::uint64_t seed) {
    if (n < 2) throw invalid_input("random graph: need n >= 2");
    for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
        std::vector<std::pair<int, int>> edges;
        const std::uint64_t key = rng_key(seed, attempt, 0);
        std::uint64_t k = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++k)
                if (u64_to_unit(splitmix64(key + k)) <= edge_prob) edges.emplace_back(i, j);
        Graph g = Graph::from_edges(n, std::move(edges));
        if (g.connected()) return g;
    }
    throw invalid_input("random graph: could not sample a connected graph");
}

}  // namespace gtsim
