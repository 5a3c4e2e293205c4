#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gtsim/common.hpp"
#include "gtsim/mixing.hpp"

namespace gtsim {

enum class OracleKind { QuadraticGaussian, QuadraticStructured, Consensus };

// Objective + stochastic gradient source shared by all workers. Immutable
// after construction; sampling is a pure function of (X, step) through the
// counter-based RNG, so concurrent evaluation and re-runs are deterministic.
struct GradientOracle {
    OracleKind kind = OracleKind::QuadraticGaussian;
    int n = 0;
    int d = 0;
    double sigma2 = 0.0;
    std::uint64_t seed = 0;
    double L = 2.0;
    double mu = 2.0;

    Eigen::MatrixXd targets;      // d x n, consensus only
    Eigen::MatrixXd noise_basis;  // d x n, structured only (rows scaled to norm sqrt(n))

    // Exact per-worker gradients, column i = grad f_i(x_i).
    Eigen::MatrixXd full_gradient(const Eigen::MatrixXd& X) const {
        switch (kind) {
            case OracleKind::Consensus:
                return X - targets;
            case OracleKind::QuadraticGaussian:
            case OracleKind::QuadraticStructured:
            default:
                return 2.0 * X;
        }
    }

    // Stochastic gradients at step t (adds the oracle's noise model).
    Eigen::MatrixXd sample_gradient(const Eigen::MatrixXd& X, std::uint64_t step) const {
        Eigen::MatrixXd G = full_gradient(X);
        if (sigma2 <= 0.0) return G;
        const double sd = std::sqrt(sigma2 / d);
        if (kind == OracleKind::QuadraticGaussian) {
            std::vector<double> buf(static_cast<std::size_t>(d));
            for (int i = 0; i < n; ++i) {
                NormalStream ns(rng_key(seed, static_cast<std::uint64_t>(i), step));
                ns.fill(buf.data(), buf.size());
                for (int k = 0; k < d; ++k) G(k, i) += sd * buf[k];
            }
        } else if (kind == OracleKind::QuadraticStructured) {
            // One d-dimensional xi per step, shared by all workers: G += diag(xi) V.
            std::vector<double> xi(static_cast<std::size_t>(d));
            NormalStream ns(rng_key(seed, 0xabcdULL, step));
            ns.fill(xi.data(), xi.size());
            for (int k = 0; k < d; ++k) G.row(k) += (sd * xi[k]) * noise_basis.row(k);
        }
        return G;
    }

    double objective(const Eigen::VectorXd& x) const {
        switch (kind) {
            case OracleKind::Consensus: {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += 0.5 * (x - targets.col(i)).squaredNorm();
                return s / n;
            }
            case OracleKind::QuadraticGaussian:
            case OracleKind::QuadraticStructured:
            default:
                return x.squaredNorm();
        }
    }

    bool has_optimum() const { return true; }

    Eigen::VectorXd optimum() const {
        if (kind == OracleKind::Consensus) return targets.rowwise().mean();
        return Eigen::VectorXd::Zero(d);
    }

    double objective_min() const { return objective(optimum()); }
};

inline GradientOracle make_quadratic_gaussian(int n, int d, double sigma2, std::uint64_t seed) {
    if (n < 1 || d < 1) throw invalid_input("oracle: need n, d >= 1");
    if (sigma2 < 0.0) throw invalid_input("oracle: sigma2 must be >= 0");
    GradientOracle o;
    o.kind = OracleKind::QuadraticGaussian;
    o.n = n;
    o.d = d;
    o.sigma2 = sigma2;
    o.seed = seed;
    o.L = 2.0;
    o.mu = 2.0;
    return o;
}

namespace detail {

// Deterministic representative of a (possibly degenerate) eigenspace: among
// the solver's eigenvector columns within tol of the target eigenvalue, pick
// the one whose absolute coordinate sequence is lexicographically largest,
// then flip sign so the first nonzero coordinate is positive.
inline Eigen::VectorXd pick_eigenvector(const Eigen::MatrixXd& vectors,
                                        const Eigen::VectorXd& values, double target) {
    std::vector<int> candidates;
    for (int i = 0; i < values.size(); ++i)
        if (std::abs(values(i) - target) <= 1e-10) candidates.push_back(i);
    if (candidates.empty()) throw invalid_input("structured oracle: eigenvector not found");
    int best = candidates[0];
    for (std::size_t j = 1; j < candidates.size(); ++j) {
        const int cand = candidates[j];
        for (int k = 0; k < values.size(); ++k) {
            const double a = std::abs(vectors(k, cand));
            const double b = std::abs(vectors(k, best));
            if (a > b + 1e-14) {
                best = cand;
                break;
            }
            if (b > a + 1e-14) break;
        }
    }
    Eigen::VectorXd v = vectors.col(best);
    for (int k = 0; k < v.size(); ++k) {
        if (v(k) != 0.0) {
            if (v(k) < 0.0) v = -v;
            break;
        }
    }
    return v;
}

}  // namespace detail

// Worst-case noise aligned with the gossip matrix's extreme eigenvectors:
// noise = diag(xi) V with half of V's rows the lambda_n eigenvector and half
// the lambda_2 eigenvector. Rows are scaled to norm sqrt(n) so the average
// per-worker noise power is sigma2.
inline GradientOracle make_quadratic_structured(const MixingMatrix& w, int d, double sigma2,
                                                std::uint64_t seed) {
    if (d < 2 || d % 2 != 0) throw invalid_input("structured oracle: d must be even and >= 2");
    if (sigma2 < 0.0) throw invalid_input("oracle: sigma2 must be >= 0");
    GradientOracle o;
    o.kind = OracleKind::QuadraticStructured;
    o.n = w.n;
    o.d = d;
    o.sigma2 = sigma2;
    o.seed = seed;
    o.L = 2.0;
    o.mu = 2.0;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.weights);
    if (es.info() != Eigen::Success) throw invalid_input("structured oracle: eigensolver failed");
    const Eigen::VectorXd vals = es.eigenvalues();  // ascending
    const double lambda_n = vals(0);
    const double lambda_2 = vals(w.n - 2);
    const Eigen::VectorXd v = detail::pick_eigenvector(es.eigenvectors(), vals, lambda_n);
    const Eigen::VectorXd u = detail::pick_eigenvector(es.eigenvectors(), vals, lambda_2);
    const double scale = std::sqrt(static_cast<double>(w.n));
    o.noise_basis.resize(d, w.n);
    for (int k = 0; k < d / 2; ++k) o.noise_basis.row(k) = scale * v.transpose();
    for (int k = d / 2; k < d; ++k) o.noise_basis.row(k) = scale * u.transpose();
    return o;
}

inline GradientOracle make_consensus(const Eigen::MatrixXd& mus, std::uint64_t seed) {
    if (mus.cols() < 1 || mus.rows() < 1) throw invalid_input("consensus oracle: empty targets");
    GradientOracle o;
    o.kind = OracleKind::Consensus;
    o.n = static_cast<int>(mus.cols());
    o.d = static_cast<int>(mus.rows());
    o.sigma2 = 0.0;
    o.seed = seed;
    o.targets = mus;
    o.L = 1.0;
    o.mu = 1.0;
    return o;
}

// (1/n) sum_i ||grad f_i(x*) - grad f(x*)||^2.
inline double heterogeneity(const GradientOracle& o, const Eigen::VectorXd& xstar) {
    Eigen::MatrixXd X = xstar.replicate(1, o.n);
    Eigen::MatrixXd G = o.full_gradient(X);
    Eigen::VectorXd mean = G.rowwise().mean();
    return (G.colwise() - mean).squaredNorm() / o.n;
}

}  // namespace gtsim
