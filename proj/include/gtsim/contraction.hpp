#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "gtsim/common.hpp"
#include "gtsim/mixing.hpp"

namespace gtsim {

// W with the consensus projector removed; acts only on the disagreement space.
inline Eigen::MatrixXd tilde_w(const MixingMatrix& m) {
    return m.weights - Eigen::MatrixXd::Constant(m.n, m.n, 1.0 / m.n);
}

// Largest singular value via power iteration on M^T M (deterministic start,
// tolerance 1e-12, cap 10000), falling back to a full SVD if not converged.
inline double spectral_norm(const Eigen::MatrixXd& m) {
    const int cols = static_cast<int>(m.cols());
    if (cols == 0 || m.rows() == 0) return 0.0;
    Eigen::VectorXd v(cols);
    {
        NormalStream ns(rng_key(0x5eedULL, 0, 0));
        for (int i = 0; i < cols; ++i) v(i) = ns(static_cast<std::uint64_t>(i));
    }
    double nv = v.norm();
    if (nv == 0.0) v.setOnes(), nv = v.norm();
    v /= nv;
    double prev = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Eigen::VectorXd u = m.transpose() * (m * v);
        const double sq = u.norm();
        if (sq == 0.0) return 0.0;
        v = u / sq;
        if (std::abs(sq - prev) <= 1e-12 * std::max(1.0, sq)) return std::sqrt(sq);
        prev = sq;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

// Matrix power by repeated squaring (exact for i = 0 -> identity).
inline Eigen::MatrixXd matrix_power(Eigen::MatrixXd base, long i) {
    const int n = static_cast<int>(base.rows());
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(n, n);
    while (i > 0) {
        if (i & 1) acc = acc * base;
        i >>= 1;
        if (i) base = base * base;
    }
    return acc;
}

// Lifted gossip iteration matrix power: blocks [[Wt^i, 0], [-i Wt^i, Wt^i]].
struct LiftedMatrix {
    Eigen::MatrixXd top_left, bottom_left;  // top-right is zero, bottom-right = top-left
    Eigen::MatrixXd assembled;              // 2n x 2n
};

inline LiftedMatrix assemble_lifted_power(const MixingMatrix& m, long i) {
    LiftedMatrix l;
    const int n = m.n;
    l.top_left = matrix_power(tilde_w(m), i);
    l.bottom_left = -static_cast<double>(i) * l.top_left;
    l.assembled = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    l.assembled.topLeftCorner(n, n) = l.top_left;
    l.assembled.bottomLeftCorner(n, n) = l.bottom_left;
    l.assembled.bottomRightCorner(n, n) = l.top_left;
    return l;
}

// ||J^i||^2 from the assembled 2n x 2n block matrix.
inline double j_power_norm(const MixingMatrix& m, long i) {
    if (i < 0) throw invalid_input("j_power_norm: i must be >= 0");
    const double s = spectral_norm(assemble_lifted_power(m, i).assembled);
    return s * s;
}

// Same value through the spectrum: the lifted matrix block-diagonalizes over
// the eigenbasis of Wt into 2x2 blocks [[a, 0], [-i a, a]] with a = lambda^i,
// whose largest squared singular value is a^2 ((2 + i^2) + sqrt(i^4 + 4 i^2))/2.
// Used for long i-sweeps where assembling 2n x 2n matrices per i is infeasible.
inline double j_power_norm_from_spectrum(const SpectralParams& sp, long i) {
    if (i < 0) throw invalid_input("j_power_norm: i must be >= 0");
    if (i == 0) return 1.0;
    const double ii = static_cast<double>(i);
    const double phi = ((2.0 + ii * ii) + std::sqrt(ii * ii * (ii * ii + 4.0))) / 2.0;
    const double rho = std::max(std::abs(sp.lambda2), std::abs(sp.lambdaN));
    return std::pow(rho, 2.0 * ii) * phi;
}

struct KeyLemmaReport {
    long tau = 0;
    double norm_sq = 0.0;
    bool pass = false;
};

inline KeyLemmaReport verify_key_lemma(const MixingMatrix& m) {
    const SpectralParams sp = spectral_params(m);
    KeyLemmaReport r;
    r.tau = sp.tau;
    r.norm_sq = j_power_norm(m, sp.tau);
    r.pass = r.norm_sq <= 0.5;
    return r;
}

// ||(i+1) Wt^{i+1} - i Wt^i||^2. Both terms are polynomials in the symmetric
// Wt, so the norm is the max over Wt's eigenvalues.
inline double diff_power_norm_from_spectrum(const SpectralParams& sp, long i) {
    if (i < 0) throw invalid_input("diff_power_norm: i must be >= 0");
    double best = 0.0;
    const double ii = static_cast<double>(i);
    for (std::size_t k = 1; k < sp.eigenvalues.size(); ++k) {  // skip eigenvalue 1 of W -> 0 of Wt
        const double lam = sp.eigenvalues[k];
        const double v = std::abs((ii + 1.0) * std::pow(lam, static_cast<double>(i + 1)) -
                                  ii * std::pow(lam, static_cast<double>(i)));
        best = std::max(best, v);
    }
    return best * best;
}

inline double diff_power_norm(const MixingMatrix& m, long i) {
    if (i < 0) throw invalid_input("diff_power_norm: i must be >= 0");
    const Eigen::MatrixXd wt = tilde_w(m);
    const Eigen::MatrixXd wi = matrix_power(wt, i);
    const double s = spectral_norm(static_cast<double>(i + 1) * (wi * wt) - static_cast<double>(i) * wi);
    return s * s;
}

// ||i Wt^i||^2.
inline double scaled_power_norm_from_spectrum(const SpectralParams& sp, long i) {
    if (i < 0) throw invalid_input("scaled_power_norm: i must be >= 0");
    if (i == 0) return 0.0;
    const double rho = std::max(std::abs(sp.lambda2), std::abs(sp.lambdaN));
    const double v = static_cast<double>(i) * std::pow(rho, static_cast<double>(i));
    return v * v;
}

inline double scaled_power_norm(const MixingMatrix& m, long i) {
    if (i < 0) throw invalid_input("scaled_power_norm: i must be >= 0");
    const double s = spectral_norm(static_cast<double>(i) * matrix_power(tilde_w(m), i));
    return s * s;
}

// --- per-eigenvalue consensus iteration blocks --------------------------------

struct ConsensusBlock {
    double lambda = 0.0;
    double gamma = 0.0;
    Eigen::Matrix2d m;
    std::complex<double> eig1, eig2;
};

// Closed-form eigenvalues of [[l, -l], [g(l-1), (1-g)l]]:
//   l - g l / 2 +- (1/2) sqrt(g l) sqrt(4 + (g - 4) l)   (principal branch).
inline std::pair<std::complex<double>, std::complex<double>> consensus_block_eigs(double lambda,
                                                                                  double gamma) {
    const std::complex<double> gl(gamma * lambda, 0.0);
    const std::complex<double> rad(4.0 + (gamma - 4.0) * lambda, 0.0);
    const std::complex<double> root = 0.5 * std::sqrt(gl) * std::sqrt(rad);
    const std::complex<double> base(lambda - gamma * lambda / 2.0, 0.0);
    return {base + root, base - root};
}

inline ConsensusBlock make_consensus_block(double lambda, double gamma) {
    ConsensusBlock b;
    b.lambda = lambda;
    b.gamma = gamma;
    b.m << lambda, -lambda, gamma * (lambda - 1.0), (1.0 - gamma) * lambda;
    auto e = consensus_block_eigs(lambda, gamma);
    b.eig1 = e.first;
    b.eig2 = e.second;
    return b;
}

inline double consensus_block_radius(double lambda, double gamma) {
    auto e = consensus_block_eigs(lambda, gamma);
    return std::max(std::abs(e.first), std::abs(e.second));
}

struct ConsensusBoundReport {
    bool pass = true;
    double worst_margin = 1e300;  // min over grid of bound - radius
    std::vector<double> violations;
    bool closed_form_matches = true;
    double max_closed_form_error = 0.0;
    bool monotone_in_gamma = true;
};

// Grid check of: for gamma = 1 - |lambda|, the block spectral radius is at most
// |lambda|/3 + 2/3; plus a closed-form-vs-numeric cross-check and a gamma
// monotonicity spot check.
inline ConsensusBoundReport verify_consensus_bound(double grid_step = 0.01) {
    if (!(grid_step > 0.0 && grid_step <= 0.01))
        throw invalid_input("verify_consensus_bound: grid step must be in (0, 0.01]");
    ConsensusBoundReport r;
    const long steps = std::lround(1.0 / grid_step);
    for (long k = -steps + 1; k <= steps - 1; ++k) {
        const double lambda = static_cast<double>(k) * grid_step;
        const double gamma = 1.0 - std::abs(lambda);
        const double radius = consensus_block_radius(lambda, gamma);
        const double bound = std::abs(lambda) / 3.0 + 2.0 / 3.0;
        r.worst_margin = std::min(r.worst_margin, bound - radius);
        if (radius > bound + 1e-12) {
            r.pass = false;
            r.violations.push_back(lambda);
        }
        // closed form vs direct 2x2 eigensolve
        Eigen::Matrix2d m;
        m << lambda, -lambda, gamma * (lambda - 1.0), (1.0 - gamma) * lambda;
        Eigen::EigenSolver<Eigen::Matrix2d> es(m);
        const double r_numeric =
            std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(1)));
        const double err = std::abs(r_numeric - radius);
        r.max_closed_form_error = std::max(r.max_closed_form_error, err);
        if (err > 1e-10) r.closed_form_matches = false;
    }
    // spot check: radius non-decreasing in gamma on (0, 1 - |lambda|]
    for (double lambda : {-0.9, -0.5, -0.1, 0.1, 0.5, 0.9}) {
        double prev = 0.0;
        const double gmax = 1.0 - std::abs(lambda);
        for (int j = 1; j <= 20; ++j) {
            const double radius = consensus_block_radius(lambda, gmax * j / 20.0);
            if (radius < prev - 1e-12) r.monotone_in_gamma = false;
            prev = radius;
        }
    }
    return r;
}

}  // namespace gtsim
