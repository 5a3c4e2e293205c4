#include <gtest/gtest.h>

#include <cmath>

#include "gtsim/mixing.hpp"
#include "gtsim/problems.hpp"

using namespace gtsim;

TEST(QuadraticGaussian, NoiselessIsDeterministic) {
    GradientOracle o = make_quadratic_gaussian(3, 5, 0.0, 1);
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(5, 3);
    EXPECT_EQ(o.sample_gradient(zero, 0).cwiseAbs().maxCoeff(), 0.0);
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(5, 3, 1.5);
    EXPECT_TRUE((o.sample_gradient(x, 7).array() == (2.0 * x).array()).all());
}

TEST(QuadraticGaussian, ObjectiveAndOptimum) {
    GradientOracle o = make_quadratic_gaussian(2, 3, 1.0, 1);
    Eigen::VectorXd x(3);
    x << 1.0, 1.0, 1.0;  // ||x||^2 = 3
    EXPECT_DOUBLE_EQ(o.objective(x), 3.0);
    EXPECT_DOUBLE_EQ(o.objective_min(), 0.0);
    EXPECT_EQ(o.optimum().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_DOUBLE_EQ(o.L, 2.0);
    EXPECT_DOUBLE_EQ(o.mu, 2.0);
}

// (1/n) sum_i E ||noise_i||^2 = sigma^2 within 5%, 1e5 samples.
TEST(QuadraticGaussian, NoiseVarianceMatchesSigma2) {
    const int n = 4, d = 50;
    const double sigma2 = 2.5;
    GradientOracle o = make_quadratic_gaussian(n, d, sigma2, 42);
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(d, n);
    const long steps = 500;  // 4 workers x 50 coords x 500 steps = 1e5 draws
    double acc = 0.0;
    for (long t = 0; t < steps; ++t) acc += o.sample_gradient(zero, t).squaredNorm();
    const double per_worker = acc / (steps * n);
    EXPECT_NEAR(per_worker, sigma2, 0.05 * sigma2);
}

TEST(QuadraticGaussian, PerCoordinateVariance) {
    const int d = 100;
    GradientOracle o = make_quadratic_gaussian(1, d, 1.0, 5);
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(d, 1);
    double acc = 0.0;
    const long steps = 1000;
    for (long t = 0; t < steps; ++t) acc += o.sample_gradient(zero, t).squaredNorm();
    EXPECT_NEAR(acc / (steps * d), 1.0 / d, 0.05 / d);  // sigma^2 / d per coordinate
}

TEST(QuadraticGaussian, Unbiased) {
    const int n = 2, d = 20;
    GradientOracle o = make_quadratic_gaussian(n, d, 1.0, 9);
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(d, n);
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(d, n);
    const long steps = 2500;  // 1e5 scalar draws
    for (long t = 0; t < steps; ++t) mean += o.sample_gradient(zero, t);
    mean /= static_cast<double>(steps);
    // 3 standard errors of the per-coordinate mean, sd = sigma/sqrt(d)
    const double tol = 3.0 * std::sqrt(1.0 / d) / std::sqrt(static_cast<double>(steps));
    EXPECT_LT(mean.cwiseAbs().maxCoeff(), tol * 2.0);  // max over 40 coords, slack factor
}

TEST(QuadraticGaussian, BitIdenticalStreams) {
    GradientOracle a = make_quadratic_gaussian(3, 7, 1.0, 123);
    GradientOracle b = make_quadratic_gaussian(3, 7, 1.0, 123);
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(7, 3, 0.3);
    EXPECT_TRUE((a.sample_gradient(x, 11).array() == b.sample_gradient(x, 11).array()).all());
    GradientOracle c = make_quadratic_gaussian(3, 7, 1.0, 124);
    EXPECT_FALSE((a.sample_gradient(x, 11).array() == c.sample_gradient(x, 11).array()).all());
    // different steps give different noise
    EXPECT_FALSE((a.sample_gradient(x, 11).array() == a.sample_gradient(x, 12).array()).all());
}

TEST(QuadraticGaussian, RejectsBadParams) {
    EXPECT_THROW(make_quadratic_gaussian(0, 5, 1.0, 1), SimError);
    EXPECT_THROW(make_quadratic_gaussian(3, 5, -1.0, 1), SimError);
}

TEST(QuadraticStructured, NoiselessReduces) {
    MixingMatrix w = build_ring_uniform(6);
    GradientOracle o = make_quadratic_structured(w, 4, 0.0, 1);
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(4, 6, 2.0);
    EXPECT_TRUE((o.sample_gradient(x, 3).array() == (2.0 * x).array()).all());
}

TEST(QuadraticStructured, RejectsOddD) {
    MixingMatrix w = build_ring_uniform(6);
    EXPECT_THROW(make_quadratic_structured(w, 5, 1.0, 1), SimError);
    EXPECT_THROW(make_quadratic_structured(w, 0, 1.0, 1), SimError);
}

TEST(QuadraticStructured, BasisRowsAreExtremeEigenvectors) {
    MixingMatrix w = build_ring_self_weight(8, 0.1);
    SpectralParams sp = spectral_params(w);
    GradientOracle o = make_quadratic_structured(w, 6, 1.0, 1);
    const double scale = std::sqrt(8.0);
    Eigen::VectorXd v = o.noise_basis.row(0).transpose() / scale;        // lambdaN direction
    Eigen::VectorXd u = o.noise_basis.row(5).transpose() / scale;        // lambda2 direction
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    EXPECT_NEAR(u.norm(), 1.0, 1e-12);
    EXPECT_LT((w.weights * v - sp.lambdaN * v).norm(), 1e-9);
    EXPECT_LT((w.weights * u - sp.lambda2 * u).norm(), 1e-9);
}

TEST(QuadraticStructured, NoiseLiesInExtremeEigenplane) {
    MixingMatrix w = build_ring_self_weight(8, 0.1);
    GradientOracle o = make_quadratic_structured(w, 6, 1.0, 7);
    const double scale = std::sqrt(8.0);
    Eigen::VectorXd v = o.noise_basis.row(0).transpose() / scale;
    Eigen::VectorXd u = o.noise_basis.row(5).transpose() / scale;
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(8, 8) - v * v.transpose() - u * u.transpose();
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(6, 8);
    for (std::uint64_t t : {0ULL, 1ULL, 9ULL}) {
        Eigen::MatrixXd noise = o.sample_gradient(zero, t);  // pure noise at X = 0
        EXPECT_LT((noise * P).cwiseAbs().maxCoeff(), 1e-9) << "t=" << t;
    }
}

TEST(QuadraticStructured, NoiseVarianceMatchesSigma2) {
    MixingMatrix w = build_ring_uniform(6);
    const int d = 10;
    const double sigma2 = 1.0;
    GradientOracle o = make_quadratic_structured(w, d, sigma2, 3);
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(d, 6);
    double acc = 0.0;
    const long steps = 20000;
    for (long t = 0; t < steps; ++t) acc += o.sample_gradient(zero, t).squaredNorm();
    const double per_worker = acc / (steps * 6);
    EXPECT_NEAR(per_worker, sigma2, 0.05 * sigma2);
}

TEST(QuadraticStructured, DeterministicAcrossConstructions) {
    MixingMatrix w = build_torus(3, 3);
    GradientOracle a = make_quadratic_structured(w, 4, 1.0, 2);
    GradientOracle b = make_quadratic_structured(w, 4, 1.0, 2);
    EXPECT_TRUE((a.noise_basis.array() == b.noise_basis.array()).all());
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 9);
    EXPECT_TRUE((a.sample_gradient(zero, 5).array() == b.sample_gradient(zero, 5).array()).all());
}

TEST(Consensus, MeanIsOptimum) {
    Eigen::MatrixXd mus(1, 2);
    mus << 0.0, 2.0;
    GradientOracle o = make_consensus(mus, 1);
    EXPECT_DOUBLE_EQ(o.optimum()(0), 1.0);
    EXPECT_DOUBLE_EQ(o.L, 1.0);
    EXPECT_DOUBLE_EQ(o.mu, 1.0);
}

TEST(Consensus, ObjectiveAtOptimum) {
    Eigen::MatrixXd mus(1, 2);
    mus << 0.0, 2.0;
    GradientOracle o = make_consensus(mus, 1);
    Eigen::VectorXd x(1);
    x << 1.0;
    EXPECT_DOUBLE_EQ(o.objective(x), 0.5);
    EXPECT_DOUBLE_EQ(o.objective_min(), 0.5);
    EXPECT_DOUBLE_EQ(o.objective(x) - o.objective_min(), 0.0);
}

TEST(Consensus, GradientIsDisplacement) {
    Eigen::MatrixXd mus(2, 3);
    mus << 1, 2, 3, 4, 5, 6;
    GradientOracle o = make_consensus(mus, 1);
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(2, 3);
    EXPECT_TRUE((o.full_gradient(X).array() == (-mus).array()).all());
}

TEST(Heterogeneity, QuadraticIsZero) {
    GradientOracle o = make_quadratic_gaussian(5, 4, 1.0, 1);
    EXPECT_DOUBLE_EQ(heterogeneity(o, o.optimum()), 0.0);
}

TEST(Heterogeneity, TwoTargetExample) {
    Eigen::MatrixXd mus(1, 2);
    mus << 0.0, 2.0;
    GradientOracle o = make_consensus(mus, 1);
    EXPECT_DOUBLE_EQ(heterogeneity(o, o.optimum()), 1.0);  // grads at x*=1 are (1, -1)
}

TEST(Heterogeneity, EqualTargetsIsZero) {
    Eigen::MatrixXd mus = Eigen::MatrixXd::Constant(3, 4, 1.7);
    GradientOracle o = make_consensus(mus, 1);
    EXPECT_DOUBLE_EQ(heterogeneity(o, o.optimum()), 0.0);
}
