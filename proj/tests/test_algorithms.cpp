#include <gtest/gtest.h>

#include <cmath>

#include "gtsim/algorithms.hpp"
#include "gtsim/mixing.hpp"
#include "gtsim/problems.hpp"

using namespace gtsim;

namespace {

Eigen::MatrixXd heterogeneous_targets(int n) {
    Eigen::MatrixXd mus = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) mus(i, i) = static_cast<double>(i + 1);
    return mus;
}

double tracking_residual(const WorkerState& s) {
    const double scale = std::max(1.0, s.Gprev.norm());
    return (s.Y.rowwise().mean() - s.Gprev.rowwise().mean()).norm() / scale;
}

}  // namespace

TEST(GtInit, ConsensusTrackingStart) {
    Eigen::MatrixXd mus(2, 3);
    mus << 1, 2, 3, 4, 5, 6;
    GradientOracle o = make_consensus(mus, 1);
    WorkerState s = gt_init(Eigen::MatrixXd::Zero(2, 3), o, 0.1);
    EXPECT_TRUE((s.Y.array() == (-mus).array()).all());  // grad f_i(0) = -mu_i
    EXPECT_EQ(s.t, 0);
    EXPECT_LT(tracking_residual(s), 1e-15);
}

TEST(GtInit, QuadraticZeroStart) {
    GradientOracle o = make_quadratic_gaussian(4, 3, 0.0, 1);
    WorkerState s = gt_init(Eigen::MatrixXd::Zero(3, 4), o, 0.1);
    EXPECT_EQ(s.Y.cwiseAbs().maxCoeff(), 0.0);
}

TEST(GtInit, RejectsBadInputs) {
    GradientOracle o = make_quadratic_gaussian(2, 2, 0.0, 1);
    EXPECT_THROW(gt_init(Eigen::MatrixXd::Zero(2, 2), o, 0.0), SimError);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Constant(2, 2, std::nan(""));
    EXPECT_THROW(gt_init(bad, o, 0.1), SimError);
}

TEST(GtStep, TrackingIdentityHolds) {
    MixingMatrix w = build_ring_uniform(5);
    GradientOracle o = make_quadratic_gaussian(5, 4, 1.0, 11);
    WorkerState s = gt_init(Eigen::MatrixXd::Ones(4, 5), o, 0.05);
    for (int t = 0; t < 50; ++t) {
        gt_step(s, w, o);
        ASSERT_LT(tracking_residual(s), 1e-12) << "t=" << t;
    }
}

TEST(GtStep, MeanIterateIdentity) {
    MixingMatrix w = build_ring_uniform(6);
    GradientOracle o = make_quadratic_gaussian(6, 3, 1.0, 4);
    WorkerState s = gt_init(Eigen::MatrixXd::Ones(3, 6), o, 0.03);
    for (int t = 0; t < 30; ++t) {
        Eigen::VectorXd xbar = s.X.rowwise().mean();
        Eigen::VectorXd ybar = s.Y.rowwise().mean();
        gt_step(s, w, o);
        Eigen::VectorXd expect = xbar - s.gamma * ybar;
        ASSERT_LT((s.X.rowwise().mean() - expect).norm(), 1e-12 * std::max(1.0, expect.norm()));
    }
}

TEST(GtStep, SingleNodeIsSgd) {
    MixingMatrix w = build_fully_connected(1);
    GradientOracle o = make_quadratic_gaussian(1, 3, 0.0, 1);
    Eigen::MatrixXd x0 = Eigen::MatrixXd::Constant(3, 1, 1.0);
    WorkerState s = gt_init(x0, o, 0.1);
    gt_step(s, w, o);
    // x' = x - gamma * 2x = 0.8 x
    EXPECT_LT((s.X - 0.8 * x0).cwiseAbs().maxCoeff(), 1e-15);
    // y' = g' = 2 x'
    EXPECT_LT((s.Y - 2.0 * s.X).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GtStep, FullyConnectedExactAveraging) {
    MixingMatrix w = build_fully_connected(5);
    GradientOracle o = make_consensus(heterogeneous_targets(5), 1);
    WorkerState s = gt_init(Eigen::MatrixXd::Zero(5, 5), o, 0.2);
    for (int t = 0; t < 5; ++t) {
        gt_step(s, w, o);
        Eigen::VectorXd gbar = s.Gprev.rowwise().mean();
        for (int i = 0; i < 5; ++i)
            ASSERT_LT((s.Y.col(i) - gbar).cwiseAbs().maxCoeff(), 1e-13) << "t=" << t << " i=" << i;
    }
}

TEST(GtStep, TwoNodeHandTrace) {
    // fully connected n=2, consensus mu=(0,2), d=1, X0=0: xbar1 = gamma,
    // xbar2 = 2 gamma - gamma^2; error follows (1-gamma)^{2t}.
    Eigen::MatrixXd mus(1, 2);
    mus << 0.0, 2.0;
    GradientOracle o = make_consensus(mus, 1);
    MixingMatrix w = build_fully_connected(2);
    const double gamma = 0.3;
    WorkerState s = gt_init(Eigen::MatrixXd::Zero(1, 2), o, gamma);
    gt_step(s, w, o);
    EXPECT_NEAR(s.X.rowwise().mean()(0), gamma, 1e-15);
    gt_step(s, w, o);
    EXPECT_NEAR(s.X.rowwise().mean()(0), 2.0 * gamma - gamma * gamma, 1e-14);
}

TEST(GtStep, ConsensusClosedForm) {
    Eigen::MatrixXd mus(1, 2);
    mus << 0.0, 2.0;
    GradientOracle o = make_consensus(mus, 1);
    MixingMatrix w = build_fully_connected(2);
    const double gamma = 0.17;
    WorkerState s = gt_init(Eigen::MatrixXd::Zero(1, 2), o, gamma);
    const double e0 = 1.0;  // ||xbar0 - x*||^2 with x* = 1
    for (int t = 1; t <= 50; ++t) {
        gt_step(s, w, o);
        const double err = std::pow(s.X.rowwise().mean()(0) - 1.0, 2.0);
        const double closed = std::pow(1.0 - gamma, 2.0 * t) * e0;
        ASSERT_NEAR(err, closed, 1e-10 * closed) << "t=" << t;
    }
}

TEST(GtStep, MatrixFormAgreesWithPerWorkerForm) {
    MixingMatrix w = build_ring_uniform(20);
    GradientOracle o = make_quadratic_gaussian(20, 6, 1.0, 77);
    Eigen::MatrixXd x0 = Eigen::MatrixXd::Ones(6, 20);
    WorkerState a = gt_init(x0, o, 0.02);
    WorkerState b = gt_init(x0, o, 0.02);
    for (int t = 0; t < 100; ++t) {
        gt_step(a, w, o);
        gt_step_matrix(b, w, o);
        const double scale = std::max(1.0, a.X.norm());
        ASSERT_LT((a.X - b.X).norm() / scale, 1e-12) << "t=" << t;
        ASSERT_LT((a.Y - b.Y).norm() / std::max(1.0, a.Y.norm()), 1e-12) << "t=" << t;
    }
}

TEST(GtStep, HeterogeneityScaleInvariance) {
    // Scaling all targets by 10 scales the squared-error trace by exactly 100.
    MixingMatrix w = build_ring_uniform(6);
    const double gamma = 0.1;
    GradientOracle o1 = make_consensus(heterogeneous_targets(6), 1);
    GradientOracle o10 = make_consensus(10.0 * heterogeneous_targets(6), 1);
    WorkerState s1 = gt_init(Eigen::MatrixXd::Zero(6, 6), o1, gamma);
    WorkerState s10 = gt_init(Eigen::MatrixXd::Zero(6, 6), o10, gamma);
    for (int t = 0; t < 200; ++t) {
        gt_step(s1, w, o1);
        gt_step(s10, w, o10);
        const double e1 = (s1.X.rowwise().mean() - o1.optimum()).squaredNorm();
        const double e10 = (s10.X.rowwise().mean() - o10.optimum()).squaredNorm();
        ASSERT_NEAR(e10, 100.0 * e1, 1e-10 * std::max(1.0, e10)) << "t=" << t;
    }
}

TEST(DsgdStep, SingleNodeIsSgd) {
    MixingMatrix w = build_fully_connected(1);
    GradientOracle o = make_quadratic_gaussian(1, 2, 0.0, 1);
    Eigen::MatrixXd x0 = Eigen::MatrixXd::Constant(2, 1, 1.0);
    WorkerState s = gt_init(x0, o, 0.1);
    dsgd_step(s, w, o);
    EXPECT_LT((s.X - 0.8 * x0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DsgdStep, MatchesGtOnHomogeneousCompleteGraph) {
    MixingMatrix w = build_fully_connected(4);
    GradientOracle o = make_quadratic_gaussian(4, 3, 0.0, 1);
    Eigen::MatrixXd x0 = Eigen::MatrixXd::Ones(3, 4);
    WorkerState gt = gt_init(x0, o, 0.1);
    WorkerState ds = gt_init(x0, o, 0.1);
    for (int t = 0; t < 20; ++t) {
        gt_step(gt, w, o);
        dsgd_step(ds, w, o);
        ASSERT_LT((gt.X - ds.X).cwiseAbs().maxCoeff(), 1e-12) << "t=" << t;
    }
}

TEST(DsgdStep, StallsOnHeterogeneousRingWhereGtConverges) {
    MixingMatrix w = build_ring_uniform(8);
    GradientOracle o = make_consensus(heterogeneous_targets(8), 1);
    Eigen::MatrixXd x0 = Eigen::MatrixXd::Zero(8, 8);
    WorkerState gt = gt_init(x0, o, 0.1);
    WorkerState ds = gt_init(x0, o, 0.1);
    for (int t = 0; t < 2000; ++t) {
        gt_step(gt, w, o);
        dsgd_step(ds, w, o);
    }
    auto worker_error = [&o](const WorkerState& s) {
        return (s.X.colwise() - Eigen::VectorXd(o.optimum())).squaredNorm() / 8.0;
    };
    EXPECT_LT(worker_error(gt), 1e-12);
    EXPECT_GT(worker_error(ds), 1e-6);
}

TEST(Divergence, DetectedWithStepIndex) {
    MixingMatrix w = build_fully_connected(1);
    GradientOracle o = make_quadratic_gaussian(1, 2, 0.0, 1);
    WorkerState s = gt_init(Eigen::MatrixXd::Ones(2, 1), o, 10.0);  // factor -19 per step
    try {
        for (int t = 0; t < 100; ++t) gt_step(s, w, o);
        FAIL() << "expected divergence";
    } catch (const SimError& e) {
        EXPECT_EQ(e.code, 3);
        EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
    }
}

TEST(Run, ZeroStepsGivesInitialSnapshotOnly) {
    MixingMatrix w = build_ring_uniform(5);
    GradientOracle o = make_quadratic_gaussian(5, 2, 1.0, 1);
    RunConfig cfg;
    cfg.T = 0;
    cfg.gamma = 0.1;
    RunTrace tr = run(cfg, w, o, Eigen::MatrixXd::Zero(2, 5));
    ASSERT_EQ(tr.snapshots.size(), 1u);
    EXPECT_EQ(tr.snapshots[0].t, 0);
}

TEST(Run, DeterministicAcrossCalls) {
    MixingMatrix w = build_ring_uniform(5);
    GradientOracle o = make_quadratic_gaussian(5, 2, 1.0, 21);
    RunConfig cfg;
    cfg.T = 100;
    cfg.gamma = 0.05;
    cfg.record_every = 7;
    RunTrace a = run(cfg, w, o, Eigen::MatrixXd::Zero(2, 5));
    RunTrace b = run(cfg, w, o, Eigen::MatrixXd::Zero(2, 5));
    ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
    for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
        EXPECT_EQ(a.snapshots[i].t, b.snapshots[i].t);
        EXPECT_EQ(a.snapshots[i].opt_error, b.snapshots[i].opt_error);
        EXPECT_EQ(a.snapshots[i].consensus_dist, b.snapshots[i].consensus_dist);
        EXPECT_EQ(a.snapshots[i].mean_dist, b.snapshots[i].mean_dist);
    }
}

TEST(Run, RecordsStrideAndFinalStep) {
    MixingMatrix w = build_ring_uniform(4);
    GradientOracle o = make_quadratic_gaussian(4, 2, 0.0, 1);
    RunConfig cfg;
    cfg.T = 25;
    cfg.gamma = 0.05;
    cfg.record_every = 10;
    RunTrace tr = run(cfg, w, o, Eigen::MatrixXd::Ones(2, 4));
    std::vector<long> ts;
    for (const auto& s : tr.snapshots) ts.push_back(s.t);
    EXPECT_EQ(ts, (std::vector<long>{0, 10, 20, 25}));
}

TEST(Run, LinearConvergenceAtGammaEqualsP) {
    // Theorem-2 setting: heterogeneous consensus, sigma = 0, ring n = 20,
    // gamma = p drives the average worker error to machine precision.
    MixingMatrix w = build_ring_uniform(20);
    SpectralParams sp = spectral_params(w);
    EXPECT_NEAR(sp.p, 0.06419332734105454, 1e-12);
    GradientOracle o = make_consensus(heterogeneous_targets(20), 1);
    WorkerState s = gt_init(Eigen::MatrixXd::Zero(20, 20), o, sp.p);
    for (int t = 0; t < 3500; ++t) gt_step_matrix(s, w, o);
    const double err = (s.X.colwise() - Eigen::VectorXd(o.optimum())).squaredNorm() / 20.0;
    EXPECT_LE(err, 1e-12);
}
