#include <gtest/gtest.h>

#include <cmath>

#include "bbm/limit_models.hpp"
#include "bbm/stats.hpp"

using namespace bbm;

namespace
{
const TorusTable& table() {
    static const TorusTable t = TorusTable::default_table();
    return t;
}

LimitParams free_params(Regime regime, const Mat2& s2, std::size_t N, double h) {
    LimitParams p;
    p.regime = regime;
    p.Q0 = {0.5, 0.0};
    p.c = 1.0;
    p.sigma_field = SigmaField::constant(s2);
    p.h = h;
    p.N = N;
    p.seed = 3;
    p.checkpoints = {0.25, 0.5, 1.0};
    return p;
}

struct Marginals
{
    stats::Moments vx, vy, qx, qy;
};

Marginals marginals(const Ensemble& e, std::size_t k, Vec2 Q0) {
    Marginals m;
    for (const auto& path : e.paths) {
        m.vx.add(path.V[k].x);
        m.vy.add(path.V[k].y);
        m.qx.add(path.Q[k].x - Q0.x);
        m.qy.add(path.Q[k].y - Q0.y);
    }
    return m;
}

// standard error of a sample variance for a Gaussian sample
double var_se(const stats::Moments& m) { return m.variance() * std::sqrt(2.0 / (m.count() - 1)); }
} // namespace

TEST(AnalyticCov, ConstantSigma)
{
    LimitParams p = free_params(Regime::thm1, Mat2{2.0, 0.3, 0.3, 1.0}, 1, 0.01);
    p.chi = 0.5;
    p.u0 = {0.0, 1.0};
    const double pre = std::pow(0.75, 1.5);
    const auto cov = analytic_cov_thm1(p, 0.8);
    EXPECT_NEAR(cov.CovV.a, pre * 2.0 * 0.8, 1e-10);
    EXPECT_NEAR(cov.CovV.b, pre * 0.3 * 0.8, 1e-10);
    EXPECT_NEAR(cov.CovQ.d, pre * 1.0 * std::pow(0.8, 3) / 3, 1e-10);
    p.chi = 0.0;
    EXPECT_NEAR(analytic_cov_thm1(p, 0.8).CovV.a, 2.0 * 0.8, 1e-12);
}

TEST(AnalyticCov, LinearSigmaAlongTheReference)
{
    // sigma^2(Q0 + s chi u0) = (1 + s) I: CovV = pre (tau + tau^2/2),
    // CovQ = pre (tau^3/3 + tau^4/12)
    LimitParams p = free_params(Regime::thm1, Mat2::identity(), 1, 0.01);
    p.chi = 0.5;
    p.u0 = {1.0, 0.0};
    p.sigma_field = SigmaField::callable([&](Vec2 Q) {
        return Mat2::identity() * (1.0 + (Q.x - 0.5) / 0.5);
    });
    const double tau = 0.6, pre = std::pow(0.75, 1.5);
    const auto cov = analytic_cov_thm1(p, tau);
    EXPECT_NEAR(cov.CovV.a, pre * (tau + tau * tau / 2), 1e-9);
    EXPECT_NEAR(cov.CovQ.a, pre * (std::pow(tau, 3) / 3 + std::pow(tau, 4) / 12), 1e-9);
}

TEST(AnalyticCov, LeavingTheAdmissibleRegion)
{
    LimitParams p = free_params(Regime::thm1, Mat2::identity(), 1, 0.01);
    p.chi = 0.5;
    p.u0 = {1.0, 0.0};
    p.c = 1.0;
    p.table = &table();
    p.stop_clearance = 0.07;
    // Q0 + s/2 (1,0) reaches the (1,0) scatterer at clearance 0.07 when s = 0.1
    EXPECT_THROW(analytic_cov_thm1(p, 0.5), DomainError);
    EXPECT_NO_THROW(analytic_cov_thm1(p, 0.05));
}

TEST(SimulateLimit, ConstantIdentityMoments)
{
    const LimitParams p = free_params(Regime::thm2, Mat2::identity(), 10000, 1e-3);
    const Ensemble e = simulate_limit(p);
    for (std::size_t k = 0; k < p.checkpoints.size(); ++k) {
        const double tau = p.checkpoints[k];
        const auto m = marginals(e, k, p.Q0);
        EXPECT_NEAR(m.vx.variance(), tau, 3 * var_se(m.vx));
        EXPECT_NEAR(m.vy.variance(), tau, 3 * var_se(m.vy));
        EXPECT_NEAR(m.qx.variance(), tau * tau * tau / 3, 3 * var_se(m.qx));
        EXPECT_NEAR(m.qy.variance(), tau * tau * tau / 3, 3 * var_se(m.qy));
        EXPECT_NEAR(m.vx.mean(), 0.0, 3 * m.vx.stderr_mean());
    }
    EXPECT_EQ(e.n_stopped(), 0u);
}

TEST(SimulateLimit, HalvingTheStepMovesLessThanOneStandardError)
{
    LimitParams coarse = free_params(Regime::thm2, Mat2::identity(), 10000, 2e-3);
    coarse.noise_refinement = 1;
    LimitParams fine = coarse;
    fine.h = 1e-3;
    fine.noise_refinement = 0;
    const Ensemble a = simulate_limit(coarse), b = simulate_limit(fine);
    const std::size_t k = 2;
    const auto ma = marginals(a, k, coarse.Q0), mb = marginals(b, k, fine.Q0);
    EXPECT_LT(std::abs(ma.vx.variance() - mb.vx.variance()), var_se(mb.vx));
    EXPECT_LT(std::abs(ma.qx.variance() - mb.qx.variance()), var_se(mb.qx));
    EXPECT_LT(std::abs(ma.qy.variance() - mb.qy.variance()), var_se(mb.qy));
    // the shared Brownian path makes the endpoint velocities identical up to rounding
    EXPECT_NEAR(a.paths[0].V[k].x, b.paths[0].V[k].x, 1e-12);
}

TEST(SimulateLimit, ZeroSigmaStaysPut)
{
    LimitParams p = free_params(Regime::thm2, Mat2{}, 20, 1e-2);
    p.table = &table();
    p.stop_clearance = 0.07;
    const Ensemble e = simulate_limit(p);
    for (const auto& path : e.paths)
        for (std::size_t k = 0; k < p.checkpoints.size(); ++k) {
            EXPECT_EQ(path.Q[k].x, 0.5);
            EXPECT_EQ(path.Q[k].y, 0.0);
            EXPECT_EQ(path.V[k].x, 0.0);
        }
}

TEST(SimulateLimit, Thm1MatchesQuadrature)
{
    LimitParams p = free_params(Regime::thm1, Mat2{0.4, 0.05, 0.05, 0.3}, 10000, 1e-3);
    p.chi = 0.5;
    p.u0 = {0.0, 1.0};
    const Ensemble e = simulate_limit(p);
    const auto cov = analytic_cov_thm1(p, 1.0);
    const auto m = marginals(e, 2, {});
    EXPECT_NEAR(m.vx.variance(), cov.CovV.a, 3 * var_se(m.vx));
    EXPECT_NEAR(m.vy.variance(), cov.CovV.d, 3 * var_se(m.vy));
    EXPECT_NEAR(m.qx.variance(), cov.CovQ.a, 3 * var_se(m.qx));
    EXPECT_NEAR(m.qx.mean(), 0.0, 3 * m.qx.stderr_mean());
}

TEST(SimulateLimit, StoppedPathsFreezeWithZeroVelocity)
{
    LimitParams p;
    p.regime = Regime::thm3;
    p.Q0 = {0.5, 0.0};
    p.c = 0.3;
    p.sigma_field = SigmaField::isotropic(table());
    p.table = &table();
    p.stop_clearance = 0.02;
    p.h = 1e-3;
    p.N = 400;
    p.seed = 9;
    p.checkpoints = {0.05, 0.15, 0.3};
    const Ensemble e = simulate_limit(p);
    EXPECT_GT(e.n_stopped(), 0u);
    for (const auto& path : e.paths) {
        if (!path.stopped)
            continue;
        EXPECT_GT(path.stop_time, 0.0);
        EXPECT_NEAR(dist_to_boundary(wrap_point(path.Q.back()), table()), 0.02, 1e-9);
        for (std::size_t k = 0; k < p.checkpoints.size(); ++k)
            if (p.checkpoints[k] > path.stop_time) {
                EXPECT_TRUE(path.frozen[k]);
                EXPECT_EQ(path.V[k].x, 0.0);
                EXPECT_EQ(path.V[k].y, 0.0);
            }
    }
}

TEST(SimulateLimit, DeterministicAcrossWorkerCounts)
{
    LimitParams p = free_params(Regime::thm2, Mat2::identity(), 64, 1e-2);
    const Ensemble a = simulate_limit(p);
    p.workers = 4;
    const Ensemble b = simulate_limit(p);
    for (std::size_t i = 0; i < a.paths.size(); ++i)
        EXPECT_EQ(a.paths[i].Q[2].x, b.paths[i].Q[2].x);
}

TEST(LimitParams, Validation)
{
    LimitParams p = free_params(Regime::thm2, Mat2::identity(), 10, 1e-2);
    p.h = 0.0;
    EXPECT_THROW(simulate_limit(p), ArgumentError);
    p.h = 1e-2;
    p.checkpoints = {0.5, 0.25};
    EXPECT_THROW(simulate_limit(p), ArgumentError);
    p.checkpoints = {2.0};
    EXPECT_THROW(simulate_limit(p), ArgumentError);
    EXPECT_THROW(SigmaField::constant(Mat2::diag(1, -1)), ArgumentError);
}

TEST(SigmaField, LineInterpolation)
{
    const SigmaField f = SigmaField::line({0.5, 0.0}, {0.0, 1.0}, {0.0, 0.1},
                                          {Mat2::identity(), Mat2::identity() * 3.0});
    EXPECT_NEAR(f.sigma2({0.5, 0.05}).a, 2.0, 1e-14);
    EXPECT_NEAR(f.sigma2({0.7, 0.1}).d, 3.0, 1e-14);
    EXPECT_THROW(f.sigma2({0.5, 0.2}), DomainError);
}
