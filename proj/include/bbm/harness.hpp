#ifndef BBM_HARNESS_HPP
#define BBM_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "limit_models.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "transport.hpp"
#include "vec2.hpp"

namespace bbm
{

/// Per-checkpoint moments of an ensemble.
struct EnsembleSummary
{
    Regime regime = Regime::thm2;
    std::vector<double> tau;
    std::vector<Vec2> mean_V, mean_Q;
    std::vector<Vec2> se_mean_V, se_mean_Q;
    std::vector<Mat2> cov_V, cov_Q;
    std::vector<Mat2> se_cov_V, se_cov_Q;
    std::vector<Vec2> kurtosis_V, kurtosis_Q;
    std::vector<std::size_t> stopped; ///< paths frozen at each checkpoint
    std::size_t n_paths = 0;
    std::size_t n_stopped = 0;
};

inline std::vector<Vec2> checkpoint_V(const Ensemble& e, std::size_t k)
{
    std::vector<Vec2> out;
    out.reserve(e.paths.size());
    for (const auto& p : e.paths)
        out.push_back(p.V.at(k));
    return out;
}

inline std::vector<Vec2> checkpoint_Q(const Ensemble& e, std::size_t k)
{
    std::vector<Vec2> out;
    out.reserve(e.paths.size());
    for (const auto& p : e.paths)
        out.push_back(p.Q.at(k));
    return out;
}

inline EnsembleSummary summarize(const Ensemble& e)
{
    EnsembleSummary s;
    s.regime = e.regime;
    s.tau = e.tau;
    s.n_paths = e.paths.size();
    s.n_stopped = e.n_stopped();
    for (std::size_t k = 0; k < e.tau.size(); ++k) {
        const auto cv = stats::covariance(checkpoint_V(e, k));
        const auto cq = stats::covariance(checkpoint_Q(e, k));
        s.mean_V.push_back(cv.mean);
        s.se_mean_V.push_back(cv.se_mean);
        s.cov_V.push_back(cv.cov);
        s.se_cov_V.push_back(cv.se);
        s.kurtosis_V.push_back(cv.kurtosis);
        s.mean_Q.push_back(cq.mean);
        s.se_mean_Q.push_back(cq.se_mean);
        s.cov_Q.push_back(cq.cov);
        s.se_cov_Q.push_back(cq.se);
        s.kurtosis_Q.push_back(cq.kurtosis);
        std::size_t frozen = 0;
        for (const auto& p : e.paths)
            frozen += p.frozen.at(k) ? 1 : 0;
        s.stopped.push_back(frozen);
    }
    return s;
}

/// `n` equally spaced checkpoints c/n, 2c/n, ..., c, optionally preceded by
/// an early one at early_fraction * c.
inline std::vector<double> default_checkpoints(double c, int n = 8, double early_fraction = 0.0)
{
    std::vector<double> t;
    if (early_fraction > 0.0)
        t.push_back(early_fraction * c);
    for (int k = 1; k <= n; ++k)
        t.push_back(c * k / n);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

struct BilliardRunConfig
{
    double M = 1e6;
    double r_disk = 0.05;
    double delta0 = 0.02;
    Vec2 Q0{0.5, 0.0};
    double chi = 0.0;     ///< thm1 only
    Vec2 u0{0.0, 1.0};    ///< thm1 only
    double c = 1.0;
    std::size_t N = 500;
    std::vector<double> checkpoints; ///< empty: default_checkpoints(c)
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    /// thm1: largest tolerated fraction of paths whose disk touches a wall.
    double max_wall_fraction = 0.01;
};

inline constexpr std::uint64_t kBilliardSalt = 0xb111a4dULL;

/// Physical time per unit tau and the velocity scale for each regime.
struct RegimeScaling
{
    double time = 1.0;     ///< t = time * tau
    double velocity = 1.0; ///< rescaled V = velocity * (V - V0)
    double position = 1.0; ///< rescaled Q = position * (Q - reference)
};

inline RegimeScaling regime_scaling(Regime regime, double M, double r_disk)
{
    switch (regime) {
    case Regime::thm1:
        return {std::sqrt(M), std::pow(M, 0.75), std::pow(M, 0.25)};
    case Regime::thm2:
        return {std::pow(M, 2.0 / 3.0), std::pow(M, 2.0 / 3.0), 1.0};
    case Regime::thm3:
        return {std::pow(r_disk, -1.0 / 3.0) * std::pow(M, 2.0 / 3.0),
                std::pow(r_disk, -1.0 / 3.0) * std::pow(M, 2.0 / 3.0), 1.0};
    }
    return {};
}

namespace detail
{

inline Ensemble run_billiard_ensemble(Regime regime, const BilliardRunConfig& cfg, const TorusTable& table)
{
    if (cfg.N < 1)
        throw ArgumentError("N must be >= 1");
    if (!(cfg.c > 0.0))
        throw ArgumentError("c must be > 0");
    if (!(cfg.M >= 1.0))
        throw ArgumentError("M must be >= 1");
    const bool infinite = std::isinf(cfg.M);
    const RegimeScaling sc = infinite ? RegimeScaling{1.0, 0.0, 1.0} : regime_scaling(regime, cfg.M, cfg.r_disk);
    const double T = infinite ? cfg.c : sc.time * cfg.c;

    SimParams p;
    p.M = cfg.M;
    p.r = cfg.r_disk;
    p.delta0 = cfg.delta0;
    p.mode = regime == Regime::thm1 ? DiskMode::free : DiskMode::stopped;
    p.horizon_time = T;
    p.seed = cfg.seed;
    p.validate();

    Vec2 V0;
    if (regime == Regime::thm1) {
        if (!(cfg.chi >= 0.0 && cfg.chi < 1.0))
            throw ArgumentError("chi must lie in [0, 1)");
        if (infinite && cfg.chi != 0.0)
            throw ArgumentError("an infinitely heavy disk cannot move");
        V0 = infinite ? Vec2{} : cfg.chi * normalized(cfg.u0) / std::sqrt(cfg.M);
    }

    Ensemble ens;
    ens.regime = regime;
    ens.tau = cfg.checkpoints.empty() ? default_checkpoints(cfg.c) : cfg.checkpoints;
    ens.paths.resize(cfg.N);
    ens.collisions.assign(cfg.N, 0);
    ens.active_time.assign(cfg.N, 0.0);
    std::vector<char> wall(cfg.N, 0);

    ObservationPlan plan;
    for (double tau : ens.tau)
        plan.sample_times.push_back(infinite ? tau : sc.time * tau);

    parallel_for(cfg.N, cfg.workers, [&](std::size_t i) {
        Rng rng = Rng::stream(cfg.seed, i, kBilliardSalt);
        const SystemState s0 = sample_initial_state(cfg.Q0, V0, p, table, rng);
        const Trajectory tr = evolve(s0, p, table, plan);
        PathSamples& out = ens.paths[i];
        const std::size_t nc = ens.tau.size();
        out.V.assign(nc, Vec2{});
        out.Q.assign(nc, Vec2{});
        out.frozen.assign(nc, 0);
        for (std::size_t k = 0; k < tr.samples.size() && k < nc; ++k) {
            const auto& row = tr.samples[k];
            const double t = row.t;
            if (regime == Regime::thm1) {
                out.V[k] = sc.velocity * (row.V - V0);
                out.Q[k] = sc.position * (row.Q - cfg.Q0 - t * V0);
            } else {
                out.V[k] = sc.velocity * row.V;
                out.Q[k] = row.Q;
            }
            out.frozen[k] = row.frozen;
        }
        out.stopped = tr.stop_time.has_value();
        out.stop_time = tr.stop_time ? *tr.stop_time / (infinite ? 1.0 : sc.time) : 0.0;
        ens.collisions[i] = tr.final_state.n_collisions;
        ens.active_time[i] = tr.final_state.t;
        wall[i] = tr.wall_contact;
        if (tr.wall_contact) {
            // samples after the contact are not available; hold the last state
            for (std::size_t k = tr.samples.size(); k < nc; ++k) {
                out.V[k] = k > 0 ? out.V[k - 1] : Vec2{};
                out.Q[k] = k > 0 ? out.Q[k - 1] : Vec2{};
            }
        }
    });
    ens.wall_contacts = static_cast<std::size_t>(std::count(wall.begin(), wall.end(), 1));
    return ens;
}

} // namespace detail

struct ThmRun
{
    Ensemble ensemble;
    EnsembleSummary summary;
};

/// Free-mode ensemble with V0 = chi u0 / sqrt(M), rescaled by tau = t / sqrt(M),
/// V -> M^{3/4}(V - V0), Q -> M^{1/4}(Q - Q0 - t V0).
inline ThmRun run_thm1(const BilliardRunConfig& cfg, const TorusTable& table)
{
    if (cfg.N < 50)
        throw ArgumentError("thm1 runs need N >= 50");
    ThmRun run;
    run.ensemble = detail::run_billiard_ensemble(Regime::thm1, cfg, table);
    const double frac = static_cast<double>(run.ensemble.wall_contacts) / static_cast<double>(cfg.N);
    if (frac > cfg.max_wall_fraction)
        throw ConfigurationError("disk reached a wall before the horizon in " +
                                 std::to_string(run.ensemble.wall_contacts) + " of " +
                                 std::to_string(cfg.N) + " paths; c is too large");
    run.summary = summarize(run.ensemble);
    return run;
}

/// Stopped-mode ensemble from V0 = 0, tau = t M^{-2/3}, V -> M^{2/3} V.
inline ThmRun run_thm2(const BilliardRunConfig& cfg, const TorusTable& table)
{
    ThmRun run;
    run.ensemble = detail::run_billiard_ensemble(Regime::thm2, cfg, table);
    run.summary = summarize(run.ensemble);
    return run;
}

/// Stopped-mode ensemble from V0 = 0, tau = t r^{1/3} M^{-2/3},
/// V -> r^{-1/3} M^{2/3} V.
inline ThmRun run_thm3(const BilliardRunConfig& cfg, const TorusTable& table)
{
    if (!(cfg.r_disk > 0.0))
        throw ArgumentError("thm3 needs r_disk > 0");
    ThmRun run;
    run.ensemble = detail::run_billiard_ensemble(Regime::thm3, cfg, table);
    run.summary = summarize(run.ensemble);
    return run;
}

/// Average collision rate per unit physical time over the simulated
/// (unfrozen) portions of all paths.
inline double collision_rate(const Ensemble& e)
{
    double n = 0.0, t = 0.0;
    for (std::size_t i = 0; i < e.collisions.size(); ++i) {
        n += static_cast<double>(e.collisions[i]);
        t += e.active_time[i];
    }
    return t > 0.0 ? n / t : 0.0;
}

/// 99th percentile over paths of max_k ||V(tau_{k+1}) - V(tau_k)||.
inline double tightness_proxy(const Ensemble& e)
{
    std::vector<double> m;
    m.reserve(e.paths.size());
    for (const auto& p : e.paths) {
        double best = 0.0;
        for (std::size_t k = 1; k < p.V.size(); ++k)
            best = std::max(best, norm(p.V[k] - p.V[k - 1]));
        m.push_back(best);
    }
    if (m.empty())
        return 0.0;
    std::sort(m.begin(), m.end());
    const std::size_t idx = std::min(m.size() - 1, static_cast<std::size_t>(std::ceil(0.99 * m.size())) - 1);
    return m[idx];
}

/// Green-Kubo sigma^2 at `nodes` points along Q0 + s chi u0, s in [0, c],
/// as a field for analytic_cov_thm1.
inline SigmaField thm1_sigma_line(Vec2 Q0, double chi, Vec2 u0, double c, int nodes,
                                  const TorusTable& table, double r_disk, const GkConfig& gk)
{
    if (nodes < 2)
        throw ArgumentError("need at least two nodes along the reference motion");
    const Vec2 d = chi * normalized(u0);
    std::vector<double> s(static_cast<std::size_t>(nodes));
    std::vector<Mat2> values(s.size());
    for (int k = 0; k < nodes; ++k)
        s[static_cast<std::size_t>(k)] = c * k / (nodes - 1);
    parallel_for(s.size(), gk.workers, [&](std::size_t k) {
        values[k] = evaluate_sigma_node(wrap_point(Q0 + s[k] * d), table, r_disk, gk, k).sigma2;
    });
    if (chi == 0.0)
        return SigmaField::constant(values.front());
    return SigmaField::line(Q0, d, std::move(s), std::move(values));
}

// ---------------------------------------------------------------------------
// Ensemble comparison
// ---------------------------------------------------------------------------

struct CompareOptions
{
    double alpha = 0.01;          ///< overall significance level
    bool bonferroni = true;       ///< split alpha over all tests
    double cov_rel_tol = 0.25;    ///< Frobenius relative error threshold on covariances
    bool check_means = true;
    bool check_cov = true;
    bool check_kurtosis = true;
    bool check_ks = true;
    bool check_stopped = true;
};

struct CheckpointComparison
{
    double tau = 0.0;
    double max_mean_z = 0.0;     ///< over the four components
    double max_cov_z = 0.0;      ///< over the six distinct entries
    double cov_rel_V = 0.0;
    double cov_rel_Q = 0.0;
    double cov_rel_se_V = 0.0;
    double cov_rel_se_Q = 0.0;
    double max_kurtosis_z = 0.0;
    double ks[4] = {0, 0, 0, 0}; ///< Vx, Vy, Qx, Qy
    double ks_critical = 0.0;
    double stopped_z = 0.0;
    bool pass = true;
};

struct ComparisonReport
{
    std::vector<CheckpointComparison> checkpoints;
    double z_critical = 0.0;
    double test_alpha = 0.0;     ///< per-test level after any correction
    bool means_pass = true;
    bool cov_pass = true;
    bool kurtosis_pass = true;
    bool ks_pass = true;
    bool stopped_pass = true;
    bool pass = true;
};

namespace detail
{

inline std::vector<double> component(const Ensemble& e, std::size_t k, int which)
{
    std::vector<double> out;
    out.reserve(e.paths.size());
    for (const auto& p : e.paths) {
        const Vec2 x = which < 2 ? p.V[k] : p.Q[k];
        out.push_back((which % 2) == 0 ? x.x : x.y);
    }
    return out;
}

inline double zdiff(double a, double b, double se_a, double se_b)
{
    const double se = std::hypot(se_a, se_b);
    if (se == 0.0)
        return a == b ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(a - b) / se;
}

inline double frob_rel(const Mat2& a, const Mat2& b)
{
    const double nb = frobenius(b);
    if (nb == 0.0)
        return frobenius(a) == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return frobenius(a - b) / nb;
}

} // namespace detail

/// Two-sample comparison of ensembles on matching checkpoint grids; `b`
/// is the reference for relative covariance errors.
inline ComparisonReport compare_ensembles(const Ensemble& a, const Ensemble& b, const CompareOptions& o = {})
{
    if (a.tau.size() != b.tau.size())
        throw ArgumentError("ensembles have different checkpoint grids");
    for (std::size_t k = 0; k < a.tau.size(); ++k)
        if (std::abs(a.tau[k] - b.tau[k]) > 1e-12 * std::max(1.0, std::abs(a.tau[k])))
            throw ArgumentError("ensembles have different checkpoint grids");
    if (a.paths.size() < 2 || b.paths.size() < 2)
        throw ArgumentError("ensembles need at least two paths");

    const EnsembleSummary sa = summarize(a), sb = summarize(b);
    const std::size_t nc = a.tau.size();
    int n_tests = 0;
    if (o.check_means)
        n_tests += 4 * static_cast<int>(nc);
    if (o.check_cov)
        n_tests += 6 * static_cast<int>(nc);
    if (o.check_kurtosis)
        n_tests += 4 * static_cast<int>(nc);
    if (o.check_ks)
        n_tests += 4 * static_cast<int>(nc);
    if (o.check_stopped)
        n_tests += static_cast<int>(nc);
    ComparisonReport rep;
    rep.test_alpha = o.bonferroni && n_tests > 0 ? o.alpha / n_tests : o.alpha;
    rep.z_critical = stats::z_critical(rep.test_alpha);
    const double na = static_cast<double>(a.paths.size()), nb = static_cast<double>(b.paths.size());
    const double kurt_se = std::sqrt(24.0 / na + 24.0 / nb);

    for (std::size_t k = 0; k < nc; ++k) {
        CheckpointComparison c;
        c.tau = a.tau[k];
        const Vec2 ma[2] = {sa.mean_V[k], sa.mean_Q[k]}, mb[2] = {sb.mean_V[k], sb.mean_Q[k]};
        const Vec2 ea[2] = {sa.se_mean_V[k], sa.se_mean_Q[k]}, eb[2] = {sb.se_mean_V[k], sb.se_mean_Q[k]};
        for (int i = 0; i < 2; ++i) {
            c.max_mean_z = std::max({c.max_mean_z, detail::zdiff(ma[i].x, mb[i].x, ea[i].x, eb[i].x),
                                     detail::zdiff(ma[i].y, mb[i].y, ea[i].y, eb[i].y)});
        }
        const Mat2 ca[2] = {sa.cov_V[k], sa.cov_Q[k]}, cb[2] = {sb.cov_V[k], sb.cov_Q[k]};
        const Mat2 sea[2] = {sa.se_cov_V[k], sa.se_cov_Q[k]}, seb[2] = {sb.se_cov_V[k], sb.se_cov_Q[k]};
        for (int i = 0; i < 2; ++i) {
            c.max_cov_z = std::max({c.max_cov_z, detail::zdiff(ca[i].a, cb[i].a, sea[i].a, seb[i].a),
                                    detail::zdiff(ca[i].b, cb[i].b, sea[i].b, seb[i].b),
                                    detail::zdiff(ca[i].d, cb[i].d, sea[i].d, seb[i].d)});
        }
        c.cov_rel_V = detail::frob_rel(ca[0], cb[0]);
        c.cov_rel_Q = detail::frob_rel(ca[1], cb[1]);
        const auto rel_se = [](const Mat2& se_a, const Mat2& se_b, const Mat2& ref) {
            const double n = frobenius(ref);
            return n == 0.0 ? 0.0 : std::hypot(frobenius(se_a), frobenius(se_b)) / n;
        };
        c.cov_rel_se_V = rel_se(sea[0], seb[0], cb[0]);
        c.cov_rel_se_Q = rel_se(sea[1], seb[1], cb[1]);
        const Vec2 ka[2] = {sa.kurtosis_V[k], sa.kurtosis_Q[k]}, kb[2] = {sb.kurtosis_V[k], sb.kurtosis_Q[k]};
        for (int i = 0; i < 2; ++i)
            c.max_kurtosis_z = std::max({c.max_kurtosis_z, std::abs(ka[i].x - kb[i].x) / kurt_se,
                                         std::abs(ka[i].y - kb[i].y) / kurt_se});
        if (o.check_ks)
            for (int w = 0; w < 4; ++w)
                c.ks[w] = stats::ks_statistic(detail::component(a, k, w), detail::component(b, k, w));
        c.ks_critical = stats::ks_critical(rep.test_alpha, a.paths.size(), b.paths.size());
        c.stopped_z = std::abs(stats::two_proportion_z(sa.stopped[k], a.paths.size(), sb.stopped[k], b.paths.size()));

        const bool mean_ok = !o.check_means || c.max_mean_z <= rep.z_critical;
        const bool cov_ok = !o.check_cov || (c.max_cov_z <= rep.z_critical &&
                                             c.cov_rel_V <= o.cov_rel_tol && c.cov_rel_Q <= o.cov_rel_tol);
        const bool kurt_ok = !o.check_kurtosis || c.max_kurtosis_z <= rep.z_critical;
        bool ks_ok = true;
        if (o.check_ks)
            for (double d : c.ks)
                ks_ok = ks_ok && d <= c.ks_critical;
        const bool stop_ok = !o.check_stopped || c.stopped_z <= rep.z_critical;
        rep.means_pass = rep.means_pass && mean_ok;
        rep.cov_pass = rep.cov_pass && cov_ok;
        rep.kurtosis_pass = rep.kurtosis_pass && kurt_ok;
        rep.ks_pass = rep.ks_pass && ks_ok;
        rep.stopped_pass = rep.stopped_pass && stop_ok;
        c.pass = mean_ok && cov_ok && kurt_ok && ks_ok && stop_ok;
        rep.checkpoints.push_back(c);
    }
    rep.pass = rep.means_pass && rep.cov_pass && rep.kurtosis_pass && rep.ks_pass && rep.stopped_pass;
    return rep;
}

} // namespace bbm

#endif // BBM_HARNESS_HPP
