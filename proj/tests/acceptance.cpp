// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "bbm/bbm.hpp"

using namespace bbm;

namespace
{

// Tolerances. These are part of the acceptance contract and must not be edited
// to make a run pass.
constexpr double kEnergyShellTol = 1e-10;
constexpr double kConservationTol = 1e-10;
constexpr double kReversalTol = 1e-6;
constexpr int kReversalCollisions = 12;
constexpr std::uint64_t kExactLawCollisions = 1'000'000;
constexpr std::uint64_t kMfpCollisions = 10'000'000;
constexpr double kSeMultiple = 3.0;
constexpr std::size_t kInvarianceSamples = 1'000'000;
constexpr double kKsAlpha = 0.01;
constexpr double kSmallRDeviationMax = 0.25;
constexpr double kLyapunovAgreement = 0.02;
constexpr std::uint64_t kLyapunovCollisions = 1'000'000;
constexpr double kThm1CovVTol = 0.15;
constexpr double kThm1CovQTol = 0.20;
constexpr double kThm2EarlyTol = 0.20;
constexpr double kThm3VarTol = 0.20;
constexpr double kDeskM = 1e6;
constexpr std::size_t kDeskN = 500;
constexpr std::size_t kSdeSelfTestN = 10'000;

const TorusTable& table() {
    static const TorusTable t = TorusTable::default_table();
    return t;
}

const Vec2 kQ0{0.5, 0.0};

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string f(double x, int prec = 5) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    return buf;
}

double kurtosis_bound(std::size_t n) { return 3.0 * std::sqrt(24.0 / static_cast<double>(n)); }

double rel_frob(const Mat2& a, const Mat2& ref) { return frobenius(a - ref) / frobenius(ref); }

std::size_t index_of(const std::vector<double>& tau, double t) {
    for (std::size_t k = 0; k < tau.size(); ++k)
        if (std::abs(tau[k] - t) < 1e-12)
            return k;
    throw ContractViolation("checkpoint missing");
}

// 1. exact collision laws
Outcome exact_laws()
{
    SimParams p;
    p.M = 1e4;
    p.r = 0.05;
    p.mode = DiskMode::free;
    p.max_collisions = 100'000;
    CollisionAudit audit;
    std::uint64_t total = 0;
    for (std::uint64_t path = 0; total < kExactLawCollisions; ++path) {
        Rng rng = Rng::stream(101, path);
        const auto s0 = sample_initial_state(kQ0, {0.004, -0.003}, p, table(), rng);
        const auto tr = evolve(s0, p, table());
        audit.merge(tr.audit);
        total += tr.final_state.n_collisions;
    }

    SimParams q;
    q.M = 100.0;
    q.r = 0.05;
    q.mode = DiskMode::free;
    double worst_reversal = 0.0;
    int reversal_runs = 0;
    std::vector<double> reversal_devs;
    for (std::uint64_t run = 0; reversal_runs < 20; ++run) {
        Rng rng = Rng::stream(102, run);
        SimParams a = q;
        a.max_collisions = kReversalCollisions;
        const auto s0 = sample_initial_state(kQ0, {0.003, -0.002}, a, table(), rng);
        const auto first = evolve(s0, a, table());
        if (first.wall_contact)
            continue;
        SimParams b = q;
        b.horizon_time = first.final_state.t + 10.0;
        const auto next = next_event(first.final_state, b, table());
        if (next.kind == EventKind::disk_wall)
            continue;
        b.horizon_time = 0.5 * (first.final_state.t + next.time);
        const auto fwd = evolve(s0, b, table());
        SystemState back = reversed(fwd.final_state);
        back.t = 0.0;
        back.n_collisions = 0;
        const auto bwd = evolve(back, b, table());
        const SystemState r = reversed(bwd.final_state);
        const double dev = std::max({norm(torus_displacement(r.q, s0.q)), norm(r.v - s0.v),
                                     norm(r.Q - s0.Q), norm(r.V - s0.V)});
        worst_reversal = std::max(worst_reversal, dev);
        reversal_devs.push_back(dev);
        ++reversal_runs;
    }

    std::sort(reversal_devs.begin(), reversal_devs.end());
    const auto within = std::count_if(reversal_devs.begin(), reversal_devs.end(),
                                      [](double d) { return d <= kReversalTol; });
    Outcome o;
    o.pass = total >= kExactLawCollisions && audit.max_energy_error <= kEnergyShellTol &&
             audit.max_normal_momentum_error <= kConservationTol &&
             audit.max_kinetic_energy_error <= kConservationTol && audit.bound_violations == 0 &&
             worst_reversal <= kReversalTol;
    o.detail = "collisions=" + std::to_string(total) + " interparticle=" +
               std::to_string(audit.particle_disk_events) + " max|E-1|=" + f(audit.max_energy_error) +
               " max_momentum_err=" + f(audit.max_normal_momentum_error) +
               " max_ke_err=" + f(audit.max_kinetic_energy_error) +
               " bound_violations=" + std::to_string(audit.bound_violations) +
               " max_speed_jump/bound=" + f(audit.max_speed_jump_ratio) +
               " max_V_jump/bound=" + f(audit.max_velocity_jump_ratio) +
               " reversal median=" + f(reversal_devs[reversal_devs.size() / 2]) + " worst=" + f(worst_reversal) +
               " within tol " + std::to_string(within) + "/" + std::to_string(reversal_runs);
    return o;
}

// 2. mean free path
Outcome santalo()
{
    Rng rng = Rng::stream(201, 0);
    const auto est = empirical_mfp(kQ0, table(), 0.05, kMfpCollisions, rng);
    const double L = mean_free_path(table(), 0.05);
    Outcome o;
    o.pass = std::abs(est.mean - L) <= kSeMultiple * est.stderr && std::abs(L - 0.357961) < 5e-6;
    o.detail = "empirical=" + f(est.mean, 7) + " +- " + f(est.stderr, 3) + " formula=" + f(L, 7) +
               " z=" + f((est.mean - L) / est.stderr, 3);
    return o;
}

// 3. invariance of mu_Q under the collision map
Outcome measure_invariance()
{
    const FrozenBilliard bil(table(), kQ0, 0.05);
    Rng rng = Rng::stream(301, 0);
    std::vector<double> ref_r, ref_phi;
    ref_r.reserve(kInvarianceSamples);
    ref_phi.reserve(kInvarianceSamples);
    for (std::size_t k = 0; k < kInvarianceSamples; ++k) {
        const auto x = bil.sample(rng);
        ref_r.push_back(bil.global_arclength(x));
        ref_phi.push_back(x.phi);
    }
    const double crit = stats::ks_critical(kKsAlpha, kInvarianceSamples, kInvarianceSamples);
    bool pass = true;
    std::string detail = "ks_critical=" + f(crit, 4);
    for (int steps : {1, 10}) {
        std::vector<double> r, phi;
        r.reserve(kInvarianceSamples);
        phi.reserve(kInvarianceSamples);
        for (std::size_t k = 0; k < kInvarianceSamples; ++k) {
            BilliardState st = bil.to_state(bil.sample(rng));
            for (int s = 0; s < steps; ++s)
                bil.step(st);
            const auto x = bil.to_coord(st);
            r.push_back(bil.global_arclength(x));
            phi.push_back(x.phi);
        }
        const double dr = stats::ks_statistic(r, ref_r), dphi = stats::ks_statistic(phi, ref_phi);
        pass = pass && dr <= crit && dphi <= crit;
        detail += " F^" + std::to_string(steps) + ": D_r=" + f(dr, 4) + " D_phi=" + f(dphi, 4);
    }
    return {pass, detail};
}

// 4. Green-Kubo lag 0, symmetry, PSD and decay
Outcome green_kubo_lag0()
{
    Rng rng = Rng::stream(401, 0);
    const auto dm = green_kubo(kQ0, table(), 0.05, 4'000'000, 20, rng);
    const Mat2 c0 = lag0_closed_form(table(), 0.05);
    const Mat2& e = dm.per_lag[0];
    const Mat2& se = dm.per_lag_stderr[0];
    const bool lag0 = std::abs(e.a - c0.a) <= kSeMultiple * se.a && std::abs(e.d - c0.d) <= kSeMultiple * se.d &&
                      std::abs(e.b) <= kSeMultiple * se.b && std::abs(c0.a - 0.10929) < 5e-6;
    const bool symmetric = dm.m.b == dm.m.c;
    const double lmin = min_eigenvalue(dm.m);
    const bool psd = lmin >= -kSeMultiple * dm.max_stderr();
    const auto decay = correlation_decay(dm);
    Outcome o;
    o.pass = lag0 && symmetric && psd && decay.significant_negative;
    o.detail = "C0=(" + f(e.a) + "," + f(e.b) + "," + f(e.d) + ") se=(" + f(se.a, 2) + "," + f(se.b, 2) + "," +
               f(se.d, 2) + ") closed_form=" + f(c0.a) + " sigma_bar^2=(" + f(dm.m.a) + "," + f(dm.m.b) + "," +
               f(dm.m.d) + ") lambda_min=" + f(lmin) + " decay_slope=" + f(decay.fit.slope, 3) + " +- " +
               f(decay.fit.slope_se, 2) + " points=" + std::to_string(decay.points);
    return o;
}

// 5. small-r asymptote of sigma^2_Q
Outcome small_r()
{
    const double rs[3] = {0.04, 0.02, 0.01};
    double dev[3], dev_se[3];
    std::string detail;
    for (int i = 0; i < 3; ++i) {
        Rng rng = Rng::stream(501, static_cast<std::uint64_t>(i));
        const auto dm = green_kubo(kQ0, table(), rs[i], 20'000'000, 20, rng);
        const auto pieces = sigma_pieces(dm, table(), rs[i], {}, kDeskM);
        const Mat2 a = small_r_asymptote(table(), rs[i]).m;
        dev[i] = rel_frob(pieces.sigma2, a);
        dev_se[i] = frobenius(pieces.sigma2_stderr) / frobenius(a);
        const Mat2 ratio = pieces.sigma2 / a.a;
        detail += "r=" + f(rs[i], 2) + ": ratio=(" + f(ratio.a, 4) + "," + f(ratio.b, 3) + "," + f(ratio.d, 4) +
                  ") dev=" + f(dev[i], 3) + "+-" + f(dev_se[i], 2) + " ";
    }
    bool monotone = true;
    for (int i = 1; i < 3; ++i)
        monotone = monotone && dev[i] <= dev[i - 1] + 2.0 * std::hypot(dev_se[i], dev_se[i - 1]);
    Outcome o;
    o.pass = monotone && dev[2] <= kSmallRDeviationMax;
    o.detail = detail + (monotone ? "monotone" : "NOT monotone");
    return o;
}

// 6. Lyapunov exponent
Outcome lyapunov()
{
    Rng a = Rng::stream(601, 0), b = Rng::stream(601, 1);
    const auto cocycle = lyapunov_exponent(kQ0, table(), 0.05, kLyapunovCollisions, a);
    const auto sep = lyapunov_separation(kQ0, table(), 0.05, kLyapunovCollisions, b);
    const double bound = std::log(1.0 + cocycle.min_free_path * table().min_curvature());
    const double rel = std::abs(cocycle.chi / sep.chi - 1.0);
    Outcome o;
    o.pass = cocycle.chi > 0.0 && cocycle.chi >= bound && rel <= kLyapunovAgreement;
    o.detail = "cocycle=" + f(cocycle.chi, 6) + "+-" + f(cocycle.stderr, 2) + " separation=" + f(sep.chi, 6) +
               "+-" + f(sep.stderr, 2) + " rel_diff=" + f(rel, 3) + " lower_bound=" + f(bound, 4) +
               " L_min=" + f(cocycle.min_free_path, 4) + " skipped=" + std::to_string(cocycle.skipped);
    return o;
}

// 7. thm1 desk-scale
Outcome thm1()
{
    const double chi = 0.5, c = 0.4, r = 0.05;
    const Vec2 u0{0.0, 1.0};
    GkConfig gk;
    gk.n_collisions = 4'000'000;
    gk.J = 20;
    gk.seed = 701;
    LimitParams lp;
    lp.regime = Regime::thm1;
    lp.chi = chi;
    lp.u0 = u0;
    lp.Q0 = kQ0;
    lp.c = c;
    lp.sigma_field = thm1_sigma_line(kQ0, chi, u0, c, 9, table(), r, gk);
    lp.table = &table();
    lp.stop_clearance = r;

    BilliardRunConfig cfg;
    cfg.M = kDeskM;
    cfg.r_disk = r;
    cfg.Q0 = kQ0;
    cfg.chi = chi;
    cfg.u0 = u0;
    cfg.c = c;
    cfg.N = kDeskN;
    cfg.checkpoints = default_checkpoints(c);
    cfg.seed = 702;
    const auto run = run_thm1(cfg, table());
    const auto& s = run.summary;

    bool means = true;
    double worst_mean_z = 0.0;
    for (std::size_t k = 0; k < s.tau.size(); ++k) {
        const double zx = std::abs(s.mean_V[k].x) / s.se_mean_V[k].x;
        const double zy = std::abs(s.mean_V[k].y) / s.se_mean_V[k].y;
        worst_mean_z = std::max({worst_mean_z, zx, zy});
    }
    means = worst_mean_z <= kSeMultiple;

    const std::size_t k = index_of(s.tau, c / 2);
    const auto cov = analytic_cov_thm1(lp, c / 2);
    const double relV = rel_frob(s.cov_V[k], cov.CovV);
    const double relQ = rel_frob(s.cov_Q[k], cov.CovQ);
    const double kb = kurtosis_bound(kDeskN);
    const double kurt = std::max(std::abs(s.kurtosis_V[k].x), std::abs(s.kurtosis_V[k].y));
    Outcome o;
    o.pass = means && relV <= kThm1CovVTol && relQ <= kThm1CovQTol && kurt <= kb;
    o.detail = "max|mean V|/SE=" + f(worst_mean_z, 3) + " tau=c/2: covV=(" + f(s.cov_V[k].a, 4) + "," +
               f(s.cov_V[k].b, 3) + "," + f(s.cov_V[k].d, 4) + ") quad=(" + f(cov.CovV.a, 4) + "," +
               f(cov.CovV.b, 3) + "," + f(cov.CovV.d, 4) + ") relV=" + f(relV, 3) + " relQ=" + f(relQ, 3) +
               " max|kurt|=" + f(kurt, 3) + " bound=" + f(kb, 3) +
               " wall_contacts=" + std::to_string(run.ensemble.wall_contacts);
    return o;
}

// 8. thm2 desk-scale
Outcome thm2()
{
    const double r = 0.05, delta0 = 0.02, c = 0.5;
    const auto tau = default_checkpoints(c, 8, 0.1);

    BilliardRunConfig cfg;
    cfg.M = kDeskM;
    cfg.r_disk = r;
    cfg.delta0 = delta0;
    cfg.Q0 = kQ0;
    cfg.c = c;
    cfg.N = kDeskN;
    cfg.checkpoints = tau;
    cfg.seed = 801;
    const auto run = run_thm2(cfg, table());

    // early-time covariance against sigma^2 at Q0
    Rng rng = Rng::stream(802, 0);
    const auto dm = green_kubo(kQ0, table(), r, 10'000'000, 20, rng);
    const Mat2 sigma2_Q0 = sigma_pieces(dm, table(), r, {}, kDeskM).sigma2;
    const std::size_t ke = index_of(tau, 0.1 * c);
    const double rel_early = rel_frob(run.summary.cov_V[ke], sigma2_Q0 * tau[ke]);

    // limit ensemble driven by a Green-Kubo sigma grid over the reachable region
    GkConfig gk;
    gk.n_collisions = 400'000;
    gk.J = 20;
    gk.seed = 803;
    const GridSpec spec = reachable_grid(kQ0, table(), r + delta0, 0.02);
    auto grid = std::make_shared<const SigmaGrid>(build_sigma_grid(spec, table(), r, gk));
    LimitParams lp;
    lp.regime = Regime::thm2;
    lp.Q0 = kQ0;
    lp.c = c;
    lp.sigma_field = SigmaField::grid(grid);
    lp.table = &table();
    lp.stop_clearance = r + delta0;
    lp.h = 1e-3 * c;
    lp.N = 2000;
    lp.seed = 804;
    lp.checkpoints = tau;
    const Ensemble limit = simulate_limit(lp);

    CompareOptions opts;
    opts.alpha = kKsAlpha;
    opts.check_means = false;
    opts.check_cov = false;
    opts.check_kurtosis = false;
    opts.check_ks = true;
    opts.check_stopped = true;
    const auto rep = compare_ensembles(run.ensemble, limit, opts);
    double worst_ks_ratio = 0.0, worst_stop_z = 0.0;
    for (const auto& cp : rep.checkpoints) {
        for (double d : cp.ks)
            worst_ks_ratio = std::max(worst_ks_ratio, d / cp.ks_critical);
        worst_stop_z = std::max(worst_stop_z, cp.stopped_z);
    }
    Outcome o;
    o.pass = rel_early <= kThm2EarlyTol && rep.ks_pass && rep.stopped_pass;
    o.detail = "early rel=" + f(rel_early, 3) + " (covV=(" + f(run.summary.cov_V[ke].a, 4) + "," +
               f(run.summary.cov_V[ke].d, 4) + ") pred=(" + f(sigma2_Q0.a * tau[ke], 4) + "," +
               f(sigma2_Q0.d * tau[ke], 4) + ")) grid=" + std::to_string(spec.nx) + "x" + std::to_string(spec.ny) +
               " worst KS/crit=" + f(worst_ks_ratio, 3) + " worst stop z=" + f(worst_stop_z, 3) +
               " z_crit=" + f(rep.z_critical, 3) + " stopped billiard=" + std::to_string(run.ensemble.n_stopped()) +
               "/" + std::to_string(kDeskN) + " limit=" + std::to_string(limit.n_stopped()) + "/" +
               std::to_string(lp.N);
    return o;
}

// 9. thm3 desk-scale
Outcome thm3()
{
    const double r = 0.01, c = 0.1;
    BilliardRunConfig cfg;
    cfg.M = kDeskM;
    cfg.r_disk = r;
    cfg.delta0 = 0.02;
    cfg.Q0 = kQ0;
    cfg.c = c;
    cfg.N = kDeskN;
    cfg.checkpoints = default_checkpoints(c);
    cfg.seed = 901;
    const auto run = run_thm3(cfg, table());
    const auto& s = run.summary;
    const std::size_t k = index_of(s.tau, c / 2);
    const double pred = sigma0_squared(table()) * s.tau[k];
    const double relx = std::abs(s.cov_V[k].a / pred - 1.0), rely = std::abs(s.cov_V[k].d / pred - 1.0);
    const double cross_z = std::abs(s.cov_V[k].b) / s.se_cov_V[k].b;
    const double kb = kurtosis_bound(kDeskN);
    const double kurt = std::max(std::abs(s.kurtosis_V[k].x), std::abs(s.kurtosis_V[k].y));
    Outcome o;
    o.pass = relx <= kThm3VarTol && rely <= kThm3VarTol && cross_z <= kSeMultiple && kurt <= kb;
    o.detail = "tau=c/2: Var=(" + f(s.cov_V[k].a, 4) + "," + f(s.cov_V[k].d, 4) + ") pred=" + f(pred, 4) +
               " rel=(" + f(relx, 3) + "," + f(rely, 3) + ") cross/SE=" + f(cross_z, 3) + " max|kurt|=" +
               f(kurt, 3) + " bound=" + f(kb, 3) + " stopped=" + std::to_string(run.ensemble.n_stopped());
    return o;
}

// 10. SDE integrator self-test
Outcome sde_self_test()
{
    LimitParams p;
    p.regime = Regime::thm2;
    p.Q0 = kQ0;
    p.c = 1.0;
    p.sigma_field = SigmaField::constant(Mat2::identity());
    p.h = 2e-3;
    p.noise_refinement = 1;
    p.N = kSdeSelfTestN;
    p.seed = 1001;
    p.checkpoints = {0.5, 1.0};
    LimitParams fine = p;
    fine.h = 1e-3;
    fine.noise_refinement = 0;
    const auto a = summarize(simulate_limit(p));
    const auto b = summarize(simulate_limit(fine));
    bool pass = true;
    double worst_z = 0.0, worst_shift = 0.0;
    for (std::size_t k = 0; k < p.checkpoints.size(); ++k) {
        const double tau = p.checkpoints[k];
        for (const auto* s : {&a, &b}) {
            const Mat2& cv = s->cov_V[k];
            const Mat2& cq = s->cov_Q[k];
            const Mat2& ev = s->se_cov_V[k];
            const Mat2& eq = s->se_cov_Q[k];
            worst_z = std::max({worst_z, std::abs(cv.a - tau) / ev.a, std::abs(cv.d - tau) / ev.d,
                                std::abs(cq.a - tau * tau * tau / 3) / eq.a,
                                std::abs(cq.d - tau * tau * tau / 3) / eq.d});
        }
        worst_shift = std::max({worst_shift, std::abs(a.cov_V[k].a - b.cov_V[k].a) / b.se_cov_V[k].a,
                                std::abs(a.cov_V[k].d - b.cov_V[k].d) / b.se_cov_V[k].d,
                                std::abs(a.cov_Q[k].a - b.cov_Q[k].a) / b.se_cov_Q[k].a,
                                std::abs(a.cov_Q[k].d - b.cov_Q[k].d) / b.se_cov_Q[k].d});
    }
    pass = worst_z <= kSeMultiple && worst_shift < 1.0;
    return {pass, "max |Var - exact|/SE=" + f(worst_z, 3) + " max shift(h -> h/2)/SE=" + f(worst_shift, 3)};
}

// 11. nonsingularity criterion
Outcome nonsingularity()
{
    const auto rep = nonsingularity_check(kQ0, table(), 0.05);
    const TorusTable collinear({{{0.0, 0.5}, 0.47}}, 2.0);
    const auto deg = nonsingularity_check({0.5, 0.5}, collinear, 0.01);
    std::string wit;
    if (rep.pair) {
        const auto& w1 = rep.witnesses[rep.pair->first];
        const auto& w2 = rep.witnesses[rep.pair->second];
        wit = " pair S=(" + f(w1.S.x, 3) + "," + f(w1.S.y, 3) + ") and (" + f(w2.S.x, 3) + "," + f(w2.S.y, 3) + ")";
    }
    Outcome o;
    o.pass = std::string(rep.verdict()) == "nonsingular" && rep.pair.has_value() &&
             std::string(deg.verdict()) == "inconclusive";
    o.detail = std::string("default: ") + rep.verdict() + " witnesses=" + std::to_string(rep.witnesses.size()) +
               wit + "; collinear: " + deg.verdict() + " witnesses=" + std::to_string(deg.witnesses.size());
    return o;
}

} // namespace

// Optional arguments select criteria by number; default runs all.
int main(int argc, char** argv)
{
    struct Criterion
    {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"exact collision laws", exact_laws},
        {"mean free path", santalo},
        {"measure invariance", measure_invariance},
        {"Green-Kubo lag 0 and decay", green_kubo_lag0},
        {"small-r asymptote", small_r},
        {"Lyapunov exponent", lyapunov},
        {"thm1 desk-scale", thm1},
        {"thm2 desk-scale", thm2},
        {"thm3 desk-scale", thm3},
        {"SDE integrator self-test", sde_self_test},
        {"nonsingularity criterion", nonsingularity},
    };
    int failures = 0;
    std::vector<char> selected(criteria.size(), argc < 2);
    for (int a = 1; a < argc; ++a) {
        const int k = std::atoi(argv[a]);
        if (k < 1 || k > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "unknown criterion: %s\n", argv[a]);
            return 2;
        }
        selected[static_cast<std::size_t>(k - 1)] = 1;
    }
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected[i])
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass)
            ++failures;
        std::printf("%s [%zu] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    const auto ran = static_cast<int>(std::count(selected.begin(), selected.end(), 1));
    std::printf("%d of %d criteria passed\n", ran - failures, ran);
    return failures == 0 ? 0 : 1;
}
