#ifndef BBM_LIMIT_MODELS_HPP
#define BBM_LIMIT_MODELS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "transport.hpp"
#include "vec2.hpp"

namespace bbm
{

enum class Regime
{
    thm1, ///< Gaussian process around the uniform motion Q0 + s chi u0
    thm2, ///< dQ = V dtau, dV = sigma_Q dw, stopped near the walls
    thm3, ///< sigma_0 times a stopped Brownian motion
};

inline const char* to_string(Regime r) noexcept
{
    switch (r) {
    case Regime::thm1: return "thm1";
    case Regime::thm2: return "thm2";
    case Regime::thm3: return "thm3";
    }
    return "?";
}

/// sigma^2_Q as a function of the disk position.
struct SigmaField
{
    enum class Kind { constant, isotropic, grid, line, callable };

    Kind kind = Kind::constant;
    std::function<Mat2(Vec2)> sigma2;

    static SigmaField constant(const Mat2& s2)
    {
        if (std::abs(s2.b - s2.c) > 1e-14 || min_eigenvalue(s2) < -1e-14)
            throw ArgumentError("constant sigma^2 must be symmetric PSD");
        return {Kind::constant, [s2](Vec2) { return s2; }};
    }

    /// sigma_0^2 I with sigma_0^2 = 8 / (3 Area(D)).
    static SigmaField isotropic(const TorusTable& table)
    {
        const double s0 = sigma0_squared(table);
        return {Kind::isotropic, [s0](Vec2) { return Mat2::identity() * s0; }};
    }

    static SigmaField grid(std::shared_ptr<const SigmaGrid> g)
    {
        return {Kind::grid, [g](Vec2 Q) { return g->sigma2(Q); }};
    }

    /// Values at Q0 + s_k d, linearly interpolated in s = <Q - Q0, d> / |d|^2.
    static SigmaField line(Vec2 Q0, Vec2 d, std::vector<double> s_nodes, std::vector<Mat2> values)
    {
        if (s_nodes.empty() || s_nodes.size() != values.size())
            throw ArgumentError("line sigma field needs matching nodes and values");
        if (!std::is_sorted(s_nodes.begin(), s_nodes.end()))
            throw ArgumentError("line sigma field nodes must be increasing");
        const double d2 = norm2(d);
        return {Kind::line, [=](Vec2 Q) {
                    if (s_nodes.size() == 1 || d2 == 0.0)
                        return values.front();
                    const double s = dot(Q - Q0, d) / d2;
                    const double tol = 1e-9 * std::max(1.0, s_nodes.back() - s_nodes.front());
                    if (s < s_nodes.front() - tol || s > s_nodes.back() + tol)
                        throw DomainError("line sigma field queried outside its range");
                    const auto it = std::upper_bound(s_nodes.begin(), s_nodes.end(), s);
                    std::size_t k = it == s_nodes.begin() ? 0 : static_cast<std::size_t>(it - s_nodes.begin()) - 1;
                    k = std::min(k, s_nodes.size() - 2);
                    const double w = std::clamp((s - s_nodes[k]) / (s_nodes[k + 1] - s_nodes[k]), 0.0, 1.0);
                    return values[k] * (1.0 - w) + values[k + 1] * w;
                }};
    }

    static SigmaField callable(std::function<Mat2(Vec2)> f) { return {Kind::callable, std::move(f)}; }
};

struct LimitParams
{
    Regime regime = Regime::thm2;
    double chi = 0.0;
    Vec2 u0{1.0, 0.0};
    Vec2 Q0;
    double c = 1.0;
    SigmaField sigma_field;
    /// Clearance at which paths stop: r + delta0 (thm2) or delta0 (thm3);
    /// <= 0 disables stopping.
    double stop_clearance = 0.0;
    const TorusTable* table = nullptr;
    double h = 1e-3;
    std::size_t N = 1000;
    std::uint64_t seed = 0;
    /// Each step draws 2^noise_refinement Gaussian sub-increments, so a run
    /// at h/2 with refinement L-1 sees the same Brownian path as one at h with L.
    int noise_refinement = 0;
    std::vector<double> checkpoints;
    std::size_t workers = 1;

    void validate() const
    {
        if (!(h > 0.0))
            throw ArgumentError("step h must be > 0");
        if (!(c > 0.0))
            throw ArgumentError("time horizon c must be > 0");
        if (N < 1)
            throw ArgumentError("path count N must be >= 1");
        if (!(chi >= 0.0 && chi < 1.0))
            throw ArgumentError("chi must lie in [0, 1)");
        if (!sigma_field.sigma2)
            throw ArgumentError("sigma field is not set");
        if (noise_refinement < 0 || noise_refinement > 20)
            throw ArgumentError("noise_refinement out of range");
        if (stop_clearance > 0.0 && table == nullptr)
            throw ArgumentError("stopping needs a table");
        for (double t : checkpoints)
            if (!(t >= 0.0 && t <= c * (1.0 + 1e-12)))
                throw ArgumentError("checkpoint outside [0, c]");
        if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
            throw ArgumentError("checkpoints must be increasing");
    }
};

/// Position along the thm1 reference motion.
inline Vec2 thm1_reference(const LimitParams& p, double s) noexcept { return p.Q0 + s * p.chi * p.u0; }

struct Thm1Covariance
{
    Mat2 CovV;
    Mat2 CovQ;
};

namespace detail
{

template <class F>
Mat2 adaptive_simpson(const F& f, double a, double b, Mat2 fa, Mat2 fm, Mat2 fb, Mat2 whole,
                      double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const Mat2 flm = f(lm), frm = f(rm);
    const Mat2 left = (fa + 4.0 * flm + fm) * ((m - a) / 6.0);
    const Mat2 right = (fm + 4.0 * frm + fb) * ((b - m) / 6.0);
    const Mat2 delta = left + right - whole;
    if (depth <= 0 || max_abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
Mat2 integrate(const F& f, double a, double b, double tol)
{
    if (b <= a)
        return {};
    const Mat2 fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const Mat2 whole = (fa + 4.0 * fm + fb) * ((b - a) / 6.0);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

} // namespace detail

/// CovV = (1-chi^2)^{3/2} int_0^tau sigma^2 ds and
/// CovQ = (1-chi^2)^{3/2} int_0^tau (tau-s)^2 sigma^2 ds along Q0 + s chi u0.
inline Thm1Covariance analytic_cov_thm1(const LimitParams& p, double tau, double tol = 1e-8)
{
    if (!(tau >= 0.0 && tau <= p.c * (1.0 + 1e-12)))
        throw ArgumentError("tau outside [0, c]");
    if (!p.sigma_field.sigma2)
        throw ArgumentError("sigma field is not set");
    if (p.table) {
        for (int k = 0; k <= 64; ++k) {
            const Vec2 Q = wrap_point(thm1_reference(p, tau * k / 64.0));
            if (!(dist_to_boundary(Q, *p.table) > p.stop_clearance))
                throw DomainError("reference motion leaves the admissible region");
        }
    }
    const double pre = std::pow(1.0 - p.chi * p.chi, 1.5);
    const auto s2 = [&](double s) { return p.sigma_field.sigma2(thm1_reference(p, s)); };
    Thm1Covariance out;
    out.CovV = detail::integrate(s2, 0.0, tau, tol) * pre;
    out.CovQ = detail::integrate([&](double s) { return s2(s) * ((tau - s) * (tau - s)); }, 0.0, tau, tol) * pre;
    return out;
}

/// One path sampled at the checkpoint times.
struct PathSamples
{
    std::vector<Vec2> V;
    std::vector<Vec2> Q;
    std::vector<char> frozen;
    bool stopped = false;
    double stop_time = 0.0;
};

/// Checkpoint samples of a path ensemble, from either the billiard (after
/// rescaling) or a limit process.
struct Ensemble
{
    Regime regime = Regime::thm2;
    std::vector<double> tau;
    std::vector<PathSamples> paths;
    /// Billiard runs only: collisions and simulated physical time per path.
    std::vector<std::uint64_t> collisions;
    std::vector<double> active_time;
    std::size_t wall_contacts = 0;

    std::size_t n_stopped() const noexcept
    {
        return static_cast<std::size_t>(
            std::count_if(paths.begin(), paths.end(), [](const PathSamples& p) { return p.stopped; }));
    }
};

inline constexpr std::uint64_t kLimitSalt = 0x11a17e5dULL;

namespace detail
{

/// Gaussian increment over a step of length h, assembled from 2^L
/// sub-increments of length h / 2^L.
inline Vec2 brownian_increment(Rng& rng, double h, int L)
{
    const int n = 1 << L;
    Vec2 sum;
    for (int k = 0; k < n; ++k) {
        const auto [a, b] = rng.normal2();
        sum += Vec2{a, b};
    }
    return sum * std::sqrt(h / n);
}

inline bool should_stop(const LimitParams& p, Vec2 Q)
{
    return p.stop_clearance > 0.0 && dist_to_boundary(wrap_point(Q), *p.table) <= p.stop_clearance;
}

inline PathSamples simulate_path(const LimitParams& p, std::size_t index)
{
    Rng rng = Rng::stream(p.seed, index, kLimitSalt);
    PathSamples path;
    const std::size_t nc = p.checkpoints.size();
    path.V.resize(nc);
    path.Q.resize(nc);
    path.frozen.assign(nc, 0);

    const double pre = p.regime == Regime::thm1 ? std::pow(1.0 - p.chi * p.chi, 0.75) : 1.0;
    // thm1 tracks the rescaled deviation from the reference motion, which starts at 0
    Vec2 V, Q = p.regime == Regime::thm1 ? Vec2{} : p.Q0;
    double t = 0.0;
    std::size_t next_cp = 0;
    const std::size_t n_steps = static_cast<std::size_t>(std::ceil(p.c / p.h - 1e-9));

    const auto emit_until = [&](double t_end, Vec2 V0, Vec2 Q0, Vec2 V1, Vec2 Q1, double t0) {
        // linear interpolation inside the step, exact at its ends
        while (next_cp < nc && p.checkpoints[next_cp] <= t_end + 1e-12) {
            const double w = t_end > t0 ? std::clamp((p.checkpoints[next_cp] - t0) / (t_end - t0), 0.0, 1.0) : 1.0;
            path.V[next_cp] = V0 * (1.0 - w) + V1 * w;
            path.Q[next_cp] = Q0 * (1.0 - w) + Q1 * w;
            path.frozen[next_cp] = path.stopped;
            ++next_cp;
        }
    };

    if (detail::should_stop(p, Q)) {
        path.stopped = true;
        path.stop_time = 0.0;
    }
    for (std::size_t k = 0; k < n_steps && !path.stopped; ++k) {
        const double h = std::min(p.h, p.c - t);
        const Vec2 dw = brownian_increment(rng, h, p.noise_refinement);
        Vec2 V1, Q1;
        switch (p.regime) {
        case Regime::thm1: {
            const Mat2 sig = psd_sqrt(p.sigma_field.sigma2(thm1_reference(p, t)));
            V1 = V + pre * (sig * dw);
            Q1 = Q + 0.5 * h * (V + V1);
            break;
        }
        case Regime::thm2:
        case Regime::thm3: {
            const Mat2 sig = psd_sqrt(p.sigma_field.sigma2(Q));
            V1 = V + sig * dw;
            Q1 = Q + 0.5 * h * (V + V1);
            break;
        }
        }
        const double t1 = (k + 1 == n_steps) ? p.c : t + h;
        if (p.regime != Regime::thm1 && detail::should_stop(p, Q1)) {
            // bisect for the crossing on the linearly interpolated step
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (detail::should_stop(p, Q * (1.0 - mid) + Q1 * mid))
                    hi = mid;
                else
                    lo = mid;
            }
            const double ts = t + hi * (t1 - t);
            const Vec2 Vs = V * (1.0 - hi) + V1 * hi;
            const Vec2 Qs = Q * (1.0 - hi) + Q1 * hi;
            emit_until(ts, V, Q, Vs, Qs, t);
            path.stopped = true;
            path.stop_time = ts;
            V = Vec2{};
            Q = Qs;
            t = ts;
            break;
        }
        emit_until(t1, V, Q, V1, Q1, t);
        V = V1;
        Q = Q1;
        t = t1;
    }
    // after a stop the velocity is 0 and the position is held
    while (next_cp < nc) {
        path.V[next_cp] = path.stopped ? Vec2{} : V;
        path.Q[next_cp] = Q;
        path.frozen[next_cp] = path.stopped;
        ++next_cp;
    }
    return path;
}

} // namespace detail

/// Ensemble of limit-process paths sampled at p.checkpoints. Path i uses the
/// RNG stream (seed, i, kLimitSalt), so results do not depend on `workers`.
inline Ensemble simulate_limit(const LimitParams& p)
{
    p.validate();
    Ensemble ens;
    ens.regime = p.regime;
    ens.tau = p.checkpoints;
    ens.paths.resize(p.N);
    parallel_for(p.N, p.workers, [&](std::size_t i) { ens.paths[i] = detail::simulate_path(p, i); });
    return ens;
}

} // namespace bbm

#endif // BBM_LIMIT_MODELS_HPP
