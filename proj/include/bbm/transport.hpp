#ifndef BBM_TRANSPORT_HPP
#define BBM_TRANSPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "billiard.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "vec2.hpp"

namespace bbm
{

/// Green-Kubo diffusion matrix of the momentum-transfer observable.
struct DiffusionMatrix
{
    Mat2 m;
    Mat2 stderr;
    int lags_used = 0;
    std::vector<Mat2> per_lag;        ///< C_0 .. C_J
    std::vector<Mat2> per_lag_stderr;
    std::uint64_t n_collisions = 0;
    std::uint64_t n_disk_hits = 0;
    Vec2 Q;
    double r_disk = 0.0;

    double max_stderr() const noexcept { return max_abs(stderr); }
};

inline constexpr int kMaxAutoLag = 64;

struct GreenKuboOptions
{
    int batches = 32;
    /// Start every batch from a fresh mu_Q sample instead of continuing one orbit.
    bool independent_restarts = false;
    /// Relative threshold on ||C_j|| / ||C_0|| for the automatic lag cutoff.
    double auto_lag_threshold = 0.01;
};

/// Automatic lag cutoff: the smallest j >= 2 such that C_j and C_{j+1} are
/// both below `threshold` * ||C_0|| (C_1 vanishes identically, since the
/// particle cannot hit the disk twice in a row), capped at the largest lag.
inline int auto_lag(const std::vector<Mat2>& per_lag, double threshold)
{
    const int cap = static_cast<int>(per_lag.size()) - 1;
    const double lim = threshold * frobenius(per_lag.at(0));
    for (int j = 2; j < cap; ++j)
        if (frobenius(per_lag[j]) < lim && frobenius(per_lag[j + 1]) < lim)
            return j;
    return cap;
}

/// Single-orbit estimator of sigma-bar^2_Q = C_0 + sum_{j=1..J} (C_j + C_j^T)
/// with C_j the time average of A(x) A(F_Q^j x)^T. J = 0 picks the cutoff
/// automatically. Errors are batch means over `opts.batches` batches.
inline DiffusionMatrix green_kubo(Vec2 Q, const TorusTable& table, double r_disk,
                                  std::uint64_t n_collisions, int J, Rng& rng,
                                  const GreenKuboOptions& opts = {})
{
    if (J < 0)
        throw ArgumentError("lag cutoff J must be >= 0");
    const int J_acc = J == 0 ? kMaxAutoLag : J;
    if (n_collisions < 10ULL * static_cast<std::uint64_t>(J_acc))
        throw ArgumentError("n_collisions must be at least 10 * J (n = " +
                            std::to_string(n_collisions) + ", J = " + std::to_string(J_acc) + ")");
    if (opts.batches < 2)
        throw ArgumentError("green_kubo needs at least two batches");
    const std::uint64_t n_batches = std::min<std::uint64_t>(opts.batches, n_collisions);
    const FrozenBilliard bil(table, Q, r_disk);

    // per batch, per lag sums of A_k A_{k+j}^T
    std::vector<std::vector<Mat2>> sums(n_batches, std::vector<Mat2>(J_acc + 1));
    std::vector<std::uint64_t> lengths(n_batches);

    struct Hit
    {
        std::uint64_t k;
        Vec2 a;
    };
    std::vector<Hit> recent; // disk hits within the last J_acc collisions
    std::uint64_t disk_hits = 0;

    BilliardState st = bil.to_state(bil.sample(rng));
    const std::uint64_t per = n_collisions / n_batches;
    std::uint64_t k = 0;
    for (std::uint64_t b = 0; b < n_batches; ++b) {
        if (opts.independent_restarts && b > 0) {
            st = bil.to_state(bil.sample(rng));
            recent.clear();
        }
        const std::uint64_t len = b + 1 == n_batches ? n_collisions - per * b : per;
        lengths[b] = len;
        auto& acc = sums[b];
        for (std::uint64_t i = 0; i < len; ++i, ++k) {
            bil.step(st);
            if (st.contact != kDiskComponent)
                continue;
            ++disk_hits;
            const Vec2 a = observable_A(st.contact, st.normal, st.w);
            std::size_t keep = 0;
            for (const Hit& h : recent) {
                const std::uint64_t lag = k - h.k;
                if (lag > static_cast<std::uint64_t>(J_acc))
                    continue;
                acc[lag] += outer(h.a, a);
                recent[keep++] = h;
            }
            recent.resize(keep);
            acc[0] += outer(a, a);
            recent.push_back({k, a});
        }
    }

    DiffusionMatrix out;
    out.Q = Q;
    out.r_disk = r_disk;
    out.n_collisions = n_collisions;
    out.n_disk_hits = disk_hits;

    // pooled per-lag means and their batch errors
    out.per_lag.assign(J_acc + 1, Mat2{});
    out.per_lag_stderr.assign(J_acc + 1, Mat2{});
    for (int j = 0; j <= J_acc; ++j) {
        stats::Moments e[4];
        Mat2 total{};
        for (std::uint64_t b = 0; b < n_batches; ++b) {
            total += sums[b][j];
            const Mat2 mb = sums[b][j] / static_cast<double>(lengths[b]);
            e[0].add(mb.a);
            e[1].add(mb.b);
            e[2].add(mb.c);
            e[3].add(mb.d);
        }
        out.per_lag[j] = total / static_cast<double>(n_collisions);
        out.per_lag_stderr[j] = {e[0].stderr_mean(), e[1].stderr_mean(), e[2].stderr_mean(),
                                 e[3].stderr_mean()};
    }
    out.lags_used = J == 0 ? auto_lag(out.per_lag, opts.auto_lag_threshold) : J;
    out.per_lag.resize(out.lags_used + 1);
    out.per_lag_stderr.resize(out.lags_used + 1);

    Mat2 m = out.per_lag[0];
    for (int j = 1; j <= out.lags_used; ++j)
        m += out.per_lag[j] + out.per_lag[j].transposed();
    m.b = m.c = 0.5 * (m.b + m.c);
    out.m = m;

    stats::Moments e[3];
    for (std::uint64_t b = 0; b < n_batches; ++b) {
        Mat2 mb = sums[b][0];
        for (int j = 1; j <= out.lags_used; ++j)
            mb += sums[b][j] + sums[b][j].transposed();
        mb = mb / static_cast<double>(lengths[b]);
        e[0].add(mb.a);
        e[1].add(0.5 * (mb.b + mb.c));
        e[2].add(mb.d);
    }
    out.stderr = {e[0].stderr_mean(), e[1].stderr_mean(), e[1].stderr_mean(), e[2].stderr_mean()};
    return out;
}

/// Closed-form lag-0 term 8 pi r / (3 (length(dD) + 2 pi r)) I.
inline Mat2 lag0_closed_form(const TorusTable& table, double r_disk) noexcept
{
    const double pi = std::numbers::pi;
    return Mat2::identity() * (8.0 * pi * r_disk / (3.0 * (table.boundary_length() + 2.0 * pi * r_disk)));
}

/// Fitted exponential decay of ||C_j|| over j in [2, J], restricted to lags
/// whose norm is above twice its standard error.
struct DecayFit
{
    stats::LinearFit fit;
    int points = 0;
    bool significant_negative = false; ///< slope + z_95 * se < 0
};

inline DecayFit correlation_decay(const DiffusionMatrix& dm, double confidence = 0.95)
{
    std::vector<double> x, y;
    for (int j = 2; j <= dm.lags_used; ++j) {
        const double nj = frobenius(dm.per_lag[j]);
        if (nj > 2.0 * frobenius(dm.per_lag_stderr[j])) {
            x.push_back(j);
            y.push_back(std::log(nj));
        }
    }
    DecayFit d;
    d.points = static_cast<int>(x.size());
    if (x.size() < 3)
        return d;
    d.fit = stats::linear_fit(x, y);
    const double z = stats::normal_quantile(confidence);
    d.significant_negative = d.fit.slope + z * d.fit.slope_se < 0.0;
    return d;
}

struct SigmaPieces
{
    Mat2 sigma2;        ///< sigma-bar^2 / mean free path
    Mat2 sigma2_V;      ///< (1 - M |V|^2) sigma-bar^2
    Mat2 sigma2_stderr;
    double mean_free_path = 0.0;
};

inline SigmaPieces sigma_pieces(const DiffusionMatrix& sigma_bar, const TorusTable& table,
                                double r_disk, Vec2 V, double M)
{
    const double mv2 = std::isinf(M) ? (norm2(V) == 0.0 ? 0.0 : M) : M * norm2(V);
    if (!(mv2 <= 1.0))
        throw DomainError("M |V|^2 exceeds 1");
    SigmaPieces p;
    p.mean_free_path = mean_free_path(table, r_disk);
    p.sigma2 = sigma_bar.m / p.mean_free_path;
    p.sigma2_stderr = sigma_bar.stderr / p.mean_free_path;
    p.sigma2_V = sigma_bar.m * (1.0 - mv2);
    return p;
}

/// Leading-order small-disk value (8 r / (3 Area(D))) I of sigma^2_Q.
inline DiffusionMatrix small_r_asymptote(const TorusTable& table, double r_disk)
{
    if (!(r_disk >= 0.0))
        throw ArgumentError("disk radius must be >= 0");
    DiffusionMatrix d;
    d.m = Mat2::identity() * (8.0 * r_disk / (3.0 * table.area()));
    d.r_disk = r_disk;
    return d;
}

/// sigma_0^2 = 8 / (3 Area(D)).
inline double sigma0_squared(const TorusTable& table) noexcept { return 8.0 / (3.0 * table.area()); }

/// Symmetric PSD square root. Eigenvalues in [-tol, 0) are clipped to 0.
inline Mat2 psd_sqrt(const Mat2& m, double tol = 1e-12)
{
    const double scale = std::max(1.0, max_abs(m));
    if (std::abs(m.b - m.c) > tol * scale)
        throw DomainError("psd_sqrt of an asymmetric matrix");
    const Mat2 s{m.a, 0.5 * (m.b + m.c), 0.5 * (m.b + m.c), m.d};
    if (s.b == 0.0)
    {
        if (s.a < -tol * scale || s.d < -tol * scale)
            throw DomainError("psd_sqrt of an indefinite matrix");
        return Mat2::diag(std::sqrt(std::max(0.0, s.a)), std::sqrt(std::max(0.0, s.d)));
    }
    const SymEigen e = sym_eigen(s);
    if (e.lambda1 < -tol * scale)
        throw DomainError("psd_sqrt of an indefinite matrix (lambda_min = " +
                          std::to_string(e.lambda1) + ")");
    const double l1 = std::sqrt(std::max(0.0, e.lambda1));
    const double l2 = std::sqrt(std::max(0.0, e.lambda2));
    // sqrt(S) = (S + sqrt(det S) I) / (sqrt(l1) + sqrt(l2)) is exact for 2x2
    const double denom = l1 + l2;
    if (denom == 0.0)
        return {};
    if (e.lambda1 < 0.0)
        return recompose(e, 0.0, l2);
    Mat2 r = (s + Mat2::identity() * (l1 * l2)) / denom;
    r.c = r.b;
    return r;
}

/// Nearest symmetric PSD matrix in Frobenius norm.
inline Mat2 psd_project(const Mat2& m)
{
    const Mat2 s{m.a, 0.5 * (m.b + m.c), 0.5 * (m.b + m.c), m.d};
    const SymEigen e = sym_eigen(s);
    if (e.lambda1 >= 0.0)
        return s;
    return recompose(e, 0.0, std::max(0.0, e.lambda2));
}

// ---------------------------------------------------------------------------
// Nonsingularity via period-2 diameter orbits
// ---------------------------------------------------------------------------

struct DiameterWitness
{
    int scatterer = 0;
    int image_x = 0;
    int image_y = 0;
    Vec2 direction; ///< unit vector from Q toward the scatterer center
    Vec2 S;         ///< -2 direction
    double length = 0.0;
};

struct NonsingularityReport
{
    bool nonsingular = false;
    std::vector<DiameterWitness> witnesses;
    std::optional<std::pair<std::size_t, std::size_t>> pair; ///< a noncollinear pair

    const char* verdict() const noexcept { return nonsingular ? "nonsingular" : "inconclusive"; }
};

/// Enumerates unobstructed segments between the disk boundary and a
/// scatterer image along the line of centers. A pair of such orbits with
/// noncollinear momentum transfers certifies that sigma_Q is nonsingular.
inline NonsingularityReport nonsingularity_check(Vec2 Q, const TorusTable& table, double r_disk,
                                                 int image_range = 2)
{
    Q = wrap_point(Q);
    if (!(dist_to_boundary(Q, table) > r_disk))
        throw DomainError("disk position is not admissible");
    NonsingularityReport rep;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const Scatterer& sc = table[i];
        for (int ix = -image_range; ix <= image_range; ++ix) {
            for (int iy = -image_range; iy <= image_range; ++iy) {
                const Vec2 c = sc.center + Vec2{double(ix), double(iy)};
                const Vec2 d = c - Q;
                const double dist = norm(d);
                const double len = dist - sc.radius - r_disk;
                if (!(len > 0.0))
                    continue;
                const Vec2 n = d / dist;
                const Vec2 start = Q + r_disk * n;
                const auto hit = first_hit_static(start, n, table, len * (1.0 + 1e-9) + 1e-12);
                if (!hit || hit->scatterer != static_cast<int>(i) ||
                    std::abs(hit->t - len) > 1e-9 * std::max(1.0, len))
                    continue;
                // the hit image must be the targeted one
                const Vec2 hit_center = hit->point - sc.radius * hit->normal;
                if (norm(hit_center - c) > 1e-9)
                    continue;
                // and the segment must not cross another image of the disk
                if (r_disk > 0.0) {
                    detail::CircleHit dh;
                    detail::circle_images_hit(torus_displacement(Q, wrap_point(start)), n, r_disk, len,
                                              kDiskComponent, true, dh, nullptr);
                    if (dh.t <= len)
                        continue;
                }
                rep.witnesses.push_back({static_cast<int>(i), ix, iy, n, -2.0 * n, len});
            }
        }
    }
    for (std::size_t a = 0; a < rep.witnesses.size() && !rep.pair; ++a)
        for (std::size_t b = a + 1; b < rep.witnesses.size(); ++b)
            if (std::abs(cross(rep.witnesses[a].direction, rep.witnesses[b].direction)) > 1e-9) {
                rep.pair = std::pair{a, b};
                break;
            }
    rep.nonsingular = rep.pair.has_value();
    return rep;
}

// ---------------------------------------------------------------------------
// Regularity scan and the sigma grid used by the SDE
// ---------------------------------------------------------------------------

struct GridSpec
{
    Vec2 origin;
    double h = 0.02;
    int nx = 6;
    int ny = 6;

    Vec2 node(int i, int j) const noexcept { return origin + Vec2{i * h, j * h}; }
};

struct GkConfig
{
    std::uint64_t n_collisions = 1'000'000;
    int J = 0;
    GreenKuboOptions options;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
};

/// Per-node Green-Kubo result with the derived sigma_Q.
struct SigmaNode
{
    Vec2 Q;
    bool valid = false;
    DiffusionMatrix gk;
    Mat2 sigma2;     ///< sigma-bar^2 / mean free path
    Mat2 sigma;      ///< PSD square root of sigma2
    double sigma_err = 0.0; ///< Frobenius size of the propagated error on sigma
};

inline constexpr std::uint64_t kGridSalt = 0x5167a3d1ULL;

inline SigmaNode evaluate_sigma_node(Vec2 Q, const TorusTable& table, double r_disk,
                                     const GkConfig& cfg, std::uint64_t node_index)
{
    SigmaNode nd;
    nd.Q = Q;
    Rng rng = Rng::stream(cfg.seed, node_index, kGridSalt);
    nd.gk = green_kubo(Q, table, r_disk, cfg.n_collisions, cfg.J, rng, cfg.options);
    const double L = mean_free_path(table, r_disk);
    nd.sigma2 = psd_project(nd.gk.m / L);
    nd.sigma = psd_sqrt(nd.sigma2);
    const Mat2 err = nd.gk.stderr / L;
    // error of the square root by the first-order change along the stderr matrix
    nd.sigma_err = frobenius(psd_sqrt(psd_project(nd.sigma2 + err)) - nd.sigma);
    nd.valid = true;
    return nd;
}

struct ScanPair
{
    int i1, j1, i2, j2;
    double h = 0.0;
    double diff = 0.0;   ///< ||sigma_Q1 - sigma_Q2||_F
    double error = 0.0;  ///< combined MC error of the difference
    double ratio = 0.0;  ///< diff / (h |ln h|)
    bool inconclusive = false;
};

struct ScanReport
{
    GridSpec grid;
    std::vector<SigmaNode> nodes; ///< row-major, index j * nx + i
    std::vector<ScanPair> pairs;
    double max_ratio = 0.0;       ///< over conclusive pairs
    int conclusive = 0;
};

inline ScanPair scan_pair(const SigmaNode& a, const SigmaNode& b, double h)
{
    ScanPair p{};
    p.h = h;
    p.diff = frobenius(a.sigma - b.sigma);
    p.error = std::hypot(a.sigma_err, b.sigma_err);
    p.ratio = p.diff / (h * std::abs(std::log(h)));
    p.inconclusive = p.diff < 3.0 * p.error;
    return p;
}

/// sigma_Q on a regular grid and the log-Lipschitz ratios of adjacent nodes.
inline ScanReport scan_sigma(const GridSpec& grid, const TorusTable& table, double r_disk,
                             double delta0, const GkConfig& cfg)
{
    if (grid.nx < 1 || grid.ny < 1 || !(grid.h > 0.0) || grid.h >= 1.0)
        throw ArgumentError("invalid scan grid");
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            if (!(dist_to_boundary(wrap_point(grid.node(i, j)), table) >= r_disk + delta0))
                throw ArgumentError("scan grid point is not admissible");
    ScanReport rep;
    rep.grid = grid;
    rep.nodes.resize(static_cast<std::size_t>(grid.nx * grid.ny));
    parallel_for(rep.nodes.size(), cfg.workers, [&](std::size_t idx) {
        const int i = static_cast<int>(idx) % grid.nx, j = static_cast<int>(idx) / grid.nx;
        rep.nodes[idx] = evaluate_sigma_node(grid.node(i, j), table, r_disk, cfg, idx);
    });
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const auto& a = rep.nodes[static_cast<std::size_t>(j * grid.nx + i)];
            if (i + 1 < grid.nx) {
                ScanPair p = scan_pair(a, rep.nodes[static_cast<std::size_t>(j * grid.nx + i + 1)], grid.h);
                p.i1 = i, p.j1 = j, p.i2 = i + 1, p.j2 = j;
                rep.pairs.push_back(p);
            }
            if (j + 1 < grid.ny) {
                ScanPair p = scan_pair(a, rep.nodes[static_cast<std::size_t>((j + 1) * grid.nx + i)], grid.h);
                p.i1 = i, p.j1 = j, p.i2 = i, p.j2 = j + 1;
                rep.pairs.push_back(p);
            }
        }
    }
    for (const auto& p : rep.pairs) {
        if (p.inconclusive)
            continue;
        ++rep.conclusive;
        rep.max_ratio = std::max(rep.max_ratio, p.ratio);
    }
    return rep;
}

/// Precomputed sigma^2_Q on a rectangle. Nodes closer than r_disk to a
/// scatterer are invalid; queries interpolate bilinearly over the valid
/// corners of their cell (weights renormalized) and project back to PSD.
class SigmaGrid
{
public:
    SigmaGrid() = default;
    SigmaGrid(GridSpec spec, std::vector<Mat2> sigma2, std::vector<char> valid)
        : spec_(spec), sigma2_(std::move(sigma2)), valid_(std::move(valid))
    {
        if (sigma2_.size() != static_cast<std::size_t>(spec_.nx * spec_.ny) || valid_.size() != sigma2_.size())
            throw ArgumentError("sigma grid size mismatch");
        if (spec_.nx < 2 || spec_.ny < 2)
            throw ArgumentError("sigma grid needs at least 2x2 nodes");
    }

    const GridSpec& spec() const noexcept { return spec_; }
    const std::vector<Mat2>& values() const noexcept { return sigma2_; }
    const std::vector<char>& valid() const noexcept { return valid_; }

    /// sigma^2 at Q. sigma^2 is lattice periodic, so Q is first shifted by
    /// an integer lattice vector into the grid when that is possible.
    Mat2 sigma2(Vec2 Q) const
    {
        double fx = (Q.x - spec_.origin.x) / spec_.h;
        double fy = (Q.y - spec_.origin.y) / spec_.h;
        const double period = 1.0 / spec_.h;
        if (fx < 0.0 || fx > spec_.nx - 1)
            fx -= std::floor(fx / period) * period;
        if (fy < 0.0 || fy > spec_.ny - 1)
            fy -= std::floor(fy / period) * period;
        if (!(fx >= 0.0 && fy >= 0.0 && fx <= spec_.nx - 1 && fy <= spec_.ny - 1))
            throw DomainError("sigma grid query outside the grid");
        const int i = std::min(static_cast<int>(fx), spec_.nx - 2);
        const int j = std::min(static_cast<int>(fy), spec_.ny - 2);
        const double tx = fx - i, ty = fy - j;
        const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
        const std::size_t idx[4] = {at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)};
        Mat2 acc{};
        double wsum = 0.0;
        for (int k = 0; k < 4; ++k) {
            if (!valid_[idx[k]])
                continue;
            acc += sigma2_[idx[k]] * w[k];
            wsum += w[k];
        }
        if (!(wsum > 0.0))
            throw DomainError("sigma grid query has no valid neighbouring node");
        return psd_project(acc / wsum);
    }

private:
    std::size_t at(int i, int j) const noexcept { return static_cast<std::size_t>(j * spec_.nx + i); }

    GridSpec spec_;
    std::vector<Mat2> sigma2_;
    std::vector<char> valid_;
};

/// Bounding grid (plus one node of margin) of the lattice nodes reachable
/// from Q0 through nodes whose cell may hold a point with clearance above
/// `clearance`, so channels narrower than the spacing are not lost. The
/// component is cut off at distance 0.5 from Q0 in each direction; a
/// component that wraps around the torus then yields a full period.
inline GridSpec reachable_grid(Vec2 Q0, const TorusTable& table, double clearance, double spacing)
{
    if (!(spacing > 0.0 && spacing < 0.5))
        throw ArgumentError("grid spacing must lie in (0, 0.5)");
    if (!(dist_to_boundary(wrap_point(Q0), table) > clearance))
        throw DomainError("Q0 is not admissible");
    const int half = static_cast<int>(std::ceil(0.5 / spacing));
    const int n = 2 * half + 1;
    const Vec2 base = Q0 - Vec2{half * spacing, half * spacing};
    std::vector<char> seen(static_cast<std::size_t>(n * n), 0);
    std::vector<std::pair<int, int>> stack{{half, half}};
    seen[static_cast<std::size_t>(half * n + half)] = 1;
    int i0 = half, i1 = half, j0 = half, j1 = half;
    while (!stack.empty()) {
        const auto [i, j] = stack.back();
        stack.pop_back();
        i0 = std::min(i0, i), i1 = std::max(i1, i), j0 = std::min(j0, j), j1 = std::max(j1, j);
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int a = i + di[k], b = j + dj[k];
            if (a < 0 || b < 0 || a >= n || b >= n)
                continue;
            const std::size_t idx = static_cast<std::size_t>(b * n + a);
            if (seen[idx])
                continue;
            const Vec2 q = base + Vec2{a * spacing, b * spacing};
            if (dist_to_boundary(wrap_point(q), table) > clearance - spacing) {
                seen[idx] = 1;
                stack.push_back({a, b});
            }
        }
    }
    i0 = std::max(0, i0 - 1), j0 = std::max(0, j0 - 1);
    i1 = std::min(n - 1, i1 + 1), j1 = std::min(n - 1, j1 + 1);
    GridSpec g;
    g.origin = base + Vec2{i0 * spacing, j0 * spacing};
    g.h = spacing;
    g.nx = i1 - i0 + 1;
    g.ny = j1 - j0 + 1;
    return g;
}

/// Green-Kubo sigma^2_Q at every grid node with clearance above r_disk.
inline SigmaGrid build_sigma_grid(const GridSpec& spec, const TorusTable& table, double r_disk,
                                  const GkConfig& cfg)
{
    const std::size_t n = static_cast<std::size_t>(spec.nx * spec.ny);
    std::vector<Mat2> values(n);
    std::vector<char> valid(n, 0);
    parallel_for(n, cfg.workers, [&](std::size_t idx) {
        const int i = static_cast<int>(idx) % spec.nx, j = static_cast<int>(idx) / spec.nx;
        const Vec2 Q = spec.node(i, j);
        if (!(dist_to_boundary(wrap_point(Q), table) > r_disk))
            return;
        values[idx] = evaluate_sigma_node(Q, table, r_disk, cfg, idx).sigma2;
        valid[idx] = 1;
    });
    return SigmaGrid(spec, std::move(values), std::move(valid));
}

} // namespace bbm

#endif // BBM_TRANSPORT_HPP
