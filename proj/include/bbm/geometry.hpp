#ifndef BBM_GEOMETRY_HPP
#define BBM_GEOMETRY_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "vec2.hpp"

namespace bbm
{

// ---------------------------------------------------------------------------
// Torus arithmetic. The cell period is 1 in both coordinates.
// ---------------------------------------------------------------------------

/// Reduce to [0, 1).
inline double wrap01(double x) noexcept
{
    double y = x - std::floor(x);
    return y >= 1.0 ? 0.0 : y;
}

inline Vec2 wrap_point(Vec2 p) noexcept { return {wrap01(p.x), wrap01(p.y)}; }

/// Reduce to the half-open interval (-0.5, 0.5]; ties go to +0.5.
inline double reduce_half(double x) noexcept { return x - std::ceil(x - 0.5); }

/// Nearest-image displacement b - a.
inline Vec2 torus_displacement(Vec2 a, Vec2 b) noexcept
{
    return {reduce_half(b.x - a.x), reduce_half(b.y - a.y)};
}

inline double torus_distance(Vec2 a, Vec2 b) noexcept { return norm(torus_displacement(a, b)); }

// ---------------------------------------------------------------------------
// Table
// ---------------------------------------------------------------------------

struct Scatterer
{
    Vec2 center;
    double radius = 0.0;

    double curvature() const noexcept { return 1.0 / radius; }
    double perimeter() const noexcept { return 2.0 * std::numbers::pi * radius; }
};

/// Unit torus minus a finite set of disjoint circular scatterers.
///
/// Construction checks radii, pairwise disjointness over all lattice images
/// and positivity of the free area. The finite-horizon property is checked
/// separately by check_finite_horizon() because it is a sweep, not a formula.
class TorusTable
{
public:
    TorusTable() = default;

    TorusTable(std::vector<Scatterer> scatterers, double l_max = 2.0)
        : scatterers_(std::move(scatterers)), l_max_(l_max)
    {
        if (!(l_max_ > 0.0))
            throw ValidationError("l_max must be positive");
        double area = 1.0;
        double length = 0.0;
        for (std::size_t i = 0; i < scatterers_.size(); ++i) {
            auto& s = scatterers_[i];
            if (!(s.radius > 0.0))
                throw ValidationError("scatterer " + std::to_string(i) + ": radius must be > 0");
            if (!(2.0 * s.radius < 1.0))
                throw ValidationError("scatterer " + std::to_string(i) +
                                      ": overlaps its own lattice image");
            s.center = wrap_point(s.center);
            area -= std::numbers::pi * s.radius * s.radius;
            length += s.perimeter();
        }
        for (std::size_t i = 0; i < scatterers_.size(); ++i) {
            for (std::size_t j = i + 1; j < scatterers_.size(); ++j) {
                const double dist = torus_distance(scatterers_[i].center, scatterers_[j].center);
                if (!(dist > scatterers_[i].radius + scatterers_[j].radius))
                    throw ValidationError("scatterers " + std::to_string(i) + " and " +
                                          std::to_string(j) + " are not disjoint");
            }
        }
        if (!(area > 0.0))
            throw ValidationError("free area must be positive");
        area_ = area;
        boundary_length_ = length;
    }

    /// Radius 0.38 at (0,0) and radius 0.18 at (0.5,0.5): finite horizon,
    /// with no surviving axis or diagonal corridor.
    static TorusTable default_table()
    {
        return TorusTable({{{0.0, 0.0}, 0.38}, {{0.5, 0.5}, 0.18}}, 2.0);
    }

    const std::vector<Scatterer>& scatterers() const noexcept { return scatterers_; }
    std::size_t size() const noexcept { return scatterers_.size(); }
    const Scatterer& operator[](std::size_t i) const { return scatterers_[i]; }

    double l_max() const noexcept { return l_max_; }
    /// 1 - sum pi rho_i^2.
    double area() const noexcept { return area_; }
    /// sum 2 pi rho_i.
    double boundary_length() const noexcept { return boundary_length_; }

    double min_curvature() const noexcept
    {
        double k = std::numeric_limits<double>::infinity();
        for (const auto& s : scatterers_)
            k = std::min(k, s.curvature());
        return k;
    }

    /// Smallest boundary-to-boundary gap between distinct scatterer images.
    double min_gap() const noexcept
    {
        double g = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < scatterers_.size(); ++i) {
            g = std::min(g, 1.0 - 2.0 * scatterers_[i].radius);
            for (std::size_t j = i + 1; j < scatterers_.size(); ++j)
                g = std::min(g, torus_distance(scatterers_[i].center, scatterers_[j].center) -
                                    scatterers_[i].radius - scatterers_[j].radius);
        }
        return g;
    }

private:
    std::vector<Scatterer> scatterers_;
    double l_max_ = 2.0;
    double area_ = 1.0;
    double boundary_length_ = 0.0;
};

/// Counters for rays rejected as tangential.
struct GeometryStats
{
    std::uint64_t grazing_misses = 0;
};

/// Normalized discriminant below which a ray is treated as missing a circle.
inline constexpr double kGrazingTolerance = 1e-12;
/// |‖p‖² - ρ²| / ρ² below which a point counts as lying on a circle.
inline constexpr double kContactTolerance = 1e-9;

namespace detail
{

/// Earliest approach of the moving point p + t d (relative to a circle
/// center) to any lattice image of a circle of radius `rho`, restricted to
/// t in (0, best.t). Images are enumerated over the bounding box of the
/// segment. Roots use the cancellation-free form t = c / (-b + sqrt(disc)).
struct CircleHit
{
    double t = std::numeric_limits<double>::infinity();
    Vec2 rel;         // position relative to the hit image center at time t
    int ix = 0;       // lattice image of the circle center
    int iy = 0;
    int component = -1;
};

enum class RayStatus { ok, inside };

inline RayStatus circle_images_hit(Vec2 p, Vec2 d, double rho, double t_max, int component,
                                   bool skip_contact, CircleHit& best, GeometryStats* stats)
{
    const double t_lim = std::min(t_max, best.t);
    const Vec2 e = p + t_lim * d;
    const int kx0 = static_cast<int>(std::ceil(std::min(p.x, e.x) - rho));
    const int kx1 = static_cast<int>(std::floor(std::max(p.x, e.x) + rho));
    const int ky0 = static_cast<int>(std::ceil(std::min(p.y, e.y) - rho));
    const int ky1 = static_cast<int>(std::floor(std::max(p.y, e.y) + rho));
    const double a = norm2(d);
    const double rho2 = rho * rho;
    RayStatus status = RayStatus::ok;
    for (int kx = kx0; kx <= kx1; ++kx) {
        for (int ky = ky0; ky <= ky1; ++ky) {
            const Vec2 rel{p.x - kx, p.y - ky};
            const double c = norm2(rel) - rho2;
            if (skip_contact && std::abs(c) <= kContactTolerance * rho2)
                continue;
            if (c < -kContactTolerance * rho2) {
                status = RayStatus::inside;
                continue;
            }
            const double b = dot(rel, d);
            if (b >= 0.0)
                continue; // receding
            const double disc = b * b - a * c;
            if (disc <= kGrazingTolerance * a * rho2) {
                if (disc > 0.0 && stats)
                    ++stats->grazing_misses;
                continue;
            }
            const double t = c / (-b + std::sqrt(disc));
            if (t > 0.0 && t < best.t && t <= t_max) {
                best.t = t;
                best.rel = rel + t * d;
                best.ix = kx;
                best.iy = ky;
                best.component = component;
            }
        }
    }
    return status;
}

/// First scatterer hit of q + t v, t in (0, t_max]. `exclude` names the
/// scatterer the point currently sits on (its touching image is skipped).
inline RayStatus scatterer_hit(const TorusTable& table, Vec2 q, Vec2 v, double t_max,
                               int exclude, CircleHit& best, GeometryStats* stats)
{
    RayStatus status = RayStatus::ok;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& s = table[i];
        const auto st = circle_images_hit(q - s.center, v, s.radius, t_max, static_cast<int>(i),
                                          exclude == static_cast<int>(i), best, stats);
        if (st == RayStatus::inside)
            status = st;
    }
    return status;
}

/// scatterer_hit with a growing search window, which keeps the image
/// enumeration small for typical flights.
inline RayStatus scatterer_hit_staged(const TorusTable& table, Vec2 q, Vec2 v, double t_max,
                                      int exclude, CircleHit& best, GeometryStats* stats)
{
    const double speed = norm(v);
    double t_try = speed > 0.0 ? std::min(t_max, 0.5 / speed) : t_max;
    for (;;) {
        const auto st = scatterer_hit(table, q, v, t_try, exclude, best, stats);
        if (st == RayStatus::inside)
            return st;
        if (best.component >= 0 || t_try >= t_max)
            return RayStatus::ok;
        t_try = std::min(t_max, 2.0 * t_try);
    }
}

} // namespace detail

/// A hit of a scatterer by a ray.
struct StaticHit
{
    double t = 0.0;
    int scatterer = -1;
    int image_x = 0;  // the hit circle is centered at scatterer.center + image
    int image_y = 0;
    Vec2 point;       // origin + t * direction, not reduced to the unit cell
    Vec2 normal;      // unit, pointing into the free region
};

/// Earliest strictly positive hit of origin + t * direction on a scatterer
/// image, with the incoming condition <hit - c, direction> < 0. Returns
/// nullopt if nothing is hit for t <= t_max. Throws DomainError if the
/// origin lies inside a scatterer.
inline std::optional<StaticHit> first_hit_static(Vec2 origin, Vec2 direction, const TorusTable& table,
                                                 double t_max, std::optional<int> exclude = {},
                                                 GeometryStats* stats = nullptr)
{
    const Vec2 o = wrap_point(origin);
    detail::CircleHit best;
    const auto st = detail::scatterer_hit_staged(table, o, direction, t_max, exclude.value_or(-1),
                                                 best, stats);
    if (st == detail::RayStatus::inside)
        throw DomainError("ray origin lies inside a scatterer");
    if (best.component < 0)
        return std::nullopt;
    const auto& s = table[static_cast<std::size_t>(best.component)];
    StaticHit h;
    h.t = best.t;
    h.scatterer = best.component;
    h.image_x = best.ix;
    h.image_y = best.iy;
    h.point = origin + best.t * direction;
    h.normal = best.rel / s.radius;
    return h;
}

/// min over scatterer images of (distance to center - radius); negative
/// inside a scatterer, +inf for an empty table.
inline double dist_to_boundary(Vec2 q, const TorusTable& table) noexcept
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : table.scatterers())
        best = std::min(best, torus_distance(s.center, q) - s.radius);
    return best;
}

struct HorizonReport
{
    bool pass = false;
    /// Longest free segment seen; +inf when some ray never hits.
    double worst_free_path = 0.0;
    /// First ray whose free segment exceeded l_max (when !pass).
    std::optional<Vec2> offending_origin;
    std::optional<Vec2> offending_direction;
    std::size_t rays = 0;
};

/// Heuristic finite-horizon validator: for n_directions angles in [0, 2 pi)
/// and n_offsets transverse offsets per angle, measures the free segment
/// through a point of each line. Passes iff every measured segment is at
/// most l_max. A sweep cannot certify the property; it can only fail to find
/// a counterexample.
inline HorizonReport check_finite_horizon(const TorusTable& table, double l_max,
                                          std::size_t n_directions, std::size_t n_offsets)
{
    if (n_directions == 0 || n_offsets == 0)
        throw ArgumentError("check_finite_horizon needs at least one direction and offset");
    constexpr double inf = std::numeric_limits<double>::infinity();
    HorizonReport rep;
    rep.pass = true;
    auto record = [&](double free_path, Vec2 o, Vec2 u) {
        rep.worst_free_path = std::max(rep.worst_free_path, free_path);
        if (free_path > l_max && rep.pass) {
            rep.pass = false;
            rep.offending_origin = o;
            rep.offending_direction = u;
        }
    };
    if (table.size() == 0) {
        rep.pass = false;
        rep.worst_free_path = inf;
        rep.offending_origin = Vec2{0.0, 0.0};
        rep.offending_direction = Vec2{1.0, 0.0};
        return rep;
    }
    const double search = 2.0 * l_max;
    for (std::size_t i = 0; i < n_directions; ++i) {
        const double ang = 2.0 * std::numbers::pi * static_cast<double>(i) /
                           static_cast<double>(n_directions);
        const Vec2 u{std::cos(ang), std::sin(ang)};
        const Vec2 perp{-u.y, u.x};
        for (std::size_t j = 0; j < n_offsets; ++j) {
            ++rep.rays;
            const double s = (static_cast<double>(j) + 0.5) / static_cast<double>(n_offsets);
            Vec2 o = wrap_point(s * perp);
            int on = -1;
            double back = 0.0;
            if (dist_to_boundary(o, table) <= 0.0) {
                // Move along the line to where it leaves the scatterer.
                for (std::size_t k = 0; k < table.size(); ++k) {
                    const auto& sc = table[k];
                    const Vec2 rel = torus_displacement(sc.center, o);
                    if (norm(rel) <= sc.radius) {
                        const double b = dot(rel, u);
                        const double c = norm2(rel) - sc.radius * sc.radius;
                        const double t_exit = -b + std::sqrt(std::max(0.0, b * b - c));
                        o = wrap_point(o + t_exit * u);
                        on = static_cast<int>(k);
                        break;
                    }
                }
            } else {
                const auto hb = first_hit_static(o, -u, table, search);
                back = hb ? hb->t : inf;
            }
            const auto hf = first_hit_static(o, u, table, search, on);
            const double fwd = hf ? hf->t : inf;
            record(back + fwd, o, u);
        }
    }
    return rep;
}

} // namespace bbm

#endif // BBM_GEOMETRY_HPP
