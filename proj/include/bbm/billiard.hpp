#ifndef BBM_BILLIARD_HPP
#define BBM_BILLIARD_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "vec2.hpp"

namespace bbm
{

/// Point of the collision space of the frozen-disk billiard.
///
/// `r` is arclength measured counterclockwise from the angle-0 point of the
/// circle; `phi` is the signed angle from the normal (pointing into the free
/// region) to the outgoing velocity, positive counterclockwise.
struct CollisionCoord
{
    int component = 0; ///< scatterer index or kDiskComponent
    double r = 0.0;
    double phi = 0.0;
};

/// Phase point of the unit-speed light particle right after a reflection.
struct BilliardState
{
    Vec2 q;        ///< on a boundary, reduced to the unit cell
    Vec2 w;        ///< outgoing unit velocity
    int contact = kNoComponent;
    Vec2 normal;   ///< normal of the contact circle at q
};

/// One application of the collision map, seen from the new collision.
struct BilliardStep
{
    double s = 0.0;      ///< flight length to this collision
    int component = 0;
    Vec2 normal;         ///< into the free region
    double cos_phi = 0.0;
    double curvature = 0.0;
};

/// Dispersing billiard on D minus the disk P(Q), with the disk frozen.
class FrozenBilliard
{
public:
    FrozenBilliard(const TorusTable& table, Vec2 Q, double r_disk)
        : table_(&table), Q_(wrap_point(Q)), r_disk_(r_disk)
    {
        if (!(r_disk >= 0.0))
            throw ArgumentError("disk radius must be >= 0");
        if (r_disk > 0.0 && !(dist_to_boundary(Q_, table) > r_disk))
            throw DomainError("disk position is not admissible");
        perimeter_total_ = table.boundary_length() + 2.0 * std::numbers::pi * r_disk;
    }

    const TorusTable& table() const noexcept { return *table_; }
    Vec2 disk_center() const noexcept { return Q_; }
    double disk_radius() const noexcept { return r_disk_; }
    bool has_disk() const noexcept { return r_disk_ > 0.0; }
    /// length(dD) + length(dP).
    double total_perimeter() const noexcept { return perimeter_total_; }

    Vec2 center(int component) const
    {
        return component == kDiskComponent ? Q_ : (*table_)[static_cast<std::size_t>(component)].center;
    }
    double radius(int component) const
    {
        return component == kDiskComponent ? r_disk_
                                           : (*table_)[static_cast<std::size_t>(component)].radius;
    }
    double perimeter(int component) const { return 2.0 * std::numbers::pi * radius(component); }

    /// (r, phi) -> boundary point and outgoing unit velocity.
    BilliardState to_state(const CollisionCoord& x) const
    {
        const double rho = radius(x.component);
        const double theta = x.r / rho;
        const Vec2 n{std::cos(theta), std::sin(theta)};
        BilliardState st;
        st.q = wrap_point(center(x.component) + rho * n);
        st.w = rotated(n, x.phi);
        st.contact = x.component;
        st.normal = n;
        return st;
    }

    CollisionCoord to_coord(const BilliardState& st) const
    {
        const double rho = radius(st.contact);
        const Vec2 rel = torus_displacement(center(st.contact), st.q);
        double theta = std::atan2(rel.y, rel.x);
        if (theta < 0.0)
            theta += 2.0 * std::numbers::pi;
        CollisionCoord x;
        x.component = st.contact;
        x.r = rho * theta;
        if (x.r >= perimeter(st.contact))
            x.r -= perimeter(st.contact);
        const Vec2 n = rel / norm(rel);
        x.phi = std::atan2(cross(n, st.w), dot(n, st.w));
        return x;
    }

    /// Fly to the next boundary and reflect. Mirrors next_event /
    /// apply_collision with M = infinity operation for operation.
    BilliardStep step(BilliardState& st, GeometryStats* stats = nullptr) const
    {
        const double window = table_->l_max() / norm(st.w);
        const auto hit = detail::particle_flight(*table_, st.q, st.w, Q_, Vec2{},
                                                 r_disk_, window, st.contact, stats);
        const double t_min = std::min(hit.scatterer.t, hit.disk.t);
        if (!(t_min < std::numeric_limits<double>::infinity()))
            throw FiniteHorizonError("no collision within l_max");
        BilliardStep out;
        double t;
        if (hit.scatterer.t <= t_min + kTieTolerance) {
            t = hit.scatterer.t;
            out.component = hit.scatterer.component;
            out.normal = hit.scatterer.rel /
                         (*table_)[static_cast<std::size_t>(out.component)].radius;
        } else {
            t = hit.disk.t;
            out.component = kDiskComponent;
            out.normal = hit.disk.rel / r_disk_;
        }
        st.q = wrap_point(st.q + t * st.w);
        st.w = detail::reflect(st.w, Vec2{}, out.normal);
        st.w *= std::sqrt(1.0 / norm2(st.w));
        st.contact = out.component;
        st.normal = out.normal;
        out.s = t;
        out.cos_phi = dot(st.w, out.normal);
        out.curvature = 1.0 / radius(out.component);
        return out;
    }

    /// Collision map F_Q in (r, phi) coordinates; also returns the flight length.
    std::pair<CollisionCoord, double> map(const CollisionCoord& x) const
    {
        BilliardState st = to_state(x);
        const auto stp = step(st);
        return {to_coord(st), stp.s};
    }

    /// Draw from mu_Q: density proportional to cos(phi) dr dphi.
    CollisionCoord sample(Rng& rng) const
    {
        const double u = rng.uniform() * perimeter_total_;
        double acc = 0.0;
        CollisionCoord x;
        x.component = kDiskComponent;
        x.r = u - (perimeter_total_ - (has_disk() ? perimeter(kDiskComponent) : 0.0));
        for (std::size_t i = 0; i < table_->size(); ++i) {
            const double p = perimeter(static_cast<int>(i));
            if (u < acc + p) {
                x.component = static_cast<int>(i);
                x.r = u - acc;
                break;
            }
            acc += p;
        }
        if (x.component == kDiskComponent && !has_disk()) {
            x.component = static_cast<int>(table_->size()) - 1;
            x.r = 0.0;
        }
        x.r = std::clamp(x.r, 0.0, std::nextafter(perimeter(x.component), 0.0));
        x.phi = std::asin(2.0 * rng.uniform_open() - 1.0);
        return x;
    }

    /// Position of x on the concatenated boundary (scatterers in order, then
    /// the disk); used to compare r-marginals across components.
    double global_arclength(const CollisionCoord& x) const
    {
        if (x.component == kDiskComponent)
            return table_->boundary_length() + x.r;
        double acc = 0.0;
        for (int i = 0; i < x.component; ++i)
            acc += perimeter(i);
        return acc + x.r;
    }

private:
    const TorusTable* table_;
    Vec2 Q_;
    double r_disk_;
    double perimeter_total_;
};

/// F_Q as a free function; returns the image and the flight length.
inline std::pair<CollisionCoord, double> billiard_map(Vec2 Q, const CollisionCoord& x,
                                                      const TorusTable& table, double r_disk)
{
    return FrozenBilliard(table, Q, r_disk).map(x);
}

inline CollisionCoord sample_mu_Q(const TorusTable& table, Vec2 Q, double r_disk, Rng& rng)
{
    return FrozenBilliard(table, Q, r_disk).sample(rng);
}

/// Momentum-transfer observable: -2 cos(phi) n on the disk, 0 elsewhere.
inline Vec2 observable_A(const CollisionCoord& x, double r_disk)
{
    if (x.component != kDiskComponent)
        return {};
    const double theta = x.r / r_disk;
    const Vec2 n{std::cos(theta), std::sin(theta)};
    return -2.0 * std::cos(x.phi) * n;
}

/// Same observable from a post-collision state.
inline Vec2 observable_A(int component, Vec2 normal, Vec2 w_out) noexcept
{
    if (component != kDiskComponent)
        return {};
    return -2.0 * dot(w_out, normal) * normal;
}

/// Mean free path pi (Area(D) - Area(P)) / (length(dD) + length(dP)).
inline double mean_free_path(const TorusTable& table, double r_disk) noexcept
{
    const double pi = std::numbers::pi;
    return pi * (table.area() - pi * r_disk * r_disk) / (table.boundary_length() + 2.0 * pi * r_disk);
}

// ---------------------------------------------------------------------------
// Wavefront cocycle
// ---------------------------------------------------------------------------

struct Wavefront
{
    double B = 0.0;      ///< curvature of the front, precollisional
    double log_dq = 0.0; ///< accumulated log of the transverse width |dq|
};

inline constexpr double kCocycleGrazing = 1e-9;

/// Reflection at a boundary of curvature K followed by a flight of length
/// s_next: B+ = B- + 2K / cos(phi), |dq| grows by 1 + s B+, and the next
/// precollisional curvature is B+ / (1 + s B+).
inline Wavefront cocycle_step(Wavefront w, double K, double phi, double s_next)
{
    const double c = std::cos(phi);
    if (!(c >= kCocycleGrazing))
        throw GrazingStepError("cos(phi) below the cocycle grazing guard");
    const double b_plus = w.B + 2.0 * K / c;
    const double factor = 1.0 + s_next * b_plus;
    w.log_dq += std::log(factor);
    w.B = b_plus / factor;
    return w;
}

struct LyapunovEstimate
{
    double chi = 0.0;
    double stderr = 0.0;
    double min_free_path = std::numeric_limits<double>::infinity();
    std::uint64_t steps = 0;
    std::uint64_t skipped = 0;
};

/// Per-collision Lyapunov exponent from the curvature cocycle along a
/// mu_Q-random orbit started with a flat front.
inline LyapunovEstimate lyapunov_exponent(Vec2 Q, const TorusTable& table, double r_disk,
                                          std::uint64_t n, Rng& rng)
{
    if (n < 1000)
        throw ArgumentError("lyapunov_exponent needs n >= 1000");
    const FrozenBilliard bil(table, Q, r_disk);
    BilliardState st = bil.to_state(bil.sample(rng));
    double K = 1.0 / bil.radius(st.contact);
    double cos_phi = dot(st.w, st.normal);
    Wavefront front;
    std::vector<double> terms;
    terms.reserve(n);
    LyapunovEstimate est;
    for (std::uint64_t k = 0; k < n; ++k) {
        const BilliardStep stp = bil.step(st);
        est.min_free_path = std::min(est.min_free_path, stp.s);
        if (cos_phi >= kCocycleGrazing) {
            const double before = front.log_dq;
            front = cocycle_step(front, K, std::acos(std::min(1.0, cos_phi)), stp.s);
            terms.push_back(front.log_dq - before);
        } else {
            ++est.skipped;
            front.B = 0.0;
        }
        K = stp.curvature;
        cos_phi = stp.cos_phi;
    }
    const auto bm = stats::batch_means(terms, 32);
    est.chi = bm.mean;
    est.stderr = bm.stderr;
    est.steps = n;
    return est;
}

/// Independent estimate from the growth of the separation between the orbit
/// and a shadow orbit offset by `eps` in (r, phi), renormalized every step.
inline LyapunovEstimate lyapunov_separation(Vec2 Q, const TorusTable& table, double r_disk,
                                            std::uint64_t n, Rng& rng, double eps = 1e-10)
{
    if (n < 1000)
        throw ArgumentError("lyapunov_separation needs n >= 1000");
    const FrozenBilliard bil(table, Q, r_disk);
    CollisionCoord x = bil.sample(rng);
    Vec2 u = rng.unit_vector();
    std::vector<double> terms;
    terms.reserve(n);
    LyapunovEstimate est;
    for (std::uint64_t k = 0; k < n; ++k) {
        CollisionCoord y = x;
        y.r += eps * u.x;
        y.phi += eps * u.y;
        const double per = bil.perimeter(x.component);
        if (y.r < 0.0)
            y.r += per;
        if (y.r >= per)
            y.r -= per;
        const auto [x1, s] = bil.map(x);
        est.min_free_path = std::min(est.min_free_path, s);
        bool ok = std::abs(y.phi) < 0.5 * std::numbers::pi;
        CollisionCoord y1;
        if (ok) {
            y1 = bil.map(y).first;
            ok = y1.component == x1.component;
        }
        if (ok) {
            const double per1 = bil.perimeter(x1.component);
            double dr = y1.r - x1.r;
            if (dr > 0.5 * per1)
                dr -= per1;
            if (dr < -0.5 * per1)
                dr += per1;
            const Vec2 d{dr, y1.phi - x1.phi};
            const double len = norm(d);
            terms.push_back(std::log(len / eps));
            u = d / len;
        } else {
            // The shadow crossed a singularity; restart it along the same direction.
            ++est.skipped;
        }
        x = x1;
    }
    const auto bm = stats::batch_means(terms, 32);
    est.chi = bm.mean;
    est.stderr = bm.stderr;
    est.steps = n;
    return est;
}

struct FreePathEstimate
{
    double mean = 0.0;
    double stderr = 0.0;
    std::uint64_t n = 0;
};

/// Average flight length over n collisions of a mu_Q-started orbit.
inline FreePathEstimate empirical_mfp(Vec2 Q, const TorusTable& table, double r_disk,
                                      std::uint64_t n, Rng& rng)
{
    if (n == 0)
        throw ArgumentError("empirical_mfp needs n > 0");
    const FrozenBilliard bil(table, Q, r_disk);
    BilliardState st = bil.to_state(bil.sample(rng));
    const std::uint64_t n_batches = std::min<std::uint64_t>(32, n);
    const std::uint64_t per = n / n_batches;
    stats::Moments batches;
    double total = 0.0;
    for (std::uint64_t b = 0; b < n_batches; ++b) {
        const std::uint64_t len = b + 1 == n_batches ? n - per * b : per;
        double sum = 0.0;
        for (std::uint64_t k = 0; k < len; ++k)
            sum += bil.step(st).s;
        total += sum;
        batches.add(sum / static_cast<double>(len));
    }
    FreePathEstimate out;
    out.mean = total / static_cast<double>(n);
    out.stderr = batches.stderr_mean();
    out.n = n;
    return out;
}

/// Row of the orbit diagnostic dump.
struct OrbitRow
{
    std::uint64_t step = 0;
    int component = 0;
    double r = 0.0;
    double phi = 0.0;
    double s = 0.0;
    double log_j = 0.0; ///< accumulated log |dq|
};

inline std::vector<OrbitRow> orbit_dump(Vec2 Q, const TorusTable& table, double r_disk,
                                        std::uint64_t n, Rng& rng)
{
    const FrozenBilliard bil(table, Q, r_disk);
    BilliardState st = bil.to_state(bil.sample(rng));
    Wavefront front;
    std::vector<OrbitRow> rows;
    rows.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        const CollisionCoord x = bil.to_coord(st);
        const double K = 1.0 / bil.radius(st.contact);
        const BilliardStep stp = bil.step(st);
        if (std::cos(x.phi) >= kCocycleGrazing)
            front = cocycle_step(front, K, x.phi, stp.s);
        rows.push_back({k, x.component, x.r, x.phi, stp.s, front.log_dq});
    }
    return rows;
}

} // namespace bbm

#endif // BBM_BILLIARD_HPP
