#ifndef BBM_DYNAMICS_HPP
#define BBM_DYNAMICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "rng.hpp"
#include "vec2.hpp"

namespace bbm
{

/// Component tag used for the heavy disk wherever scatterer indices appear.
inline constexpr int kDiskComponent = -2;
inline constexpr int kNoComponent = -1;

enum class DiskMode
{
    free,    ///< run until disk-wall contact or the horizon
    stopped, ///< freeze the disk once its clearance drops to r + delta0
};

struct SimParams
{
    /// Mass ratio; +infinity selects the infinite-mass (frozen billiard) limit.
    double M = 1.0;
    double r = 0.05;
    double delta0 = 0.02;
    DiskMode mode = DiskMode::stopped;
    double horizon_time = std::numeric_limits<double>::infinity();
    std::uint64_t max_collisions = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t seed = 1;

    bool infinite_mass() const noexcept { return std::isinf(M); }
    bool has_horizon() const noexcept
    {
        return std::isfinite(horizon_time) ||
               max_collisions != std::numeric_limits<std::uint64_t>::max();
    }
    /// Clearance dist(Q, dD) at which the disk event fires.
    double disk_event_clearance() const noexcept
    {
        return mode == DiskMode::stopped ? r + delta0 : r;
    }

    void validate() const
    {
        if (!(M >= 1.0))
            throw ArgumentError("M must be >= 1");
        if (!(r > 0.0))
            throw ArgumentError("r must be > 0");
        if (!(delta0 > 0.0))
            throw ArgumentError("delta0 must be > 0");
        if (!(horizon_time > 0.0))
            throw ArgumentError("horizon time must be > 0");
    }
};

/// Full phase point. Q is not reduced to the unit cell, so Q - Q0 is the
/// physical displacement of the disk; q is kept in [0,1)^2.
struct SystemState
{
    Vec2 Q;
    Vec2 V;
    Vec2 q;
    Vec2 v;
    double t = 0.0;
    std::uint64_t n_collisions = 0;
    bool frozen = false;
    /// Surface the light particle currently touches (scatterer index,
    /// kDiskComponent, or kNoComponent).
    int contact = kNoComponent;
};

inline double energy(const SystemState& s, double M) noexcept
{
    if (std::isinf(M))
        return norm2(s.v);
    return norm2(s.v) + M * norm2(s.V);
}

enum class EventKind
{
    particle_scatterer = 0,
    particle_disk = 1,
    disk_stop = 2,
    disk_wall = 3,
    horizon = 4,
};

inline const char* to_string(EventKind k) noexcept
{
    switch (k) {
    case EventKind::particle_scatterer: return "particle_scatterer";
    case EventKind::particle_disk: return "particle_disk";
    case EventKind::disk_stop: return "disk_stop";
    case EventKind::disk_wall: return "disk_wall";
    case EventKind::horizon: return "horizon";
    }
    return "?";
}

struct CollisionEvent
{
    double time = 0.0;
    /// time - state time as computed by next_event; negative means "derive
    /// from time". Kept separately so flights advance by the exact root.
    double delay = -1.0;
    EventKind kind = EventKind::horizon;
    int scatterer = kNoComponent;
    int image_x = 0;
    int image_y = 0;
    /// Contact point (reduced to the unit cell).
    Vec2 contact;
    /// Particle-scatterer: into the free region. Particle-disk: from the
    /// disk center toward the particle. Disk events: from the wall toward Q.
    Vec2 normal;
};

/// Exact-law bookkeeping filled by apply_collision.
struct CollisionAudit
{
    std::uint64_t particle_disk_events = 0;
    std::uint64_t particle_scatterer_events = 0;
    double max_energy_error = 0.0;           // |E - 1| after every collision
    double max_normal_momentum_error = 0.0;  // |dv_perp + M dV_perp| at interparticle hits
    double max_kinetic_energy_error = 0.0;   // |E' - E| before renormalization
    double max_speed_jump_ratio = 0.0;       // | |v'| - |v| | / (2/sqrt M)
    double max_velocity_jump_ratio = 0.0;    // |V' - V| / (2/M)
    double max_transfer_identity_error = 0.0; // |dV + 2 w'_perp n / (M+1)|
    std::uint64_t bound_violations = 0;      // per-collision bounds exceeded
    std::uint64_t ties = 0;                  // events closer than kTieTolerance
    GeometryStats geometry;

    void merge(const CollisionAudit& o)
    {
        particle_disk_events += o.particle_disk_events;
        particle_scatterer_events += o.particle_scatterer_events;
        max_energy_error = std::max(max_energy_error, o.max_energy_error);
        max_normal_momentum_error = std::max(max_normal_momentum_error, o.max_normal_momentum_error);
        max_kinetic_energy_error = std::max(max_kinetic_energy_error, o.max_kinetic_energy_error);
        max_speed_jump_ratio = std::max(max_speed_jump_ratio, o.max_speed_jump_ratio);
        max_velocity_jump_ratio = std::max(max_velocity_jump_ratio, o.max_velocity_jump_ratio);
        max_transfer_identity_error =
            std::max(max_transfer_identity_error, o.max_transfer_identity_error);
        bound_violations += o.bound_violations;
        ties += o.ties;
        geometry.grazing_misses += o.geometry.grazing_misses;
    }
};

inline constexpr double kTieTolerance = 1e-13;
inline constexpr double kEnergyTolerance = 1e-10;
inline constexpr double kDriftLimit = 1e-6;

/// Rescale v so that |v|^2 + M |V|^2 = 1 exactly; V is left alone.
inline SystemState renormalize_energy(SystemState s, double M)
{
    const double v2 = norm2(s.v);
    if (!(v2 > 0.0))
        throw DomainError("cannot renormalize a particle at rest");
    const double target = std::isinf(M) ? 1.0 : 1.0 - M * norm2(s.V);
    if (!(target > 0.0))
        throw DomainError("disk carries the whole energy");
    const double f = std::sqrt(target / v2);
    if (std::abs(f - 1.0) > kDriftLimit)
        throw NumericalDriftError("energy renormalization factor " + std::to_string(f) +
                                  " deviates from 1");
    s.v *= f;
    return s;
}

namespace detail
{

/// Next hit of the light particle on a scatterer or on the (linearly
/// moving) disk, within `window`. Shared by the two-particle dynamics and the
/// frozen billiard so both perform identical arithmetic.
struct ParticleHits
{
    CircleHit scatterer;
    CircleHit disk;
};

inline ParticleHits particle_flight(const TorusTable& table, Vec2 q, Vec2 v, Vec2 disk_center,
                                    Vec2 disk_velocity, double disk_radius, double window,
                                    int contact, GeometryStats* stats)
{
    ParticleHits h;
    if (scatterer_hit_staged(table, q, v, window, contact, h.scatterer, stats) == RayStatus::inside)
        throw DomainError("light particle inside a scatterer");
    if (disk_radius > 0.0) {
        h.disk.t = h.scatterer.t + kTieTolerance;
        if (circle_images_hit(torus_displacement(disk_center, q), v - disk_velocity, disk_radius,
                              window, kDiskComponent, contact == kDiskComponent, h.disk,
                              stats) == RayStatus::inside)
            throw DomainError("light particle inside the disk");
    }
    return h;
}

/// Specular reflection of the relative velocity v - V about the normal.
inline Vec2 reflect(Vec2 v, Vec2 V, Vec2 n) noexcept { return v - 2.0 * dot(v - V, n) * n; }

inline void check_state(const SystemState& s, const SimParams& p, const TorusTable& table)
{
    if (!s.frozen) {
        const double e = energy(s, p.M);
        if (!(std::abs(e - 1.0) <= kEnergyTolerance))
            throw DomainError("state is off the energy shell: E - 1 = " + std::to_string(e - 1.0));
    }
    const Vec2 Qw = wrap_point(s.Q);
    if (torus_distance(Qw, s.q) < p.r * (1.0 - 1e-9))
        throw DomainError("light particle inside the disk");
    const double need = (p.mode == DiskMode::stopped && !s.frozen) ? p.r + p.delta0 : p.r;
    if (dist_to_boundary(Qw, table) < need - 1e-12)
        throw DomainError("disk clearance below the admissible limit");
}

} // namespace detail

/// Earliest event from `s`: particle-scatterer, particle-disk, disk
/// stop/wall contact, or the horizon. Ties within kTieTolerance resolve in
/// the order particle_scatterer < particle_disk < disk events.
inline CollisionEvent next_event(const SystemState& s, const SimParams& p, const TorusTable& table,
                                 CollisionAudit* audit = nullptr)
{
    detail::check_state(s, p, table);
    GeometryStats* gstats = audit ? &audit->geometry : nullptr;
    constexpr double inf = std::numeric_limits<double>::infinity();

    const double speed = norm(s.v);
    const double flight_cap = table.l_max() / speed;
    const double remaining = p.horizon_time - s.t;
    const bool count_done = s.n_collisions >= p.max_collisions;
    if (count_done || remaining <= 0.0) {
        CollisionEvent ev;
        ev.time = count_done ? s.t : std::max(s.t, p.horizon_time);
        ev.kind = EventKind::horizon;
        return ev;
    }
    const double window = std::min(flight_cap, remaining);

    // (a), (b): light particle vs scatterers and vs the disk
    const Vec2 Qw = wrap_point(s.Q);
    const Vec2 disk_v = s.frozen ? Vec2{} : s.V;
    const auto hit = detail::particle_flight(table, s.q, s.v, Qw, disk_v, p.r, window, s.contact,
                                             gstats);
    const detail::CircleHit& hs = hit.scatterer;
    const detail::CircleHit& hd = hit.disk;

    // (c) disk vs walls
    detail::CircleHit hw;
    const Vec2 V = s.V;
    if (!s.frozen && (V.x != 0.0 || V.y != 0.0)) {
        hw.t = std::min(hs.t, hd.t) + kTieTolerance;
        const double extra = p.disk_event_clearance();
        for (std::size_t i = 0; i < table.size(); ++i) {
            const auto& sc = table[i];
            detail::circle_images_hit(torus_displacement(sc.center, Qw), V, sc.radius + extra,
                                      window, static_cast<int>(i), false, hw, nullptr);
        }
    }

    const double t_min = std::min({hs.t, hd.t, hw.t});
    if (!(t_min < inf)) {
        if (remaining <= flight_cap) {
            CollisionEvent ev;
            ev.time = p.horizon_time;
            ev.kind = EventKind::horizon;
            return ev;
        }
        if (!p.has_horizon())
            throw ContractViolation("no event found and no finite horizon configured");
        throw FiniteHorizonError("no collision within l_max of the light particle");
    }

    int n_close = 0;
    for (double t : {hs.t, hd.t, hw.t})
        if (t <= t_min + kTieTolerance)
            ++n_close;
    if (n_close > 1 && audit)
        ++audit->ties;

    CollisionEvent ev;
    if (hs.t <= t_min + kTieTolerance) {
        const auto& sc = table[static_cast<std::size_t>(hs.component)];
        ev.kind = EventKind::particle_scatterer;
        ev.time = s.t + hs.t;
        ev.delay = hs.t;
        ev.scatterer = hs.component;
        ev.image_x = hs.ix;
        ev.image_y = hs.iy;
        ev.normal = hs.rel / sc.radius;
        ev.contact = wrap_point(s.q + hs.t * s.v);
    } else if (hd.t <= t_min + kTieTolerance) {
        ev.kind = EventKind::particle_disk;
        ev.time = s.t + hd.t;
        ev.delay = hd.t;
        ev.scatterer = kDiskComponent;
        ev.image_x = hd.ix;
        ev.image_y = hd.iy;
        ev.normal = hd.rel / p.r;
        ev.contact = wrap_point(s.q + hd.t * s.v);
    } else {
        const auto& sc = table[static_cast<std::size_t>(hw.component)];
        ev.kind = p.mode == DiskMode::stopped ? EventKind::disk_stop : EventKind::disk_wall;
        ev.time = s.t + hw.t;
        ev.delay = hw.t;
        ev.scatterer = hw.component;
        ev.image_x = hw.ix;
        ev.image_y = hw.iy;
        ev.normal = normalized(hw.rel);
        ev.contact = wrap_point(Qw + hw.t * V - sc.radius * ev.normal);
    }
    return ev;
}

/// Advance both particles to the event time and apply the collision law.
inline SystemState apply_collision(SystemState s, const CollisionEvent& ev, const SimParams& p,
                                   CollisionAudit* audit = nullptr)
{
    if (ev.time < s.t)
        throw ContractViolation("event lies in the past");
    const double dt = ev.delay >= 0.0 ? ev.delay : ev.time - s.t;
    s.q = wrap_point(s.q + dt * s.v);
    s.Q = s.Q + dt * s.V;
    s.t = ev.time;

    auto track_energy = [&](const SystemState& st) {
        if (audit && !st.frozen)
            audit->max_energy_error =
                std::max(audit->max_energy_error, std::abs(energy(st, p.M) - 1.0));
    };

    switch (ev.kind) {
    case EventKind::particle_scatterer: {
        const Vec2 n = ev.normal;
        const double speed = norm(s.v);
        s.v = detail::reflect(s.v, Vec2{}, n);
        if (s.frozen)
            s.v *= speed / norm(s.v);
        else
            s = renormalize_energy(s, p.M);
        s.contact = ev.scatterer;
        ++s.n_collisions;
        if (audit) {
            ++audit->particle_scatterer_events;
            track_energy(s);
        }
        break;
    }
    case EventKind::particle_disk: {
        const Vec2 n = ev.normal;
        const Vec2 v_old = s.v, V_old = s.V;
        const double e_old = energy(s, p.M);
        if (p.infinite_mass() || s.frozen) {
            const double speed = norm(s.v);
            s.v = detail::reflect(s.v, s.frozen ? Vec2{} : s.V, n);
            if (s.frozen)
                s.v *= speed / norm(s.v);
        } else {
            const double M = p.M;
            const double vp = dot(s.v, n), Vp = dot(s.V, n);
            const double vp_new = -((M - 1.0) / (M + 1.0)) * vp + (2.0 * M / (M + 1.0)) * Vp;
            const double Vp_new = ((M - 1.0) / (M + 1.0)) * Vp + (2.0 / (M + 1.0)) * vp;
            s.v += (vp_new - vp) * n;
            s.V += (Vp_new - Vp) * n;
        }
        const double e_pre = energy(s, p.M);
        if (!s.frozen)
            s = renormalize_energy(s, p.M);
        s.contact = kDiskComponent;
        ++s.n_collisions;
        if (audit && !p.infinite_mass() && !s.frozen) {
            const double M = p.M;
            ++audit->particle_disk_events;
            audit->max_kinetic_energy_error =
                std::max(audit->max_kinetic_energy_error, std::abs(e_pre - e_old));
            const double mom_old = dot(v_old, n) + M * dot(V_old, n);
            const double mom_new = dot(s.v, n) + M * dot(s.V, n);
            audit->max_normal_momentum_error =
                std::max(audit->max_normal_momentum_error, std::abs(mom_new - mom_old));
            const double dspeed = std::abs(norm(s.v) - norm(v_old)) / (2.0 / std::sqrt(M));
            const double dV = norm(s.V - V_old) / (2.0 / M);
            audit->max_speed_jump_ratio = std::max(audit->max_speed_jump_ratio, dspeed);
            audit->max_velocity_jump_ratio = std::max(audit->max_velocity_jump_ratio, dV);
            if (dspeed > 1.0 + 1e-12 || dV > 1.0 + 1e-12)
                ++audit->bound_violations;
            const double w_perp = dot(s.v - s.V, n);
            const Vec2 predicted = (-2.0 * w_perp / (M + 1.0)) * n;
            audit->max_transfer_identity_error = std::max(
                audit->max_transfer_identity_error, norm((s.V - V_old) - predicted) * M);
            track_energy(s);
        } else if (audit) {
            ++audit->particle_disk_events;
        }
        break;
    }
    case EventKind::disk_stop:
        if (p.mode != DiskMode::stopped || s.frozen)
            throw ContractViolation("disk_stop event outside the stopped dynamics");
        s.V = Vec2{};
        s.frozen = true;
        break;
    case EventKind::disk_wall:
        if (p.mode != DiskMode::free)
            throw ContractViolation("disk_wall event outside the free dynamics");
        break;
    case EventKind::horizon:
        break;
    }
    return s;
}

/// Initial data: q uniform in D minus the disk by rejection, v uniform on the
/// circle of radius sqrt(1 - M |V0|^2).
inline SystemState sample_initial_state(Vec2 Q0, Vec2 V0, const SimParams& p, const TorusTable& table,
                                        Rng& rng)
{
    p.validate();
    const double disk_energy = p.infinite_mass() ? 0.0 : p.M * norm2(V0);
    if (p.infinite_mass() && norm2(V0) != 0.0)
        throw ArgumentError("an infinitely heavy disk cannot move");
    if (!(disk_energy < 1.0))
        throw ArgumentError("M |V0|^2 must be < 1");
    const double need = p.mode == DiskMode::stopped ? p.r + p.delta0 : p.r;
    if (!(dist_to_boundary(wrap_point(Q0), table) > need))
        throw ArgumentError("initial disk position is not admissible");
    SystemState s;
    s.Q = Q0;
    s.V = V0;
    const Vec2 Qw = wrap_point(Q0);
    for (;;) {
        const Vec2 q{rng.uniform(), rng.uniform()};
        if (dist_to_boundary(q, table) > 0.0 && torus_distance(q, Qw) > p.r) {
            s.q = q;
            break;
        }
    }
    s.v = std::sqrt(1.0 - disk_energy) * rng.unit_vector();
    return renormalize_energy(s, p.M);
}

/// Negate both velocities (time reversal of the Hamiltonian flow).
inline SystemState reversed(SystemState s) noexcept
{
    s.v = -s.v;
    s.V = -s.V;
    return s;
}

struct ObservationPlan
{
    /// Record (t, n, Q, V) after every particle collision.
    bool record_collisions = false;
    /// Absolute times (ascending) at which to sample (Q, V) exactly.
    std::vector<double> sample_times;
    /// Record V' - V at every particle-disk collision.
    bool record_momentum_transfers = false;
    /// After the disk freezes nothing observable changes; skip to the end.
    bool stop_particle_when_frozen = true;
};

struct TrajectoryRow
{
    double t = 0.0;
    std::uint64_t n_collisions = 0;
    Vec2 Q;
    Vec2 V;
    bool frozen = false;
};

struct Trajectory
{
    std::vector<TrajectoryRow> collisions;
    std::vector<TrajectoryRow> samples;
    std::vector<Vec2> momentum_transfers;
    SystemState final_state;
    bool wall_contact = false;
    double wall_contact_time = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> stop_time;
    CollisionAudit audit;
};

/// Event loop until the horizon, or (free mode) the first disk-wall contact.
inline Trajectory evolve(SystemState s, const SimParams& p, const TorusTable& table,
                         const ObservationPlan& plan = {})
{
    p.validate();
    if (!p.has_horizon())
        throw ContractViolation("evolve needs a finite horizon time or collision count");
    Trajectory traj;
    std::size_t next_sample = 0;
    auto emit_until = [&](double t_end, bool inclusive) {
        while (next_sample < plan.sample_times.size()) {
            const double T = plan.sample_times[next_sample];
            if (T > t_end || (!inclusive && T == t_end))
                break;
            const double dt = T - s.t;
            traj.samples.push_back({T, s.n_collisions, s.Q + dt * s.V, s.V, s.frozen});
            ++next_sample;
        }
    };

    for (;;) {
        const CollisionEvent ev = next_event(s, p, table, &traj.audit);
        emit_until(ev.time, ev.kind == EventKind::horizon);
        const Vec2 V_old = s.V;
        s = apply_collision(s, ev, p, &traj.audit);
        if (ev.kind == EventKind::horizon)
            break;
        if (ev.kind == EventKind::disk_wall) {
            traj.wall_contact = true;
            traj.wall_contact_time = s.t;
            break;
        }
        if (ev.kind == EventKind::disk_stop) {
            traj.stop_time = s.t;
            if (plan.stop_particle_when_frozen) {
                // Q and V are constant from here on.
                const double t_end =
                    std::isfinite(p.horizon_time) ? p.horizon_time : s.t;
                emit_until(t_end, true);
                break;
            }
            continue;
        }
        if (plan.record_momentum_transfers && ev.kind == EventKind::particle_disk)
            traj.momentum_transfers.push_back(s.V - V_old);
        if (plan.record_collisions)
            traj.collisions.push_back({s.t, s.n_collisions, s.Q, s.V, s.frozen});
    }
    traj.final_state = s;
    return traj;
}

} // namespace bbm

#endif // BBM_DYNAMICS_HPP
