#ifndef BBM_VEC2_HPP
#define BBM_VEC2_HPP

#include <algorithm>
#include <cmath>

namespace bbm
{

struct Vec2
{
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(Vec2 o) noexcept { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) noexcept { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator-(Vec2 a) noexcept { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator/(Vec2 a, double s) noexcept { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) noexcept = default;
};

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
constexpr double norm2(Vec2 a) noexcept { return dot(a, a); }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
inline Vec2 normalized(Vec2 a) noexcept { return a / norm(a); }

/// Rotate by `angle` radians counterclockwise.
inline Vec2 rotated(Vec2 a, double angle) noexcept
{
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * a.x - s * a.y, s * a.x + c * a.y};
}

/// Plain 2x2 matrix, row-major: [[a, b], [c, d]].
struct Mat2
{
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    static constexpr Mat2 identity() noexcept { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 diag(double p, double q) noexcept { return {p, 0.0, 0.0, q}; }
    static constexpr Mat2 outer(Vec2 u, Vec2 v) noexcept
    {
        return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y};
    }

    constexpr Mat2 transposed() const noexcept { return {a, c, b, d}; }
    constexpr double trace() const noexcept { return a + d; }
    constexpr double det() const noexcept { return a * d - b * c; }

    constexpr Mat2& operator+=(const Mat2& o) noexcept
    {
        a += o.a; b += o.b; c += o.c; d += o.d;
        return *this;
    }
    constexpr Mat2& operator*=(double s) noexcept
    {
        a *= s; b *= s; c *= s; d *= s;
        return *this;
    }

    friend constexpr Mat2 operator+(Mat2 m, const Mat2& o) noexcept { return m += o; }
    friend constexpr Mat2 operator-(const Mat2& m, const Mat2& o) noexcept
    {
        return {m.a - o.a, m.b - o.b, m.c - o.c, m.d - o.d};
    }
    friend constexpr Mat2 operator*(double s, Mat2 m) noexcept { return m *= s; }
    friend constexpr Mat2 operator*(Mat2 m, double s) noexcept { return m *= s; }
    friend constexpr Mat2 operator/(const Mat2& m, double s) noexcept
    {
        return {m.a / s, m.b / s, m.c / s, m.d / s};
    }
    friend constexpr Mat2 operator*(const Mat2& m, const Mat2& o) noexcept
    {
        return {m.a * o.a + m.b * o.c, m.a * o.b + m.b * o.d,
                m.c * o.a + m.d * o.c, m.c * o.b + m.d * o.d};
    }
    friend constexpr Vec2 operator*(const Mat2& m, Vec2 v) noexcept
    {
        return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
    }
    friend constexpr bool operator==(const Mat2&, const Mat2&) noexcept = default;
};

inline constexpr Mat2 outer(Vec2 u, Vec2 v) noexcept { return Mat2::outer(u, v); }

inline double frobenius(const Mat2& m) noexcept
{
    return std::sqrt(m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d);
}

inline double max_abs(const Mat2& m) noexcept
{
    return std::max({std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d)});
}

/// Eigen-decomposition of a symmetric 2x2 matrix; `vec1` belongs to `lambda1`
/// and `lambda1 <= lambda2`.
struct SymEigen
{
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    Vec2 vec1{1.0, 0.0};
    Vec2 vec2{0.0, 1.0};
};

/// Closed form; uses the off-diagonal average so tiny asymmetries are ignored.
inline SymEigen sym_eigen(const Mat2& m) noexcept
{
    const double off = 0.5 * (m.b + m.c);
    const double mean = 0.5 * (m.a + m.d);
    const double half_diff = 0.5 * (m.a - m.d);
    const double rad = std::hypot(half_diff, off);
    SymEigen e;
    e.lambda1 = mean - rad;
    e.lambda2 = mean + rad;
    if (rad == 0.0)
        return e;
    // Eigenvector for lambda2 is (cos t, sin t) with tan 2t = 2 off / (a - d).
    const double theta = 0.5 * std::atan2(off, half_diff);
    e.vec2 = {std::cos(theta), std::sin(theta)};
    e.vec1 = {-e.vec2.y, e.vec2.x};
    return e;
}

/// V diag(f1, f2) V^T for an eigen-decomposition.
inline Mat2 recompose(const SymEigen& e, double f1, double f2) noexcept
{
    return f1 * Mat2::outer(e.vec1, e.vec1) + f2 * Mat2::outer(e.vec2, e.vec2);
}

inline double min_eigenvalue(const Mat2& m) noexcept { return sym_eigen(m).lambda1; }

} // namespace bbm

#endif // BBM_VEC2_HPP
