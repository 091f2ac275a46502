#pragma once

#include <cmath>
#include <numbers>

namespace finsler {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
    double x{0.0};
    double y{0.0};

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(Vec2 r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    friend constexpr Vec2 operator*(double s, Vec2 v) { return {v.x * s, v.y * s}; }

    Vec2& operator+=(Vec2 r) { x += r.x; y += r.y; return *this; }
    Vec2& operator-=(Vec2 r) { x -= r.x; y -= r.y; return *this; }

    double norm() const { return std::hypot(x, y); }
    constexpr double norm2() const { return x * x + y * y; }
    Vec2 normalized() const { double n = norm(); return {x / n, y / n}; }
    // Direction angle in [0, 2pi).
    double angle() const {
        double a = std::atan2(y, x);
        return a < 0.0 ? a + kTwoPi : a;
    }
};

using Point2 = Vec2;

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
// Rotation by +pi/2.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }
inline Vec2 rotate(Vec2 v, double phi) {
    double c = std::cos(phi), s = std::sin(phi);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}
inline Vec2 unit_dir(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Wrap an angle into [0, 2pi).
inline double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

// Signed circular difference a-b reduced to (-pi, pi].
inline double angle_diff(double a, double b) {
    double d = std::fmod(a - b, kTwoPi);
    if (d <= -std::numbers::pi) d += kTwoPi;
    if (d > std::numbers::pi) d -= kTwoPi;
    return d;
}

// Circular distance between oval parameters living on [0, period).
inline double cyclic_dist(double a, double b, double period) {
    double d = std::fmod(std::fabs(a - b), period);
    return std::min(d, period - d);
}

// An oriented line in the plane, stored as (alpha, p): alpha is the direction
// angle of the line, p its signed distance from the origin. The point set is
// { P : <P, n(alpha)> = p } with n(alpha) = (sin alpha, -cos alpha) and the
// travel direction d(alpha) = (cos alpha, sin alpha). With this frame the
// dual of a point (a, b) is exactly p(alpha) = a sin(alpha) - b cos(alpha).
struct OrientedLine {
    double alpha{0.0};  // in [0, 2pi)
    double p{0.0};

    static Vec2 normal(double alpha) { return {std::sin(alpha), -std::cos(alpha)}; }
    static Vec2 direction(double alpha) { return {std::cos(alpha), std::sin(alpha)}; }

    Vec2 normal() const { return normal(alpha); }
    Vec2 direction() const { return direction(alpha); }
    // Foot of the perpendicular from the origin.
    Vec2 base_point() const { return p * normal(); }
    OrientedLine reversed() const { return {wrap_angle(alpha + std::numbers::pi), -p}; }
    double signed_distance(Point2 q) const { return dot(q, normal()) - p; }
};

// The line through P with direction angle alpha.
inline OrientedLine line_from_point_dir(Point2 P, double alpha) {
    return {wrap_angle(alpha), P.x * std::sin(alpha) - P.y * std::cos(alpha)};
}

// Dual "line" of a plane point: the sine curve alpha -> p of all oriented
// lines through that point.
inline double dual_of_point(Point2 A, double alpha) {
    return A.x * std::sin(alpha) - A.y * std::cos(alpha);
}

}  // namespace finsler
