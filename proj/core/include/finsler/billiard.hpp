#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "finsler/geometry.hpp"
#include "finsler/metrics.hpp"
#include "finsler/oval.hpp"

namespace finsler {

// A strictly convex table immersed in an ambient projective Finsler metric.
// Construction validates that the boundary stays well inside the metric's
// domain of validity (Euclidean clearance >= 0.05 for Funk/Hilbert domains,
// |x| < 2R for the magnetic metric).
class BilliardTable {
public:
    BilliardTable(std::shared_ptr<const Oval> boundary,
                  std::shared_ptr<const FinslerMetric> metric);

    const Oval& boundary() const { return *boundary_; }
    const FinslerMetric& metric() const { return *metric_; }
    std::shared_ptr<const Oval> boundary_ptr() const { return boundary_; }
    std::shared_ptr<const FinslerMetric> metric_ptr() const { return metric_; }

private:
    std::shared_ptr<const Oval> boundary_;
    std::shared_ptr<const FinslerMetric> metric_;
};

// Outgoing state after a reflection: boundary parameter and unit outgoing
// velocity (F(x(t), v) = 1, pointing strictly into the table).
struct RayState {
    double t{0.0};
    Vec2 v{1.0, 0.0};
};

struct Trajectory {
    Point2 source;
    double initial_angle{0.0};
    std::vector<double> params;    // boundary parameters of the bounces
    std::vector<Point2> points;    // bounce points x_1..x_n
    std::vector<Vec2> velocities;  // unit outgoing velocity after each bounce
    double exit_t{0.0};            // where the final ray leaves the table
    OrientedLine initial_line;
    OrientedLine final_line;
};

// Reflection off a straight mirror through x with the given unit tangent and
// inward normal: returns the outgoing unit velocity v such that the tangent
// lines to the indicatrix at u and at v meet the mirror line in one point
// (concurrent; parallel counts as meeting at infinity).
// Pre: F(x, u) = 1, u heads outward (dot(u, inward_normal) < 0), and the
// Euclidean incidence sine exceeds 1e-6.
Vec2 finsler_reflect(const FinslerMetric& metric, Point2 x, Vec2 mirror_tangent,
                     Vec2 inward_normal, Vec2 u);

// Concurrency defect of a reflection pair (u, v) at x: distance from the
// indicatrix tangent line at v to the meet of the other two lines (angle
// mismatch in the parallel case).
double reflection_residual(const FinslerMetric& metric, Point2 x,
                           Vec2 mirror_tangent, Vec2 u, Vec2 v);

// Geometric reflection law at boundary parameter t of the table.
Vec2 reflect_geometric(const BilliardTable& table, double t, Vec2 u);

// Variational reflection: the critical point of
// t -> dist(a, x(t)) + dist(x(t), b) near t_guess, refined until the
// derivative falls below 1e-8. Throws NoConvergence if no critical point is
// bracketed near the guess.
double reflect_variational(const BilliardTable& table, Point2 a, Point2 b,
                           double t_guess);

// One step of the billiard map: advance along the straight chord, renormalize
// the velocity on the new indicatrix, reflect.
RayState billiard_map(const BilliardTable& table, const RayState& state);

// Propagate a ray from an interior source through n reflections.
Trajectory propagate(const BilliardTable& table, Point2 source, double phi,
                     int bounces);

// Reverse the final line, propagate back, and compare with the initial line.
// True when the round trip reproduces the initial line within tol; expected
// true for reversible metrics, generally false for Funk.
bool reversibility_test(const BilliardTable& table, const Trajectory& traj,
                        double tol = 1e-7);
// Same, returning the actual defect |d alpha| + |d p|.
double reversibility_defect(const BilliardTable& table, const Trajectory& traj);

// Minkowski reflection invariance under projective maps x -> t x / (1 + l(x))
// that fix every line through the origin: reflects one ray off one mirror
// with the body K and with its image K1, returns the angle between the two
// outgoing directions. Throws ImageNotConvex when the image body fails
// validation.
double ak_invariance_test(const MinkowskiMetric& K, Vec2 ell, double t,
                          double mirror_angle, double incoming_angle);

struct Shot {
    std::vector<double> params;
    std::vector<Point2> points;
    double length{0.0};
    double reflection_residual{0.0};  // max direction mismatch over bounces
};

struct ShotOptions {
    int seeds_per_dim{8};       // regular grid for n <= 3, random beyond
    std::vector<std::vector<double>> extra_seeds;
    double dedup_tol{1e-4};
    double residual_tol{1e-7};
};

// All critical points of the total length of O x_1 ... x_n A found from the
// multistart seeds: maxima, minima and saddles alike. Every returned shot
// satisfies the reflection law at each bounce within residual_tol.
std::vector<Shot> n_bounce_shots(const BilliardTable& table, Point2 O, Point2 A,
                                 int bounces, const ShotOptions& opts = {});

// Billiard map acting on oriented lines crossing the table.
OrientedLine line_billiard_map(const BilliardTable& table, OrientedLine line);

// Central finite-difference determinant of the billiard map differential in
// (alpha, p) coordinates at the given state; h in [1e-7, 1e-4].
double jacobian_experiment(const BilliardTable& table, const RayState& state,
                           double h = 1e-5);

}  // namespace finsler
