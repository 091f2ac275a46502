#pragma once

#include <memory>
#include <string>
#include <vector>

#include "finsler/geometry.hpp"
#include "finsler/numerics.hpp"
#include "finsler/oval.hpp"

namespace finsler {

// Constant-field magnetic billiard: unit-speed motion along counterclockwise
// Larmor circles of radius R with specular reflection off the oval. The
// weak-field condition min curvature > 1/R (trajectory arcs cannot touch the
// boundary from inside) is validated at construction.
class MagneticBilliard {
public:
    MagneticBilliard(std::shared_ptr<const Oval> table, double larmor_radius);

    const Oval& table() const { return *table_; }
    std::shared_ptr<const Oval> table_ptr() const { return table_; }
    double larmor_radius() const { return R_; }

private:
    std::shared_ptr<const Oval> table_;
    double R_;
};

struct LarmorArc {
    Point2 start;
    Point2 center;
    double arc_angle{0.0};   // swept counterclockwise
    double t_hit{0.0};       // boundary parameter of the endpoint
    Vec2 dir_at_hit;         // unit velocity arriving at the endpoint
};

// Advance along the counterclockwise Larmor circle from x with unit velocity
// v to the first boundary crossing. With on_boundary set, the start point
// lies on the table and a small arc-angle guard excludes it.
LarmorArc larmor_advance(const MagneticBilliard& mb, Point2 x, Vec2 v,
                         bool on_boundary = false);

struct MagneticTrajectory {
    Point2 source;
    double initial_angle{0.0};
    std::vector<LarmorArc> arcs;   // n arcs: source -> x_1 -> ... -> x_n
    Vec2 final_dir;                // outgoing unit velocity after bounce n
    Point2 final_center;           // center of the outgoing Larmor circle
};

// n arcs with specular reflection at each boundary hit; returns the final
// outgoing circle's center (one sample of the center curve).
MagneticTrajectory magnetic_propagate(const MagneticBilliard& mb, Point2 source,
                                      double phi, int bounces);

// Closed sampled curve of Larmor-circle centers with spline derivatives.
class CenterCurve {
public:
    CenterCurve() = default;
    CenterCurve(std::vector<double> s, std::vector<Point2> centers,
                double period = kTwoPi);

    std::size_t size() const { return s_.size(); }
    const std::vector<double>& s() const { return s_; }
    const std::vector<Point2>& centers() const { return centers_; }

    Point2 point(double s) const;
    Vec2 deriv(double s) const;
    Vec2 deriv2(double s) const;
    // Signed curvature of the center curve (counterclockwise positive).
    double curvature(double s) const;
    // Unit left normal J c' / |c'|.
    Vec2 normal(double s) const;

private:
    std::vector<double> s_;
    std::vector<Point2> centers_;
    PeriodicSpline sx_, sy_;
};

// Pencil of magnetic trajectories: the center curve of the final circles.
CenterCurve magnetic_center_curve(const MagneticBilliard& mb, Point2 source,
                                  int bounces, int samples,
                                  unsigned workers = 0);

struct CircleFamilyEnvelope {
    std::vector<Point2> inner;   // component enclosing the smaller area
    std::vector<Point2> outer;
    bool degenerate{false};      // center curve collapsed to a point
};

// The two offset components c(s) +- R nu(s) of the envelope of the family of
// radius-R circles centered on the curve.
CircleFamilyEnvelope circle_family_envelope(const CenterCurve& cc, double R);

struct OffsetCuspReport {
    int inner_count{0};
    int outer_count{0};
    int inner_sign{+1};  // inner component is c + inner_sign * R * nu
    std::vector<double> inner_params;
    std::vector<double> outer_params;
    std::vector<double> non_generic;  // tangential zeros of 1 -+ R kappa
};

// Cusps of the two components: transversal sign changes of 1 - R kappa (the
// component c + R nu) and 1 + R kappa (c - R nu), mapped to inner/outer by
// the same area rule as circle_family_envelope.
OffsetCuspReport offset_cusps(const CenterCurve& cc, double R);

struct MagneticReport {
    int n{0};
    double larmor_radius{0.0};
    int samples{0};
    bool degenerate{false};
    CenterCurve centers;
    CircleFamilyEnvelope envelope;
    OffsetCuspReport cusps;
};

MagneticReport magnetic_caustic_report(const MagneticBilliard& mb, Point2 source,
                                       int bounces, int samples,
                                       unsigned workers = 0);

// Report JSON mirroring the caustic report, one cusp list per component.
void write_magnetic_report_json(const std::string& path,
                                const MagneticReport& report,
                                const std::string& inner_csv,
                                const std::string& outer_csv,
                                const std::string& table_spec, Point2 source,
                                const std::string& figure_tag);

void write_component_csv(const std::string& path,
                         const std::vector<Point2>& polyline);

}  // namespace finsler
