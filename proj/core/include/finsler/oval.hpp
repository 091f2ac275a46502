#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "finsler/geometry.hpp"

namespace finsler {

// Smooth strictly convex closed boundary curve, parametrized
// counterclockwise by t in [0, 2pi).
class Oval {
public:
    virtual ~Oval() = default;

    virtual Point2 point(double t) const = 0;
    virtual Vec2 tangent(double t) const = 0;  // unit, counterclockwise
    virtual Vec2 outward_normal(double t) const;
    virtual double curvature(double t) const = 0;

    // Signed inside/outside function: negative inside, positive outside,
    // zero on the curve. Not a distance in general, but monotone across the
    // boundary along rays.
    virtual double implicit(Point2 P) const = 0;
    bool contains(Point2 P) const { return implicit(P) < 0.0; }

    // Support value h(theta) = max over the curve of <x, N(theta)>,
    // N(theta) = (cos theta, sin theta).
    virtual double support(double theta) const = 0;

    // Boundary parameter nearest to P (intended for P on or near the curve).
    virtual double locate(Point2 P) const;

    virtual double max_radius() const = 0;  // max |point(t)|
    double min_curvature(int grid = 4096) const;

    // First intersection parameter of the open ray origin + s*d(alpha), s > 0.
    // With t_exclude set, the origin is taken to lie on the curve at that
    // parameter and the corresponding root is skipped.
    virtual double ray_first_hit(Point2 origin, double alpha,
                                 std::optional<double> t_exclude = {}) const;

    // Grammar spec this oval was parsed from (empty when built directly).
    const std::string& spec() const { return spec_; }
    void set_spec(std::string s) { spec_ = std::move(s); }

protected:
    // Shared filtering/refinement used by ray_first_hit implementations:
    // candidates are (t, s) pairs on the ray; returns the accepted parameter.
    double select_ray_hit(Point2 origin, double alpha,
                          const std::vector<std::pair<double, double>>& roots,
                          std::optional<double> t_exclude) const;

private:
    std::string spec_;
};

class CircleOval final : public Oval {
public:
    explicit CircleOval(double radius, Point2 center = {0.0, 0.0});

    Point2 point(double t) const override;
    Vec2 tangent(double t) const override;
    double curvature(double t) const override { return 1.0 / radius_; }
    double implicit(Point2 P) const override;
    double support(double theta) const override;
    double locate(Point2 P) const override;
    double max_radius() const override;
    double ray_first_hit(Point2 origin, double alpha,
                         std::optional<double> t_exclude) const override;

    double radius() const { return radius_; }
    Point2 center() const { return center_; }

private:
    double radius_;
    Point2 center_;
};

class EllipseOval final : public Oval {
public:
    EllipseOval(double a, double b);

    Point2 point(double t) const override;
    Vec2 tangent(double t) const override;
    double curvature(double t) const override;
    double implicit(Point2 P) const override;
    double support(double theta) const override;
    double locate(Point2 P) const override;
    double max_radius() const override { return std::max(a_, b_); }
    double ray_first_hit(Point2 origin, double alpha,
                         std::optional<double> t_exclude) const override;

    double semi_a() const { return a_; }
    double semi_b() const { return b_; }

private:
    double a_, b_;
};

// Oval given by a support function h(theta) as a finite trigonometric series
// h = c0 + sum_k (a_k cos k theta + b_k sin k theta). The parameter t is the
// outward normal angle; point(t) = h N + h' T, curvature = 1/(h + h'').
// Throws NotConvex if h + h'' <= 0 anywhere on a 4096-point grid.
class SupportOval final : public Oval {
public:
    // coeffs = {c0, a1, b1, a2, b2, ...}
    explicit SupportOval(std::vector<double> coeffs);

    Point2 point(double t) const override;
    Vec2 tangent(double t) const override { return {-std::sin(t), std::cos(t)}; }
    Vec2 outward_normal(double t) const override { return {std::cos(t), std::sin(t)}; }
    double curvature(double t) const override;
    double implicit(Point2 P) const override;
    double support(double theta) const override { return h(theta); }
    double max_radius() const override { return max_radius_; }

    double h(double theta) const;
    double h1(double theta) const;  // dh/dtheta
    double h2(double theta) const;  // d2h/dtheta2

private:
    std::vector<double> coeffs_;
    double max_radius_{0.0};
};

// Free-function form of the ray intersection.
double ray_oval_first_hit(Point2 origin, double alpha, const Oval& oval,
                          std::optional<double> t_exclude = {});

// Oval grammar: "circle:r", "ellipse:a,b", "support:c0,a1,b1,...".
// Throws ConfigError on malformed input.
std::shared_ptr<const Oval> parse_oval(const std::string& spec);

}  // namespace finsler
