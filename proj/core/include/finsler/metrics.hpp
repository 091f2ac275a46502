#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "finsler/geometry.hpp"
#include "finsler/oval.hpp"

namespace finsler {

// A positively 1-homogeneous norm F(x, v) on tangent vectors, given by its
// value and by access to the unit-level indicatrix at each base point. The
// indicatrix point in direction phi follows from homogeneity:
// I(x, phi) = u(phi) / F(x, u(phi)) with u the unit Euclidean direction.
class FinslerMetric {
public:
    virtual ~FinslerMetric() = default;

    virtual double norm(Point2 x, Vec2 v) const = 0;
    virtual bool reversible() const = 0;

    Vec2 indicatrix_point(Point2 x, double phi) const {
        Vec2 u = unit_dir(phi);
        return u / norm(x, u);
    }

    // Unit direction of the tangent line to the indicatrix at I(x, phi).
    // Default: central differences in phi; metrics with analytic gauges
    // override with exact gradients.
    virtual Vec2 indicatrix_tangent(Point2 x, double phi) const;

    // Whether x lies strictly inside the metric's domain of validity.
    virtual bool domain_contains(Point2 x) const { return true; }
    // Convex domain boundary for Funk/Hilbert metrics, else nullptr.
    virtual const Oval* domain() const { return nullptr; }

    virtual std::string spec() const = 0;
};

class EuclideanMetric final : public FinslerMetric {
public:
    double norm(Point2, Vec2 v) const override { return v.norm(); }
    bool reversible() const override { return true; }
    Vec2 indicatrix_tangent(Point2, double phi) const override {
        return perp(unit_dir(phi));
    }
    std::string spec() const override { return "euclid"; }
};

// Translation-invariant metric with a fixed indicatrix given by a radial
// profile rho(phi) > 0: F(v) = |v| / rho(angle of v).
class MinkowskiMetric final : public FinslerMetric {
public:
    // Trigonometric-series profile, coeffs = {c0, a1, b1, a2, b2, ...};
    // analytic derivative.
    static MinkowskiMetric from_fourier(std::vector<double> coeffs);
    // Arbitrary positive profile; drho may be empty (finite differences).
    MinkowskiMetric(std::function<double(double)> rho,
                    std::function<double(double)> drho, std::string label);

    double norm(Point2, Vec2 v) const override;
    bool reversible() const override { return reversible_; }
    Vec2 indicatrix_tangent(Point2, double phi) const override;
    std::string spec() const override { return label_; }

    double rho(double phi) const { return rho_(phi); }
    double drho(double phi) const;
    // Polar-curve convexity check rho^2 + 2 rho'^2 - rho rho'' > 0 on a grid;
    // throws the supplied error type on failure.
    void validate_convex(bool image = false) const;

private:
    std::function<double(double)> rho_;
    std::function<double(double)> drho_;
    std::string label_;
    bool reversible_{false};
};

// Minkowski metric with an axis-aligned ellipse indicatrix
// v1^2/a^2 + v2^2/b^2 = 1; exact gradient tangents.
class QuadraticMetric final : public FinslerMetric {
public:
    QuadraticMetric(double a, double b) : a_(a), b_(b) {}
    double norm(Point2, Vec2 v) const override {
        return std::sqrt(v.x * v.x / (a_ * a_) + v.y * v.y / (b_ * b_));
    }
    bool reversible() const override { return true; }
    Vec2 indicatrix_tangent(Point2 x, double phi) const override {
        Vec2 v = indicatrix_point(x, phi);
        Vec2 grad{v.x / (a_ * a_), v.y / (b_ * b_)};
        return perp(grad).normalized();
    }
    std::string spec() const override;

private:
    double a_, b_;
};

// Unit-speed charge in a constant magnetic field:
// F(x, v) = |v| + det(v, x) / (2R), R the Larmor radius. Valid where
// |x| < 2R. The indicatrix at every point is a focus-centered ellipse.
class MagneticMetric final : public FinslerMetric {
public:
    explicit MagneticMetric(double larmor_radius);

    double norm(Point2 x, Vec2 v) const override;
    bool reversible() const override { return false; }
    Vec2 indicatrix_tangent(Point2 x, double phi) const override;
    bool domain_contains(Point2 x) const override;
    std::string spec() const override;

    double larmor_radius() const { return R_; }

private:
    double R_;
};

// Funk metric of a convex domain Omega: F(x, v) is the gauge with
// x + v/F on the boundary. Non-reversible; the indicatrix at x is the
// boundary translated by -x.
class FunkMetric final : public FinslerMetric {
public:
    explicit FunkMetric(std::shared_ptr<const Oval> omega);

    double norm(Point2 x, Vec2 v) const override;
    bool reversible() const override { return false; }
    Vec2 indicatrix_tangent(Point2 x, double phi) const override;
    bool domain_contains(Point2 x) const override;
    const Oval* domain() const override { return omega_.get(); }
    std::string spec() const override { return "funk:" + omega_->spec(); }

private:
    std::shared_ptr<const Oval> omega_;
};

// Symmetrized Funk metric: F_H(x,v) = (F_F(x,v) + F_F(x,-v)) / 2.
class HilbertMetric final : public FinslerMetric {
public:
    explicit HilbertMetric(std::shared_ptr<const Oval> omega);

    double norm(Point2 x, Vec2 v) const override;
    bool reversible() const override { return true; }
    bool domain_contains(Point2 x) const override;
    const Oval* domain() const override { return omega_.get(); }
    std::string spec() const override { return "hilbert:" + omega_->spec(); }

private:
    FunkMetric funk_;
    std::shared_ptr<const Oval> omega_;
};

// Symmetric projective metric from a positive density f on the space of
// oriented lines: F(x, v) = (1/4) * integral over alpha of
// f(alpha, <x, n(alpha)>) |<v, n(alpha)>| dalpha.
class BusemannMetric final : public FinslerMetric {
public:
    BusemannMetric(std::function<double(double, double)> density,
                   std::string label, int nodes = 1024);

    double norm(Point2 x, Vec2 v) const override;
    bool reversible() const override { return true; }
    std::string spec() const override { return "busemann:" + label_; }

    const std::function<double(double, double)>& density() const {
        return density_;
    }

private:
    std::function<double(double, double)> density_;
    std::string label_;
    int nodes_;
};

// Built-in density catalog for `busemann:<id>`: flat, pquad, aniso.
std::function<double(double, double)> busemann_density(const std::string& id);

// Metric grammar: euclid | minkowski:rho=c0,a1,b1,... | funk:<oval> |
// hilbert:<oval> | magnetic:R | busemann:<density-id>.
std::shared_ptr<const FinslerMetric> parse_metric(const std::string& spec);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Finsler length of the straight segment x -> y by adaptive quadrature
// (relative tolerance 1e-10). Throws DomainEscape if the segment leaves the
// metric's domain.
double segment_length(const FinslerMetric& metric, Point2 x, Point2 y);

// Closed-form boundary cross-ratio distances on a convex domain. b is the
// intersection of the forward ray x -> y with the boundary, a the
// intersection of the backward ray y -> x.
double funk_distance(const Oval& omega, Point2 x, Point2 y);
double hilbert_distance(const Oval& omega, Point2 x, Point2 y);

// Axis-aligned focus-centered ellipse parameters for a field strength
// |t| < 1: a = 1/(1-t^2), b = 1/sqrt(1-t^2), c = t/(1-t^2); a^2 = b^2 + c^2.
struct KeplerParams {
    double a, b, c;
};
KeplerParams kepler_params(double t);

// Samples the indicatrix of the magnetic metric at x, rotates it to axis
// alignment, and returns the maximum residual of the focus-centered ellipse
// equation ((v1+c)/a)^2 + (v2/b)^2 - 1.
double verify_kepler_indicatrix(const MagneticMetric& metric, Point2 x,
                                int samples);

// Legendre transform of a unit vector v (F(x,v) = 1): the covector w with
// Ker w = tangent line of the indicatrix at v and w(v) = 1.
Vec2 legendre_dual(const FinslerMetric& metric, Point2 x, Vec2 v);

}  // namespace finsler
