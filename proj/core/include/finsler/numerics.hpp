#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "finsler/geometry.hpp"

namespace finsler {

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

// Refine a bracketed sign change by bisection, then polish with secant steps.
// Requires f(a) and f(b) of opposite sign (one may be zero).
double refine_root(const std::function<double(double)>& f, double a, double b,
                   double fa, double fb, double xtol);

// Sign-change scan of f over [a, b) on n uniform cells; each bracket is
// refined to xtol. Endpoint values exactly zero count as roots.
std::vector<double> scan_roots(const std::function<double(double)>& f, double a,
                               double b, int n, double xtol);

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

// Adaptive Gauss-Lobatto quadrature (Gander-Gautschi). rel_tol is relative to
// the integral's own scale; intervals collapse to machine resolution at worst.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol);

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre nodes/weights, computed once per order and cached.
const GaussRule& gauss_legendre(int n);

// Fixed-order Gauss-Legendre integral of f over [a, b].
double gauss_integrate(const std::function<double(double)>& f, double a,
                       double b, int order);

// ---------------------------------------------------------------------------
// Periodic cubic spline
// ---------------------------------------------------------------------------

// C2 periodic cubic spline through (s_i, y_i), i = 0..m-1, with y(s_0 + period)
// = y(s_0). Knots must be strictly increasing with s_{m-1} - s_0 < period.
class PeriodicSpline {
public:
    PeriodicSpline() = default;
    PeriodicSpline(std::vector<double> s, std::vector<double> y, double period);

    double operator()(double s) const { return eval(s); }
    double eval(double s) const;
    double deriv(double s) const;
    double deriv2(double s) const;

    double period() const { return period_; }
    std::size_t size() const { return s_.size(); }

private:
    std::size_t locate(double& s) const;

    std::vector<double> s_;
    std::vector<double> y_;
    std::vector<double> m2_;  // second derivatives at knots
    double period_{0.0};
};

// Spline for an angle-like quantity that gains `total_change` over one period:
// y(s + period) = y(s) + total_change. The periodic residual is spline-fitted
// and the linear trend added back.
class UnwrappedSpline {
public:
    UnwrappedSpline() = default;
    UnwrappedSpline(const std::vector<double>& s, const std::vector<double>& y,
                    double period, double total_change);

    double eval(double s) const;
    double deriv(double s) const;
    double deriv2(double s) const;
    double total_change() const { return total_change_; }

private:
    PeriodicSpline residual_;
    double slope_{0.0};
    double base_s_{0.0};
    double base_y_{0.0};
    double total_change_{0.0};
};

// Solve a cyclic tridiagonal system (Thomas + Sherman-Morrison).
// sub[i], diag[i], sup[i] are the coefficients of row i; sub[0] and
// sup[m-1] are the wrap-around corners.
std::vector<double> solve_cyclic_tridiagonal(std::vector<double> sub,
                                             std::vector<double> diag,
                                             std::vector<double> sup,
                                             std::vector<double> rhs);

// ---------------------------------------------------------------------------
// Polylines
// ---------------------------------------------------------------------------

double polyline_length(const std::vector<Point2>& pts, bool closed);
double polygon_area(const std::vector<Point2>& pts);  // signed, shoelace
Point2 polyline_centroid(const std::vector<Point2>& pts);
// Diagonal of the axis-aligned bounding box; cheap stand-in for the diameter
// (within a factor sqrt(2)).
double bbox_diameter(const std::vector<Point2>& pts);
double point_segment_distance(Point2 q, Point2 a, Point2 b);
double point_polyline_distance(Point2 q, const std::vector<Point2>& pts, bool closed);
// Symmetric Hausdorff distance between two closed polylines.
double hausdorff_distance(const std::vector<Point2>& a, const std::vector<Point2>& b);

// ---------------------------------------------------------------------------
// Deterministic parallelism
// ---------------------------------------------------------------------------

// Runs body(i) for i in [0, n) on `workers` threads (0 = hardware default).
// Work is assigned by index, so writes into per-index slots give results
// independent of the worker count.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace finsler
