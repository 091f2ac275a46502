#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "finsler/geometry.hpp"
#include "finsler/numerics.hpp"
#include "finsler/oval.hpp"

namespace finsler {

// Sampled closed curve in the space of oriented lines, one (alpha, p) pair
// per sample of the cyclic parameter s. alpha is stored unwrapped: the
// continuous lift gains winding * 2pi over one period of s.
class DualCurve {
public:
    DualCurve() = default;
    // s strictly increasing within [s_0, s_0 + period); alpha unwrapped.
    DualCurve(std::vector<double> s, std::vector<double> alpha,
              std::vector<double> p, double period = kTwoPi,
              double max_gap = 0.05);

    std::size_t size() const { return s_.size(); }
    double period() const { return period_; }
    const std::vector<double>& s() const { return s_; }
    const std::vector<double>& alpha() const { return alpha_; }
    const std::vector<double>& p() const { return p_; }
    double total_alpha_change() const { return total_alpha_change_; }

    double alpha_at(double s) const { return alpha_spline_.eval(s); }
    double alpha1_at(double s) const { return alpha_spline_.deriv(s); }
    double alpha2_at(double s) const { return alpha_spline_.deriv2(s); }
    double p_at(double s) const { return p_spline_.eval(s); }
    double p1_at(double s) const { return p_spline_.deriv(s); }
    double p2_at(double s) const { return p_spline_.deriv2(s); }

    OrientedLine line_at(double s) const {
        return {wrap_angle(alpha_at(s)), p_at(s)};
    }

private:
    std::vector<double> s_, alpha_, p_;
    double period_{kTwoPi};
    double total_alpha_change_{0.0};
    UnwrappedSpline alpha_spline_;
    PeriodicSpline p_spline_;
};

// Central lift of a dual curve to the cylinder in R^3:
// Gamma(s) = (cos alpha(s), sin alpha(s), p(s)), with derivatives from the
// underlying splines. det(s) = det[Gamma, Gamma', Gamma''] vanishes exactly
// at second-order tangencies with the sine-curve "lines".
class ConeCurve {
public:
    explicit ConeCurve(const DualCurve& curve) : curve_(&curve) {}

    std::array<double, 3> gamma(double s) const;
    std::array<double, 3> gamma1(double s) const;
    std::array<double, 3> gamma2(double s) const;
    double det(double s) const;
    // Hadamard bound |Gamma||Gamma'||Gamma''| used as the determinant scale.
    double det_scale(double s) const;

private:
    const DualCurve* curve_;
};

struct InflectionResult {
    std::vector<double> zeros;        // transversal sign changes of det
    std::vector<double> non_generic;  // tangential near-zeros, not counted
};

// Sign-change zeros of det[Gamma, Gamma', Gamma''], refined to 1e-10 in s.
// Throws DegenerateCurve when det is indistinguishable from zero on a large
// fraction of the curve (caustic collapsing to a point).
InflectionResult inflections(const DualCurve& curve);

// Rounded total winding in alpha; throws on a rounding residual above 0.01.
int winding(const DualCurve& curve);

struct MeetResult {
    bool meets{false};
    std::optional<double> witness_s;  // a parameter where the curve crosses
};

// For each probe point A, does the curve intersect the dual "line" of A?
// g(s) = p(s) - (A.x sin alpha - A.y cos alpha) is scanned for sign changes
// and near-zeros (|g| < 1e-10).
std::vector<MeetResult> meets_all_lines(const DualCurve& curve,
                                        const std::vector<Point2>& probes);

using LineDensity = std::function<double(double alpha, double p)>;

// Length of an oval in the Crofton measure with density f:
// (1/4) * integral of #(line ^ curve) * f(alpha, p) dp dalpha, midpoint rule
// on an n_alpha x n_p grid. f == nullptr means the flat density 1.
double crofton_length(const Oval& curve, const LineDensity& f, int n_alpha,
                      int n_p);
double crofton_segment_length(Point2 a, Point2 b, const LineDensity& f,
                              int n_alpha, int n_p);

// CSV exchange format: header "s,alpha,p", alpha unwrapped.
void write_dual_curve_csv(const std::string& path, const DualCurve& curve);
DualCurve read_dual_curve_csv(const std::string& path);

}  // namespace finsler
