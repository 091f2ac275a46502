#include "finsler/linespace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "finsler/errors.hpp"

namespace finsler {

namespace {

constexpr double kInflectionTol = 1e-10;       // bisection tolerance in s
constexpr double kDegenerateRel = 1e-9;        // |det| threshold vs max|det|
constexpr double kDegenerateFraction = 0.10;   // fraction of samples
constexpr double kTangentialRel = 1e-6;        // non-generic detection
constexpr double kMeetZeroTol = 1e-10;

}  // namespace

// ---------------------------------------------------------------------------
// DualCurve
// ---------------------------------------------------------------------------

DualCurve::DualCurve(std::vector<double> s, std::vector<double> alpha,
                     std::vector<double> p, double period, double max_gap)
    : s_(std::move(s)), alpha_(std::move(alpha)), p_(std::move(p)),
      period_(period) {
    std::size_t m = s_.size();
    if (m < 8 || alpha_.size() != m || p_.size() != m)
        throw std::invalid_argument("DualCurve: need >= 8 aligned samples");
    double worst_gap = s_[0] + period_ - s_[m - 1];
    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (!(s_[i] < s_[i + 1]))
            throw std::invalid_argument("DualCurve: s not increasing");
        worst_gap = std::max(worst_gap, s_[i + 1] - s_[i]);
    }
    if (worst_gap > max_gap)
        throw PencilBroken("dual curve sample gap " + std::to_string(worst_gap) +
                           " exceeds " + std::to_string(max_gap));

    // Close the alpha lift: one more unwrap step back to the first sample.
    double closing = alpha_[m - 1] + angle_diff(alpha_[0], alpha_[m - 1]);
    total_alpha_change_ = closing - alpha_[0];

    alpha_spline_ = UnwrappedSpline(s_, alpha_, period_, total_alpha_change_);
    p_spline_ = PeriodicSpline(s_, p_, period_);
}

// ---------------------------------------------------------------------------
// ConeCurve
// ---------------------------------------------------------------------------

std::array<double, 3> ConeCurve::gamma(double s) const {
    double a = curve_->alpha_at(s);
    return {std::cos(a), std::sin(a), curve_->p_at(s)};
}

std::array<double, 3> ConeCurve::gamma1(double s) const {
    double a = curve_->alpha_at(s), a1 = curve_->alpha1_at(s);
    return {-std::sin(a) * a1, std::cos(a) * a1, curve_->p1_at(s)};
}

std::array<double, 3> ConeCurve::gamma2(double s) const {
    double a = curve_->alpha_at(s);
    double a1 = curve_->alpha1_at(s), a2 = curve_->alpha2_at(s);
    double c = std::cos(a), n = std::sin(a);
    return {-c * a1 * a1 - n * a2, -n * a1 * a1 + c * a2, curve_->p2_at(s)};
}

double ConeCurve::det(double s) const {
    auto g = gamma(s), g1 = gamma1(s), g2 = gamma2(s);
    return g[0] * (g1[1] * g2[2] - g1[2] * g2[1]) -
           g[1] * (g1[0] * g2[2] - g1[2] * g2[0]) +
           g[2] * (g1[0] * g2[1] - g1[1] * g2[0]);
}

double ConeCurve::det_scale(double s) const {
    auto norm3 = [](const std::array<double, 3>& v) {
        return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    };
    return norm3(gamma(s)) * norm3(gamma1(s)) * norm3(gamma2(s));
}

// ---------------------------------------------------------------------------
// Inflections
// ---------------------------------------------------------------------------

InflectionResult inflections(const DualCurve& curve) {
    ConeCurve cone(curve);
    // Sign scan on a grid twice as fine as the samples.
    std::size_t n = 2 * curve.size();
    double s0 = curve.s().front();
    double S = curve.period();
    std::vector<double> sv(n), dv(n);
    double max_abs = 0.0, max_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sv[i] = s0 + S * static_cast<double>(i) / static_cast<double>(n);
        dv[i] = cone.det(sv[i]);
        max_abs = std::max(max_abs, std::fabs(dv[i]));
        max_scale = std::max(max_scale, cone.det_scale(sv[i]));
    }

    // Degeneracy: det is tiny against the curve's own scale, either globally
    // (collapsed caustic, det == 0 identically) or on a sizable fraction of
    // the samples. The global floor sits at the spline noise level h^2: a
    // determinant that never rises above it is indistinguishable from zero.
    double h = S / static_cast<double>(curve.size());
    double abs_floor = std::max(kDegenerateRel, h * h) * max_scale;
    if (max_abs <= abs_floor)
        throw DegenerateCurve("det[Gamma,Gamma',Gamma''] vanishes identically");
    std::size_t tiny = 0;
    for (double d : dv)
        if (std::fabs(d) < kDegenerateRel * max_abs) ++tiny;
    if (tiny > kDegenerateFraction * n)
        throw DegenerateCurve("det near zero on " + std::to_string(tiny) +
                              " of " + std::to_string(n) + " samples");

    InflectionResult result;
    auto det_fn = [&cone](double s) { return cone.det(s); };
    double tangential_tol = kTangentialRel * max_abs;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = (i + 1) % n;
        double a = sv[i];
        double b = (j == 0) ? s0 + S : sv[j];
        if (dv[i] == 0.0 || dv[i] * dv[j] < 0.0) {
            double z = (dv[i] == 0.0)
                           ? a
                           : refine_root(det_fn, a, b, dv[i], dv[j], kInflectionTol);
            result.zeros.push_back(wrap_angle(z - s0) + s0);
        } else if (std::fabs(dv[i]) < tangential_tol) {
            // Tangential near-zero: local minimum of |det| without a sign change.
            std::size_t prev = (i + n - 1) % n;
            if (std::fabs(dv[i]) <= std::fabs(dv[prev]) &&
                std::fabs(dv[i]) <= std::fabs(dv[j]))
                result.non_generic.push_back(sv[i]);
        }
    }
    std::sort(result.zeros.begin(), result.zeros.end());
    return result;
}

int winding(const DualCurve& curve) {
    double turns = curve.total_alpha_change() / kTwoPi;
    int w = static_cast<int>(std::lround(turns));
    if (std::fabs(turns - w) > 0.01)
        throw NumericError("NonClosed", "alpha lift does not close: " +
                                            std::to_string(turns) + " turns");
    return w;
}

std::vector<MeetResult> meets_all_lines(const DualCurve& curve,
                                        const std::vector<Point2>& probes) {
    std::vector<MeetResult> out;
    out.reserve(probes.size());
    std::size_t m = curve.size();
    double s0 = curve.s().front();
    double S = curve.period();
    for (const auto& A : probes) {
        auto g = [&](double s) {
            double a = curve.alpha_at(s);
            return curve.p_at(s) - (A.x * std::sin(a) - A.y * std::cos(a));
        };
        MeetResult r;
        double prev = g(curve.s()[0]);
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t j = (i + 1) % m;
            double a = curve.s()[i];
            double b = (j == 0) ? s0 + S : curve.s()[j];
            double next = g(b);
            if (std::fabs(prev) < kMeetZeroTol) {
                r.meets = true;
                r.witness_s = a;
                break;
            }
            if (prev * next < 0.0) {
                r.meets = true;
                r.witness_s = refine_root(g, a, b, prev, next, 1e-12);
                break;
            }
            prev = next;
        }
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Crofton measure
// ---------------------------------------------------------------------------

namespace {

double crofton_integral(const std::function<void(double, double&, double&)>& p_range,
                        const LineDensity& f, int n_alpha, int n_p,
                        double p_max) {
    double d_alpha = kTwoPi / n_alpha;
    double d_p = 2.0 * p_max / n_p;
    double sum = 0.0;
    for (int j = 0; j < n_alpha; ++j) {
        double alpha = (j + 0.5) * d_alpha;
        double lo, hi;
        p_range(alpha, lo, hi);
        // Midpoint grid over [-p_max, p_max); only cells inside [lo, hi]
        // contribute. The count is handled by the caller's convention (2 for
        // an oval, 1 for a segment) folded into [lo, hi] plus `weight` below.
        int i_lo = static_cast<int>(std::ceil((lo + p_max) / d_p - 0.5));
        int i_hi = static_cast<int>(std::floor((hi + p_max) / d_p - 0.5));
        i_lo = std::max(i_lo, 0);
        i_hi = std::min(i_hi, n_p - 1);
        if (!f) {
            sum += static_cast<double>(std::max(0, i_hi - i_lo + 1));
        } else {
            for (int i = i_lo; i <= i_hi; ++i) {
                double p = -p_max + (i + 0.5) * d_p;
                sum += f(alpha, p);
            }
        }
    }
    return 0.25 * sum * d_alpha * d_p;
}

}  // namespace

double crofton_length(const Oval& curve, const LineDensity& f, int n_alpha,
                      int n_p) {
    double R = curve.max_radius();
    double p_max = R + std::max(0.05 * R, 0.01);
    auto range = [&curve](double alpha, double& lo, double& hi) {
        // n(alpha) points at angle alpha - pi/2.
        double theta = alpha - 0.5 * std::numbers::pi;
        hi = curve.support(theta);
        lo = -curve.support(theta + std::numbers::pi);
    };
    // A line crossing an oval meets it twice.
    return 2.0 * crofton_integral(range, f, n_alpha, n_p, p_max);
}

double crofton_segment_length(Point2 a, Point2 b, const LineDensity& f,
                              int n_alpha, int n_p) {
    double R = std::max(a.norm(), b.norm());
    double p_max = R + std::max(0.05 * R, 0.01);
    auto range = [a, b](double alpha, double& lo, double& hi) {
        Vec2 n = OrientedLine::normal(alpha);
        double pa = dot(a, n), pb = dot(b, n);
        lo = std::min(pa, pb);
        hi = std::max(pa, pb);
    };
    return crofton_integral(range, f, n_alpha, n_p, p_max);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_dual_curve_csv(const std::string& path, const DualCurve& curve) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw ConfigError("cannot open '" + path + "' for writing");
    std::fputs("s,alpha,p\n", fp);
    for (std::size_t i = 0; i < curve.size(); ++i)
        std::fprintf(fp, "%.17g,%.17g,%.17g\n", curve.s()[i], curve.alpha()[i],
                     curve.p()[i]);
    std::fclose(fp);
}

DualCurve read_dual_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("s,alpha,p", 0) != 0)
        throw ConfigError("bad dual curve CSV header in '" + path + "'");
    std::vector<double> s, alpha, p;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double sv, av, pv;
        if (std::sscanf(line.c_str(), "%lg,%lg,%lg", &sv, &av, &pv) != 3)
            throw ConfigError("bad dual curve CSV row: " + line);
        s.push_back(sv);
        alpha.push_back(av);
        p.push_back(pv);
    }
    return DualCurve(std::move(s), std::move(alpha), std::move(p));
}

}  // namespace finsler
