#include "finsler/oval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "finsler/errors.hpp"
#include "finsler/numerics.hpp"

namespace finsler {

namespace {

constexpr int kRayScanCells = 512;
constexpr double kRayParamTol = 1e-13;
constexpr double kGrazingSine = 1e-8;
constexpr double kExcludeParamDist = 1e-7;

}  // namespace

// ---------------------------------------------------------------------------
// Oval base
// ---------------------------------------------------------------------------

Vec2 Oval::outward_normal(double t) const {
    Vec2 tau = tangent(t);
    return {tau.y, -tau.x};
}

double Oval::min_curvature(int grid) const {
    double k = curvature(0.0);
    for (int i = 1; i < grid; ++i)
        k = std::min(k, curvature(kTwoPi * i / grid));
    return k;
}

double Oval::locate(Point2 P) const {
    const int grid = 1024;
    double best_t = 0.0, best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
        double t = kTwoPi * i / grid;
        double d = (point(t) - P).norm2();
        if (d < best_d) {
            best_d = d;
            best_t = t;
        }
    }
    // Newton on the stationarity condition <x(t) - P, tangent(t)> = 0.
    double t = best_t;
    for (int it = 0; it < 60; ++it) {
        Vec2 r = point(t) - P;
        Vec2 tau = tangent(t);
        double g = dot(r, tau);
        // d/dt <r, tau> with |x'| = 1/curvature-scaled speed is approximated
        // by finite differences of g; robust enough for on-curve points.
        double h = 1e-6;
        double gp = (dot(point(t + h) - P, tangent(t + h)) -
                     dot(point(t - h) - P, tangent(t - h))) /
                    (2.0 * h);
        if (gp == 0.0) break;
        double step = g / gp;
        t -= step;
        if (std::fabs(step) < 1e-14) break;
    }
    return wrap_angle(t);
}

double Oval::select_ray_hit(Point2 origin, double alpha,
                            const std::vector<std::pair<double, double>>& roots,
                            std::optional<double> t_exclude) const {
    Vec2 d = OrientedLine::direction(alpha);
    double s_floor = 1e-9 * (1.0 + max_radius());
    double best_s = std::numeric_limits<double>::infinity();
    double best_t = 0.0;
    bool found = false;
    for (auto [t, s] : roots) {
        if (t_exclude && cyclic_dist(t, *t_exclude, kTwoPi) < kExcludeParamDist)
            continue;
        if (s <= s_floor) continue;
        if (s < best_s) {
            best_s = s;
            best_t = t;
            found = true;
        }
    }
    if (!found) {
        if (t_exclude &&
            std::fabs(dot(d, outward_normal(*t_exclude))) < 1e-6)
            throw GrazingHit("ray leaves tangentially from the start point");
        throw NoIntersection("ray does not meet the oval forward of its origin");
    }
    if (std::fabs(dot(d, outward_normal(best_t))) < kGrazingSine)
        throw GrazingHit("ray nearly tangent at the hit point");
    return wrap_angle(best_t);
}

double Oval::ray_first_hit(Point2 origin, double alpha,
                           std::optional<double> t_exclude) const {
    Vec2 n = OrientedLine::normal(alpha);
    Vec2 d = OrientedLine::direction(alpha);
    auto side = [&](double t) { return dot(point(t) - origin, n); };
    std::vector<double> ts =
        scan_roots(side, 0.0, kTwoPi, kRayScanCells, kRayParamTol);
    std::vector<std::pair<double, double>> roots;
    roots.reserve(ts.size());
    for (double t : ts) roots.push_back({t, dot(point(t) - origin, d)});
    return select_ray_hit(origin, alpha, roots, t_exclude);
}

double ray_oval_first_hit(Point2 origin, double alpha, const Oval& oval,
                          std::optional<double> t_exclude) {
    return oval.ray_first_hit(origin, alpha, t_exclude);
}

// ---------------------------------------------------------------------------
// CircleOval
// ---------------------------------------------------------------------------

CircleOval::CircleOval(double radius, Point2 center)
    : radius_(radius), center_(center) {
    if (!(radius > 0.0)) throw ConfigError("circle radius must be positive");
}

Point2 CircleOval::point(double t) const {
    return center_ + radius_ * Vec2{std::cos(t), std::sin(t)};
}

Vec2 CircleOval::tangent(double t) const { return {-std::sin(t), std::cos(t)}; }

double CircleOval::implicit(Point2 P) const {
    return (P - center_).norm() - radius_;
}

double CircleOval::support(double theta) const {
    return dot(center_, Vec2{std::cos(theta), std::sin(theta)}) + radius_;
}

double CircleOval::locate(Point2 P) const { return (P - center_).angle(); }

double CircleOval::max_radius() const { return center_.norm() + radius_; }

double CircleOval::ray_first_hit(Point2 origin, double alpha,
                                 std::optional<double> t_exclude) const {
    Vec2 d = OrientedLine::direction(alpha);
    Vec2 oc = origin - center_;
    double B = dot(oc, d);
    double C = oc.norm2() - radius_ * radius_;
    double disc = B * B - C;
    std::vector<std::pair<double, double>> roots;
    if (disc >= 0.0) {
        double sq = std::sqrt(disc);
        for (double s : {-B - sq, -B + sq}) {
            Point2 hit = origin + s * d;
            roots.push_back({locate(hit), s});
        }
    }
    return select_ray_hit(origin, alpha, roots, t_exclude);
}

// ---------------------------------------------------------------------------
// EllipseOval
// ---------------------------------------------------------------------------

EllipseOval::EllipseOval(double a, double b) : a_(a), b_(b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw ConfigError("ellipse semi-axes must be positive");
}

Point2 EllipseOval::point(double t) const {
    return {a_ * std::cos(t), b_ * std::sin(t)};
}

Vec2 EllipseOval::tangent(double t) const {
    return Vec2{-a_ * std::sin(t), b_ * std::cos(t)}.normalized();
}

double EllipseOval::curvature(double t) const {
    double speed2 = a_ * a_ * std::sin(t) * std::sin(t) +
                    b_ * b_ * std::cos(t) * std::cos(t);
    return a_ * b_ / (speed2 * std::sqrt(speed2));
}

double EllipseOval::implicit(Point2 P) const {
    double u = P.x / a_, v = P.y / b_;
    return u * u + v * v - 1.0;
}

double EllipseOval::support(double theta) const {
    double c = std::cos(theta), s = std::sin(theta);
    return std::sqrt(a_ * a_ * c * c + b_ * b_ * s * s);
}

double EllipseOval::locate(Point2 P) const {
    return Vec2{P.x / a_, P.y / b_}.angle();
}

double EllipseOval::ray_first_hit(Point2 origin, double alpha,
                                  std::optional<double> t_exclude) const {
    Vec2 d = OrientedLine::direction(alpha);
    Vec2 o{origin.x / a_, origin.y / b_};
    Vec2 u{d.x / a_, d.y / b_};
    double A = u.norm2();
    double B = dot(o, u);
    double C = o.norm2() - 1.0;
    double disc = B * B - A * C;
    std::vector<std::pair<double, double>> roots;
    if (disc >= 0.0) {
        double sq = std::sqrt(disc);
        for (double s : {(-B - sq) / A, (-B + sq) / A}) {
            Point2 hit = origin + s * d;
            roots.push_back({locate(hit), s});
        }
    }
    return select_ray_hit(origin, alpha, roots, t_exclude);
}

// ---------------------------------------------------------------------------
// SupportOval
// ---------------------------------------------------------------------------

SupportOval::SupportOval(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw ConfigError("support oval needs coefficients");
    const int grid = 4096;
    for (int i = 0; i < grid; ++i) {
        double th = kTwoPi * i / grid;
        if (!(h(th) + h2(th) > 0.0))
            throw NotConvex("support function has h + h'' <= 0");
        max_radius_ = std::max(max_radius_, point(th).norm());
    }
}

double SupportOval::h(double theta) const {
    double v = coeffs_[0];
    for (std::size_t k = 1; 2 * k - 1 < coeffs_.size(); ++k) {
        double a = coeffs_[2 * k - 1];
        double b = (2 * k < coeffs_.size()) ? coeffs_[2 * k] : 0.0;
        v += a * std::cos(k * theta) + b * std::sin(k * theta);
    }
    return v;
}

double SupportOval::h1(double theta) const {
    double v = 0.0;
    for (std::size_t k = 1; 2 * k - 1 < coeffs_.size(); ++k) {
        double a = coeffs_[2 * k - 1];
        double b = (2 * k < coeffs_.size()) ? coeffs_[2 * k] : 0.0;
        v += k * (-a * std::sin(k * theta) + b * std::cos(k * theta));
    }
    return v;
}

double SupportOval::h2(double theta) const {
    double v = 0.0;
    for (std::size_t k = 1; 2 * k - 1 < coeffs_.size(); ++k) {
        double a = coeffs_[2 * k - 1];
        double b = (2 * k < coeffs_.size()) ? coeffs_[2 * k] : 0.0;
        v -= k * k * (a * std::cos(k * theta) + b * std::sin(k * theta));
    }
    return v;
}

Point2 SupportOval::point(double t) const {
    Vec2 N{std::cos(t), std::sin(t)};
    Vec2 T{-std::sin(t), std::cos(t)};
    return h(t) * N + h1(t) * T;
}

double SupportOval::curvature(double t) const { return 1.0 / (h(t) + h2(t)); }

double SupportOval::implicit(Point2 P) const {
    // Gauge of the convex body: max over theta of <P, N(theta)> - h(theta).
    const int grid = 256;
    double best = -std::numeric_limits<double>::infinity();
    double best_th = 0.0;
    for (int i = 0; i < grid; ++i) {
        double th = kTwoPi * i / grid;
        double g = P.x * std::cos(th) + P.y * std::sin(th) - h(th);
        if (g > best) {
            best = g;
            best_th = th;
        }
    }
    double th = best_th;
    for (int it = 0; it < 40; ++it) {
        double c = std::cos(th), s = std::sin(th);
        double g1 = -P.x * s + P.y * c - h1(th);
        double g2 = -P.x * c - P.y * s - h2(th);
        if (g2 == 0.0) break;
        double step = g1 / g2;
        th -= step;
        if (std::fabs(step) < 1e-14) break;
    }
    double refined = P.x * std::cos(th) + P.y * std::sin(th) - h(th);
    return std::max(best, refined);
}

// ---------------------------------------------------------------------------
// Grammar
// ---------------------------------------------------------------------------

namespace {

std::vector<double> parse_number_list(const std::string& text,
                                      const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("bad number '" + item + "' in " + what);
        }
    }
    if (out.empty()) throw ConfigError("empty number list in " + what);
    return out;
}

}  // namespace

std::shared_ptr<const Oval> parse_oval(const std::string& spec) {
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    std::shared_ptr<Oval> oval;
    if (kind == "circle") {
        auto v = parse_number_list(args, "circle spec");
        if (v.size() != 1) throw ConfigError("circle:r takes one number");
        oval = std::make_shared<CircleOval>(v[0]);
    } else if (kind == "ellipse") {
        auto v = parse_number_list(args, "ellipse spec");
        if (v.size() != 2) throw ConfigError("ellipse:a,b takes two numbers");
        oval = std::make_shared<EllipseOval>(v[0], v[1]);
    } else if (kind == "support") {
        oval = std::make_shared<SupportOval>(parse_number_list(args, "support spec"));
    } else {
        throw ConfigError("unknown oval kind '" + kind + "'");
    }
    oval->set_spec(spec);
    return oval;
}

}  // namespace finsler
