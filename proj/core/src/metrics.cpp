#include "finsler/metrics.hpp"

#include <cmath>
#include <sstream>

#include "finsler/errors.hpp"
#include "finsler/numerics.hpp"

namespace finsler {

namespace {

constexpr double kTangentStep = 1e-5;       // central differences: balances truncation vs roundoff
constexpr double kSegmentRelTol = 1e-10;    // segment_length quadrature
constexpr int kDomainProbes = 17;           // samples along a segment

std::vector<double> parse_coeff_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("bad number '" + item + "' in metric spec");
        }
    }
    if (out.empty()) throw ConfigError("empty coefficient list in metric spec");
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Base
// ---------------------------------------------------------------------------

Vec2 FinslerMetric::indicatrix_tangent(Point2 x, double phi) const {
    Vec2 hi = indicatrix_point(x, phi + kTangentStep);
    Vec2 lo = indicatrix_point(x, phi - kTangentStep);
    return (hi - lo).normalized();
}

// ---------------------------------------------------------------------------
// Minkowski
// ---------------------------------------------------------------------------

MinkowskiMetric::MinkowskiMetric(std::function<double(double)> rho,
                                 std::function<double(double)> drho,
                                 std::string label)
    : rho_(std::move(rho)), drho_(std::move(drho)), label_(std::move(label)) {
    validate_convex();
    // Reversible iff rho(phi + pi) == rho(phi).
    reversible_ = true;
    for (int i = 0; i < 64; ++i) {
        double phi = kTwoPi * i / 64;
        if (std::fabs(rho_(phi) - rho_(phi + std::numbers::pi)) > 1e-12) {
            reversible_ = false;
            break;
        }
    }
}

MinkowskiMetric MinkowskiMetric::from_fourier(std::vector<double> coeffs) {
    auto profile = [coeffs](double phi) {
        double v = coeffs[0];
        for (std::size_t k = 1; 2 * k - 1 < coeffs.size(); ++k) {
            double a = coeffs[2 * k - 1];
            double b = (2 * k < coeffs.size()) ? coeffs[2 * k] : 0.0;
            v += a * std::cos(k * phi) + b * std::sin(k * phi);
        }
        return v;
    };
    auto derivative = [coeffs](double phi) {
        double v = 0.0;
        for (std::size_t k = 1; 2 * k - 1 < coeffs.size(); ++k) {
            double a = coeffs[2 * k - 1];
            double b = (2 * k < coeffs.size()) ? coeffs[2 * k] : 0.0;
            v += k * (-a * std::sin(k * phi) + b * std::cos(k * phi));
        }
        return v;
    };
    std::string label = "minkowski:rho=";
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (i) label += ',';
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", coeffs[i]);
        label += buf;
    }
    return MinkowskiMetric(profile, derivative, label);
}

double MinkowskiMetric::norm(Point2, Vec2 v) const {
    if (v.x == 0.0 && v.y == 0.0) return 0.0;
    return v.norm() / rho_(v.angle());
}

double MinkowskiMetric::drho(double phi) const {
    if (drho_) return drho_(phi);
    // Step balancing truncation against cancellation in double precision.
    double h = 1e-5;
    return (rho_(phi + h) - rho_(phi - h)) / (2.0 * h);
}

Vec2 MinkowskiMetric::indicatrix_tangent(Point2, double phi) const {
    // Polar curve I(phi) = rho(phi) u(phi); I' = rho' u + rho u_perp.
    Vec2 u = unit_dir(phi);
    return (drho(phi) * u + rho_(phi) * perp(u)).normalized();
}

void MinkowskiMetric::validate_convex(bool image) const {
    const int grid = 2048;
    const double h = 1e-5;
    for (int i = 0; i < grid; ++i) {
        double phi = kTwoPi * i / grid;
        double r = rho_(phi);
        if (!(r > 0.0)) {
            if (image) throw ImageNotConvex("radial profile not positive");
            throw NotConvex("radial profile not positive");
        }
        double rp = rho_(phi + h), rm = rho_(phi - h);
        double r1 = (rp - rm) / (2.0 * h);
        double r2 = (rp - 2.0 * r + rm) / (h * h);
        // Curvature sign of a polar curve: rho^2 + 2 rho'^2 - rho rho''.
        if (!(r * r + 2.0 * r1 * r1 - r * r2 > 0.0)) {
            if (image) throw ImageNotConvex("indicatrix not strictly convex");
            throw NotConvex("indicatrix not strictly convex");
        }
    }
}

std::string QuadraticMetric::spec() const {
    std::ostringstream os;
    os << "quadratic:" << a_ << "," << b_;
    return os.str();
}

// ---------------------------------------------------------------------------
// Magnetic
// ---------------------------------------------------------------------------

MagneticMetric::MagneticMetric(double larmor_radius) : R_(larmor_radius) {
    if (!(R_ > 0.0)) throw ConfigError("Larmor radius must be positive");
}

double MagneticMetric::norm(Point2 x, Vec2 v) const {
    if (!domain_contains(x))
        throw FieldTooStrong("norm evaluated where |x| >= 2R");
    return v.norm() + cross(v, x) / (2.0 * R_);
}

Vec2 MagneticMetric::indicatrix_tangent(Point2 x, double phi) const {
    Vec2 v = indicatrix_point(x, phi);
    Vec2 grad = v.normalized() + Vec2{x.y, -x.x} / (2.0 * R_);
    return perp(grad).normalized();
}

bool MagneticMetric::domain_contains(Point2 x) const {
    return x.norm() < 2.0 * R_;
}

std::string MagneticMetric::spec() const {
    std::ostringstream os;
    os << "magnetic:" << R_;
    return os.str();
}

// ---------------------------------------------------------------------------
// Funk / Hilbert
// ---------------------------------------------------------------------------

FunkMetric::FunkMetric(std::shared_ptr<const Oval> omega)
    : omega_(std::move(omega)) {
    if (!omega_) throw ConfigError("Funk metric needs a domain oval");
}

double FunkMetric::norm(Point2 x, Vec2 v) const {
    if (v.x == 0.0 && v.y == 0.0) return 0.0;
    if (!domain_contains(x))
        throw DomainEscape("Funk norm evaluated outside the domain");
    double t = omega_->ray_first_hit(x, v.angle());
    double reach = (omega_->point(t) - x).norm();
    return v.norm() / reach;
}

Vec2 FunkMetric::indicatrix_tangent(Point2 x, double phi) const {
    // The indicatrix at x is the domain boundary translated by -x, so its
    // tangent is the boundary tangent at the hit point.
    double t = omega_->ray_first_hit(x, phi);
    return omega_->tangent(t);
}

bool FunkMetric::domain_contains(Point2 x) const {
    return omega_->implicit(x) < 0.0;
}

HilbertMetric::HilbertMetric(std::shared_ptr<const Oval> omega)
    : funk_(omega), omega_(std::move(omega)) {}

double HilbertMetric::norm(Point2 x, Vec2 v) const {
    if (v.x == 0.0 && v.y == 0.0) return 0.0;
    return 0.5 * (funk_.norm(x, v) + funk_.norm(x, -v));
}

bool HilbertMetric::domain_contains(Point2 x) const {
    return funk_.domain_contains(x);
}

// ---------------------------------------------------------------------------
// Busemann
// ---------------------------------------------------------------------------

BusemannMetric::BusemannMetric(std::function<double(double, double)> density,
                               std::string label, int nodes)
    : density_(std::move(density)), label_(std::move(label)), nodes_(nodes) {
    if (!density_) throw ConfigError("Busemann metric needs a density");
}

double BusemannMetric::norm(Point2 x, Vec2 v) const {
    if (v.x == 0.0 && v.y == 0.0) return 0.0;
    // |<v, n(alpha)>| = |v| |sin(alpha - theta_v)| has kinks at theta_v and
    // theta_v + pi; split there and use Gauss panels on the smooth halves.
    double theta = v.angle();
    auto integrand = [&](double alpha) {
        Vec2 n = OrientedLine::normal(alpha);
        return density_(wrap_angle(alpha), dot(x, n)) * std::fabs(dot(v, n));
    };
    int panels = std::max(2, nodes_ / 32);
    double total = 0.0;
    for (int half = 0; half < 2; ++half) {
        double a = theta + half * std::numbers::pi;
        double b = a + std::numbers::pi;
        double step = (b - a) / panels;
        for (int i = 0; i < panels; ++i)
            total += gauss_integrate(integrand, a + i * step, a + (i + 1) * step, 16);
    }
    return 0.25 * total;
}

std::function<double(double, double)> busemann_density(const std::string& id) {
    if (id == "flat") return [](double, double) { return 1.0; };
    if (id == "pquad") return [](double, double p) { return 1.0 + 0.5 * p * p; };
    if (id == "aniso")
        return [](double alpha, double) { return 1.0 + 0.3 * std::cos(2.0 * alpha); };
    throw ConfigError("unknown Busemann density '" + id + "'");
}

// ---------------------------------------------------------------------------
// Grammar
// ---------------------------------------------------------------------------

std::shared_ptr<const FinslerMetric> parse_metric(const std::string& spec) {
    if (spec == "euclid") return std::make_shared<EuclideanMetric>();
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "minkowski") {
        if (args.rfind("rho=", 0) != 0)
            throw ConfigError("minkowski spec must be minkowski:rho=c0,a1,b1,...");
        return std::make_shared<MinkowskiMetric>(
            MinkowskiMetric::from_fourier(parse_coeff_list(args.substr(4))));
    }
    if (kind == "funk") return std::make_shared<FunkMetric>(parse_oval(args));
    if (kind == "hilbert") return std::make_shared<HilbertMetric>(parse_oval(args));
    if (kind == "magnetic") {
        auto v = parse_coeff_list(args);
        if (v.size() != 1) throw ConfigError("magnetic:R takes one number");
        return std::make_shared<MagneticMetric>(v[0]);
    }
    if (kind == "busemann")
        return std::make_shared<BusemannMetric>(busemann_density(args), args);
    throw ConfigError("unknown metric '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

double segment_length(const FinslerMetric& metric, Point2 x, Point2 y) {
    Vec2 d = y - x;
    for (int i = 0; i < kDomainProbes; ++i) {
        double t = static_cast<double>(i) / (kDomainProbes - 1);
        if (!metric.domain_contains(x + t * d))
            throw DomainEscape("segment leaves the metric domain");
    }
    auto f = [&](double t) { return metric.norm(x + t * d, d); };
    return integrate(f, 0.0, 1.0, kSegmentRelTol);
}

namespace {

Point2 boundary_hit(const Oval& omega, Point2 from, Point2 toward) {
    double t = omega.ray_first_hit(from, (toward - from).angle());
    return omega.point(t);
}

}  // namespace

double funk_distance(const Oval& omega, Point2 x, Point2 y) {
    if ((x - y).norm() < 1e-15)
        throw CoincidentPoints("funk_distance needs x != y");
    if (!(omega.implicit(x) < 0.0) || !(omega.implicit(y) < 0.0))
        throw DomainEscape("funk_distance arguments must lie inside the domain");
    Point2 b = boundary_hit(omega, x, y);
    return std::log((x - b).norm() / (y - b).norm());
}

double hilbert_distance(const Oval& omega, Point2 x, Point2 y) {
    if ((x - y).norm() < 1e-15)
        throw CoincidentPoints("hilbert_distance needs x != y");
    if (!(omega.implicit(x) < 0.0) || !(omega.implicit(y) < 0.0))
        throw DomainEscape("hilbert_distance arguments must lie inside the domain");
    Point2 b = boundary_hit(omega, x, y);
    Point2 a = boundary_hit(omega, y, x);
    double ratio = ((y - a).norm() * (x - b).norm()) /
                   ((y - b).norm() * (x - a).norm());
    return 0.5 * std::log(ratio);
}

KeplerParams kepler_params(double t) {
    if (!(std::fabs(t) < 1.0))
        throw FieldTooStrong("kepler_params needs |t| < 1");
    double d = 1.0 - t * t;
    return {1.0 / d, 1.0 / std::sqrt(d), t / d};
}

double verify_kepler_indicatrix(const MagneticMetric& metric, Point2 x,
                                int samples) {
    double t = x.norm() / (2.0 * metric.larmor_radius());
    KeplerParams k = kepler_params(t);
    // Rotate so the magnetic one-form at x becomes t * v1.
    Vec2 e = (t > 0.0) ? Vec2{x.y, -x.x}.normalized() : Vec2{1.0, 0.0};
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        double phi = kTwoPi * i / samples;
        Vec2 v = metric.indicatrix_point(x, phi);
        Vec2 vr{dot(e, v), cross(e, v)};
        double r1 = (vr.x + k.c) / k.a;
        double r2 = vr.y / k.b;
        worst = std::max(worst, std::fabs(r1 * r1 + r2 * r2 - 1.0));
    }
    return worst;
}

Vec2 legendre_dual(const FinslerMetric& metric, Point2 x, Vec2 v) {
    Vec2 tau = metric.indicatrix_tangent(x, v.angle());
    Vec2 n = perp(tau);
    double nv = dot(n, v);
    if (nv == 0.0)
        throw NumericError("LegendreDegenerate",
                           "indicatrix tangent passes through the origin");
    return n / nv;
}

}  // namespace finsler
