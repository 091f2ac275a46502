#include "finsler/magnetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "finsler/errors.hpp"
#include "json.hpp"

namespace finsler {

namespace {

constexpr double kArcStep = std::numbers::pi / 64.0;  // bracketing step
constexpr double kArcGuard = 1e-9;                    // excludes the start point
constexpr double kArcTol = 1e-14;                     // arc-angle refinement
constexpr double kTangentSine = 1e-10;

}  // namespace

// ---------------------------------------------------------------------------
// MagneticBilliard
// ---------------------------------------------------------------------------

MagneticBilliard::MagneticBilliard(std::shared_ptr<const Oval> table,
                                   double larmor_radius)
    : table_(std::move(table)), R_(larmor_radius) {
    if (!table_) throw ConfigError("magnetic billiard needs a table");
    if (!(R_ > 0.0)) throw ConfigError("Larmor radius must be positive");
    if (!(table_->min_curvature(2048) > 1.0 / R_))
        throw WeakFieldViolation(
            "weak-field condition fails: min boundary curvature <= 1/R");
}

// ---------------------------------------------------------------------------
// Arc advance
// ---------------------------------------------------------------------------

LarmorArc larmor_advance(const MagneticBilliard& mb, Point2 x, Vec2 v,
                         bool on_boundary) {
    const Oval& oval = mb.table();
    double R = mb.larmor_radius();
    Vec2 v_hat = v.normalized();
    Vec2 w0 = -perp(v_hat);              // (x - center) / R
    Point2 center = x + R * perp(v_hat);

    // P(theta) = x + R ((cos theta - 1) w0 + sin theta J w0), stable for
    // small arcs even at huge R.
    auto pos = [&](double theta) {
        double c1 = -2.0 * std::sin(0.5 * theta) * std::sin(0.5 * theta);
        return x + R * (c1 * w0 + std::sin(theta) * perp(w0));
    };
    auto g = [&](double theta) { return oval.implicit(pos(theta)); };

    double lo = on_boundary ? kArcGuard : 0.0;
    double glo = g(lo);
    if (on_boundary && !(glo < 0.0))
        throw NoProgress("arc does not enter the table from its start point");

    double theta_hit = -1.0;
    for (double hi = kArcStep; hi <= kTwoPi + kArcStep; hi += kArcStep) {
        double ghi = g(hi);
        if (glo < 0.0 && ghi >= 0.0) {
            theta_hit = refine_root(g, lo, hi, glo, ghi, kArcTol);
            break;
        }
        lo = hi;
        glo = ghi;
    }
    if (theta_hit < 0.0)
        throw NoProgress("Larmor arc never crossed the boundary");

    LarmorArc arc;
    arc.start = x;
    arc.center = center;
    arc.arc_angle = theta_hit;
    Point2 hit = pos(theta_hit);
    arc.t_hit = oval.locate(hit);
    arc.dir_at_hit = rotate(v_hat, theta_hit);
    if (std::fabs(dot(arc.dir_at_hit, oval.outward_normal(arc.t_hit))) <
        kTangentSine)
        throw TangentArc("arc meets the boundary tangentially");
    return arc;
}

MagneticTrajectory magnetic_propagate(const MagneticBilliard& mb, Point2 source,
                                      double phi, int bounces) {
    if (bounces < 1) throw ConfigError("magnetic propagation needs n >= 1");
    if (!mb.table().contains(source))
        throw ConfigError("source must lie strictly inside the table");
    MagneticTrajectory traj;
    traj.source = source;
    traj.initial_angle = phi;

    Point2 x = source;
    Vec2 v = unit_dir(phi);
    bool on_boundary = false;
    for (int k = 0; k < bounces; ++k) {
        LarmorArc arc = larmor_advance(mb, x, v, on_boundary);
        traj.arcs.push_back(arc);
        Vec2 N = mb.table().outward_normal(arc.t_hit);
        v = arc.dir_at_hit - 2.0 * dot(arc.dir_at_hit, N) * N;  // specular
        x = mb.table().point(arc.t_hit);
        on_boundary = true;
    }
    traj.final_dir = v;
    traj.final_center = x + mb.larmor_radius() * perp(v);
    return traj;
}

// ---------------------------------------------------------------------------
// Center curve
// ---------------------------------------------------------------------------

CenterCurve::CenterCurve(std::vector<double> s, std::vector<Point2> centers,
                         double period)
    : s_(std::move(s)), centers_(std::move(centers)) {
    std::vector<double> xs(centers_.size()), ys(centers_.size());
    for (std::size_t i = 0; i < centers_.size(); ++i) {
        xs[i] = centers_[i].x;
        ys[i] = centers_[i].y;
    }
    sx_ = PeriodicSpline(s_, xs, period);
    sy_ = PeriodicSpline(s_, ys, period);
}

Point2 CenterCurve::point(double s) const { return {sx_.eval(s), sy_.eval(s)}; }
Vec2 CenterCurve::deriv(double s) const { return {sx_.deriv(s), sy_.deriv(s)}; }
Vec2 CenterCurve::deriv2(double s) const { return {sx_.deriv2(s), sy_.deriv2(s)}; }

double CenterCurve::curvature(double s) const {
    Vec2 d1 = deriv(s), d2 = deriv2(s);
    double speed = d1.norm();
    return cross(d1, d2) / (speed * speed * speed);
}

Vec2 CenterCurve::normal(double s) const { return perp(deriv(s).normalized()); }

CenterCurve magnetic_center_curve(const MagneticBilliard& mb, Point2 source,
                                  int bounces, int samples, unsigned workers) {
    if (samples < 512) throw ConfigError("center curve needs >= 512 samples");
    std::vector<double> s(samples);
    std::vector<Point2> centers(samples);
    std::vector<char> ok(samples, 0);
    parallel_for(static_cast<std::size_t>(samples), workers, [&](std::size_t j) {
        double phi = kTwoPi * static_cast<double>(j) / samples;
        s[j] = phi;
        try {
            centers[j] = magnetic_propagate(mb, source, phi, bounces).final_center;
            ok[j] = 1;
        } catch (const NumericError&) {
            ok[j] = 0;
        }
    });
    std::vector<double> s_ok;
    std::vector<Point2> c_ok;
    for (int j = 0; j < samples; ++j) {
        if (!ok[j]) continue;
        s_ok.push_back(s[j]);
        c_ok.push_back(centers[j]);
    }
    if (static_cast<int>(s_ok.size()) < samples - samples / 100)
        throw PencilBroken("too many magnetic pencil failures");
    return CenterCurve(std::move(s_ok), std::move(c_ok));
}

// ---------------------------------------------------------------------------
// Offsets
// ---------------------------------------------------------------------------

CircleFamilyEnvelope circle_family_envelope(const CenterCurve& cc, double R) {
    CircleFamilyEnvelope out;
    if (bbox_diameter(cc.centers()) < 1e-9 * std::max(1.0, R)) {
        // All circles coincide: the envelope is that single circle.
        out.degenerate = true;
        Point2 c = polyline_centroid(cc.centers());
        for (int i = 0; i < 256; ++i) {
            double a = kTwoPi * i / 256;
            out.inner.push_back(c + R * unit_dir(a));
        }
        out.outer = out.inner;
        return out;
    }
    std::vector<Point2> plus, minus;
    plus.reserve(cc.size());
    minus.reserve(cc.size());
    for (std::size_t i = 0; i < cc.size(); ++i) {
        double s = cc.s()[i];
        Point2 c = cc.centers()[i];
        Vec2 nu = cc.normal(s);
        plus.push_back(c + R * nu);
        minus.push_back(c - R * nu);
    }
    if (std::fabs(polygon_area(plus)) <= std::fabs(polygon_area(minus))) {
        out.inner = std::move(plus);
        out.outer = std::move(minus);
    } else {
        out.inner = std::move(minus);
        out.outer = std::move(plus);
    }
    return out;
}

OffsetCuspReport offset_cusps(const CenterCurve& cc, double R) {
    if (bbox_diameter(cc.centers()) < 1e-9 * std::max(1.0, R))
        throw DegenerateCenterCurve("center curve collapsed to a point");

    OffsetCuspReport report;
    std::size_t m = cc.size();
    double s0 = cc.s().front();

    // Which sign corresponds to the inner component (same area rule as the
    // envelope assembly).
    std::vector<Point2> plus;
    for (std::size_t i = 0; i < m; ++i) {
        double s = cc.s()[i];
        plus.push_back(cc.centers()[i] + R * cc.normal(s));
    }
    std::vector<Point2> minus;
    for (std::size_t i = 0; i < m; ++i) {
        double s = cc.s()[i];
        minus.push_back(cc.centers()[i] - R * cc.normal(s));
    }
    bool plus_is_inner =
        std::fabs(polygon_area(plus)) <= std::fabs(polygon_area(minus));

    for (int sign : {+1, -1}) {
        auto f = [&cc, R, sign](double s) {
            return 1.0 - sign * R * cc.curvature(s);
        };
        std::vector<double> zeros;
        std::vector<double> tangential;
        double max_abs = 0.0;
        std::vector<double> fv(m);
        for (std::size_t i = 0; i < m; ++i) {
            fv[i] = f(cc.s()[i]);
            max_abs = std::max(max_abs, std::fabs(fv[i]));
        }
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t j = (i + 1) % m;
            double a = cc.s()[i];
            double b = (j == 0) ? s0 + kTwoPi : cc.s()[j];
            if (fv[i] == 0.0) {
                zeros.push_back(a);
            } else if (fv[i] * fv[j] < 0.0) {
                zeros.push_back(refine_root(f, a, b, fv[i], fv[j], 1e-10));
            } else if (std::fabs(fv[i]) < 1e-6 * max_abs) {
                std::size_t prev = (i + m - 1) % m;
                if (std::fabs(fv[i]) <= std::fabs(fv[prev]) &&
                    std::fabs(fv[i]) <= std::fabs(fv[j]))
                    tangential.push_back(a);
            }
        }
        bool inner = (sign == +1) ? plus_is_inner : !plus_is_inner;
        if (inner) {
            report.inner_count = static_cast<int>(zeros.size());
            report.inner_sign = sign;
            report.inner_params = std::move(zeros);
        } else {
            report.outer_count = static_cast<int>(zeros.size());
            report.outer_params = std::move(zeros);
        }
        report.non_generic.insert(report.non_generic.end(), tangential.begin(),
                                  tangential.end());
    }
    return report;
}

MagneticReport magnetic_caustic_report(const MagneticBilliard& mb, Point2 source,
                                       int bounces, int samples,
                                       unsigned workers) {
    MagneticReport report;
    report.n = bounces;
    report.larmor_radius = mb.larmor_radius();
    report.samples = samples;
    report.centers = magnetic_center_curve(mb, source, bounces, samples, workers);
    report.envelope = circle_family_envelope(report.centers, mb.larmor_radius());
    report.degenerate = report.envelope.degenerate;
    if (!report.degenerate)
        report.cusps = offset_cusps(report.centers, mb.larmor_radius());
    return report;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

void write_component_csv(const std::string& path,
                         const std::vector<Point2>& polyline) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw ConfigError("cannot open '" + path + "' for writing");
    std::fputs("x,y\n", fp);
    for (const auto& p : polyline)
        std::fprintf(fp, "%.17g,%.17g\n", p.x, p.y);
    std::fclose(fp);
}

void write_magnetic_report_json(const std::string& path,
                                const MagneticReport& report,
                                const std::string& inner_csv,
                                const std::string& outer_csv,
                                const std::string& table_spec, Point2 source,
                                const std::string& figure_tag) {
    nlohmann::ordered_json j;
    j["n"] = report.n;
    j["larmor_radius"] = report.larmor_radius;
    j["degenerate"] = report.degenerate;
    auto component = [&](const char* name, int count, int sign,
                         const std::vector<double>& params,
                         const std::string& csv) {
        nlohmann::ordered_json c;
        c["component"] = name;
        c["cusp_count"] = count;
        c["cusps"] = nlohmann::ordered_json::array();
        for (double s : params) {
            Point2 pt = report.centers.point(s) +
                        sign * report.larmor_radius * report.centers.normal(s);
            c["cusps"].push_back({{"s", s}, {"x", pt.x}, {"y", pt.y}});
        }
        c["envelope_csv"] = csv;
        return c;
    };
    j["components"] = nlohmann::ordered_json::array();
    j["components"].push_back(component("inner", report.cusps.inner_count,
                                        report.cusps.inner_sign,
                                        report.cusps.inner_params, inner_csv));
    j["components"].push_back(component("outer", report.cusps.outer_count,
                                        -report.cusps.inner_sign,
                                        report.cusps.outer_params, outer_csv));
    j["non_generic"] = report.cusps.non_generic;
    j["samples"] = report.samples;
    j["scene"] = {{"table", table_spec},
                  {"source", {source.x, source.y}},
                  {"figure", figure_tag}};
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw ConfigError("cannot open '" + path + "' for writing");
    std::string text = j.dump(2);
    std::fwrite(text.data(), 1, text.size(), fp);
    std::fputc('\n', fp);
    std::fclose(fp);
}

}  // namespace finsler
