#include "finsler/caustics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "finsler/errors.hpp"
#include "json.hpp"

namespace finsler {

namespace {

constexpr double kEnvelopeAlphaPrimeMin = 1e-6;
constexpr double kEnvelopeCollapseRel = 1e-6;   // vs scene scale
constexpr double kWitnessChordTol = 1e-6;
constexpr double kExtraGapAllowance = 1e-3;     // on top of the pencil spacing

struct PencilSample {
    double phi;
    double alpha;  // wrapped; unwrapping happens on assembly
    double p;
};

bool shoot(const BilliardTable& table, const Pencil& pencil, double phi,
           PencilSample& out) {
    try {
        OrientedLine line;
        if (pencil.bounces == 0) {
            line = line_from_point_dir(pencil.source, phi);
        } else {
            line = propagate(table, pencil.source, phi, pencil.bounces).final_line;
        }
        out = {phi, line.alpha, line.p};
        return true;
    } catch (const NumericError&) {
        return false;
    }
}

double table_scale(const BilliardTable& table) {
    return 2.0 * table.boundary().max_radius();
}

}  // namespace

// ---------------------------------------------------------------------------
// Dual curve assembly
// ---------------------------------------------------------------------------

DualCurve dual_curve(const BilliardTable& table, const Pencil& pencil,
                     unsigned workers) {
    if (pencil.samples < 512)
        throw ConfigError("pencil needs at least 512 samples");
    if (pencil.bounces < 0) throw ConfigError("bounce count must be >= 0");
    if (!table.boundary().contains(pencil.source))
        throw ConfigError("pencil source must lie inside the table");

    int m = pencil.samples;
    double spacing = kTwoPi / m;
    std::vector<PencilSample> samples(m);
    std::vector<char> ok(m, 0);
    parallel_for(static_cast<std::size_t>(m), workers, [&](std::size_t j) {
        double phi = pencil.offset + spacing * static_cast<double>(j);
        ok[j] = shoot(table, pencil, phi, samples[j]) ? 1 : 0;
    });

    int failures = static_cast<int>(std::count(ok.begin(), ok.end(), 0));
    if (failures > m / 100)
        throw PencilBroken(std::to_string(failures) + " of " +
                           std::to_string(m) + " pencil rays failed");

    std::vector<PencilSample> good;
    good.reserve(m);
    for (int j = 0; j < m; ++j)
        if (ok[j]) good.push_back(samples[j]);
    if (good.empty()) throw PencilBroken("no pencil ray propagated");

    // Bridge the holes left by dropped rays: resample each failed stretch on
    // a fine grid until the unsampled width shrinks below the allowance.
    std::vector<PencilSample> bridged;
    std::size_t g = good.size();
    for (std::size_t i = 0; i < g; ++i) {
        bridged.push_back(good[i]);
        double lo = good[i].phi;
        double hi = (i + 1 < g) ? good[(i + 1) % g].phi
                                : good[0].phi + kTwoPi;
        if (hi - lo <= spacing * 1.5) continue;
        int fill = static_cast<int>(std::ceil((hi - lo) / (0.5 * kExtraGapAllowance)));
        std::vector<PencilSample> extra;
        for (int k = 1; k < fill; ++k) {
            PencilSample s;
            if (shoot(table, pencil, lo + (hi - lo) * k / fill, s))
                extra.push_back(s);
        }
        double prev = lo;
        for (const auto& s : extra) {
            if (s.phi - prev > spacing + kExtraGapAllowance)
                throw PencilBroken("unbridgeable pencil gap at phi = " +
                                   std::to_string(prev));
            bridged.push_back(s);
            prev = s.phi;
        }
        if (hi - prev > spacing + kExtraGapAllowance)
            throw PencilBroken("unbridgeable pencil gap at phi = " +
                               std::to_string(prev));
    }

    std::vector<double> s(bridged.size()), alpha(bridged.size()), p(bridged.size());
    double lift = bridged[0].alpha;
    for (std::size_t i = 0; i < bridged.size(); ++i) {
        s[i] = bridged[i].phi;
        lift += angle_diff(bridged[i].alpha, wrap_angle(lift));
        alpha[i] = lift;
        p[i] = bridged[i].p;
    }
    return DualCurve(std::move(s), std::move(alpha), std::move(p), kTwoPi,
                     spacing + kExtraGapAllowance + spacing);
}

// ---------------------------------------------------------------------------
// Envelope
// ---------------------------------------------------------------------------

std::vector<Point2> envelope_points(const DualCurve& curve) {
    std::size_t m = curve.size();
    std::vector<Point2> env(m);
    for (std::size_t i = 0; i < m; ++i) {
        double s = curve.s()[i];
        double a = curve.alpha_at(s);
        double a1 = curve.alpha1_at(s);
        Vec2 n = OrientedLine::normal(a);
        Vec2 d = OrientedLine::direction(a);
        if (std::fabs(a1) >= kEnvelopeAlphaPrimeMin) {
            env[i] = curve.p_at(s) * n + (curve.p1_at(s) / a1) * d;
        } else {
            // Stationary direction: intersect the two neighbouring lines.
            std::size_t prev = (i + m - 1) % m, next = (i + 1) % m;
            double a_prev = curve.alpha()[prev], a_next = curve.alpha()[next];
            Vec2 n1 = OrientedLine::normal(a_prev);
            Vec2 n2 = OrientedLine::normal(a_next);
            double det = cross(n1, n2);
            if (std::fabs(det) > 1e-12) {
                double p1 = curve.p()[prev], p2 = curve.p()[next];
                env[i] = Point2{(p1 * n2.y - p2 * n1.y) / det,
                                (p2 * n1.x - p1 * n2.x) / det};
            } else {
                env[i] = curve.p_at(s) * n;
            }
        }
    }
    return env;
}

std::vector<Point2> envelope(const DualCurve& curve, double scene_scale) {
    auto env = envelope_points(curve);
    double extent = bbox_diameter(env);
    if (extent < kEnvelopeCollapseRel * scene_scale) {
        Point2 c = polyline_centroid(env);
        throw DegenerateEnvelope("envelope collapsed to a point", c.x, c.y, extent);
    }
    return env;
}

// ---------------------------------------------------------------------------
// Cusp counting
// ---------------------------------------------------------------------------

namespace {

int envelope_reversals(const std::vector<Point2>& env) {
    std::size_t m = env.size();
    std::vector<Vec2> dirs;
    dirs.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        Vec2 step = env[(i + 1) % m] - env[i];
        if (step.norm() > 1e-14) dirs.push_back(step.normalized());
    }
    int flips = 0;
    for (std::size_t i = 0; i < dirs.size(); ++i)
        if (dot(dirs[i], dirs[(i + 1) % dirs.size()]) < 0.0) ++flips;
    return flips;
}

}  // namespace

std::vector<double> cusp_parameters(const DualCurve& curve) {
    InflectionResult infl = inflections(curve);
    int reversals = envelope_reversals(envelope_points(curve));
    if (reversals != static_cast<int>(infl.zeros.size()))
        throw CuspCountMismatch(
            "det zeros: " + std::to_string(infl.zeros.size()) +
            ", envelope direction reversals: " + std::to_string(reversals));
    return infl.zeros;
}

// ---------------------------------------------------------------------------
// Segre check
// ---------------------------------------------------------------------------

SegreCheck segre_check(const DualCurve& curve, const BilliardTable& table,
                       const Pencil& pencil, int probe_grid) {
    SegreCheck result;
    double half = 1.5 * table_scale(table);  // 3x the table diameter overall
    std::vector<Point2> probes;
    for (int i = 0; i < probe_grid; ++i)
        for (int j = 0; j < probe_grid; ++j)
            probes.push_back({-half + 2.0 * half * (i + 0.5) / probe_grid,
                              -half + 2.0 * half * (j + 0.5) / probe_grid});
    result.probes = static_cast<int>(probes.size());

    auto meets = meets_all_lines(curve, probes);
    result.all_met = true;
    for (std::size_t k = 0; k < probes.size(); ++k) {
        if (!meets[k].meets) {
            result.all_met = false;
            result.failed_probes.push_back(static_cast<int>(k));
            continue;
        }
        const Point2& A = probes[k];
        if (pencil.bounces < 1) continue;
        if (!(table.boundary().implicit(A) < -1e-6)) continue;
        ++result.interior_witnesses;

        // The witness parameter is an initial direction whose final line
        // passes through A; certify it as an n-bounce shot from the source.
        bool verified = false;
        try {
            double s_w = meets[k].witness_s.value();
            Trajectory traj = propagate(table, pencil.source, s_w, pencil.bounces);
            double off_line = std::fabs(traj.final_line.signed_distance(A));
            Point2 xn = traj.points.back();
            double along = dot(A - xn, traj.final_line.direction());
            double chord =
                dot(table.boundary().point(traj.exit_t) - xn, traj.final_line.direction());
            if (off_line < kWitnessChordTol && along > 0.0 && along < chord) {
                ShotOptions opts;
                opts.seeds_per_dim = 0;
                opts.extra_seeds = {traj.params};
                verified = !n_bounce_shots(table, pencil.source, A,
                                           pencil.bounces, opts)
                                .empty();
            }
        } catch (const NumericError&) {
            verified = false;
        }
        if (!verified)
            result.unverified_witnesses.push_back(static_cast<int>(k));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

CausticReport four_cusp_verify(const BilliardTable& table, Point2 source,
                               int bounces, int samples,
                               const CausticOptions& opts) {
    double scale = table_scale(table);
    int m = samples;
    CausticReport report;
    for (int attempt = 0; attempt <= opts.max_doublings; ++attempt, m *= 2) {
        Pencil pencil{source, bounces, m, 0.0};
        report = CausticReport{};
        report.n = bounces;
        report.samples = m;
        report.dual = dual_curve(table, pencil, opts.workers);
        report.winding = winding(report.dual);
        report.envelope = envelope_points(report.dual);
        report.envelope_extent = bbox_diameter(report.envelope);
        report.collapse_point = polyline_centroid(report.envelope);

        if (report.envelope_extent < kEnvelopeCollapseRel * scale) {
            report.degenerate = true;
            return report;
        }
        std::vector<double> zeros;
        try {
            InflectionResult infl = inflections(report.dual);
            int reversals = envelope_reversals(report.envelope);
            if (reversals != static_cast<int>(infl.zeros.size()))
                throw CuspCountMismatch(
                    "det zeros: " + std::to_string(infl.zeros.size()) +
                    ", envelope direction reversals: " + std::to_string(reversals));
            zeros = infl.zeros;
            report.non_generic = infl.non_generic;
        } catch (const DegenerateCurve&) {
            report.degenerate = true;
            return report;
        }

        // Crowded zeros: double the sampling and retry.
        bool crowded = false;
        double min_gap = 4.0 * kTwoPi / m;
        for (std::size_t i = 0; i < zeros.size(); ++i) {
            double gap = cyclic_dist(zeros[i], zeros[(i + 1) % zeros.size()], kTwoPi);
            if (zeros.size() > 1 && gap < min_gap) crowded = true;
        }
        if (crowded && attempt < opts.max_doublings) continue;

        report.cusp_count = static_cast<int>(zeros.size());
        std::vector<double> dirs;
        for (double s : zeros) {
            CuspInfo cusp;
            cusp.s = s;
            cusp.alpha = report.dual.alpha_at(s);
            cusp.p = report.dual.p_at(s);
            double a1 = report.dual.alpha1_at(s);
            Vec2 n = OrientedLine::normal(cusp.alpha);
            Vec2 d = OrientedLine::direction(cusp.alpha);
            cusp.point = (std::fabs(a1) >= kEnvelopeAlphaPrimeMin)
                             ? Point2(cusp.p * n + (report.dual.p1_at(s) / a1) * d)
                             : report.envelope[0];
            report.cusps.push_back(cusp);
            dirs.push_back(wrap_angle(s));
        }
        std::sort(dirs.begin(), dirs.end());
        report.distinct_source_lines = 0;
        for (std::size_t i = 0; i < dirs.size(); ++i) {
            double next = (i + 1 < dirs.size()) ? dirs[i + 1] : dirs[0] + kTwoPi;
            if (next - dirs[i] > 1e-6) ++report.distinct_source_lines;
        }

        if (opts.run_segre) {
            Pencil p2{source, bounces, m, 0.0};
            SegreCheck segre = segre_check(report.dual, table, p2, opts.probe_grid);
            report.segre_ok = segre.all_met && segre.unverified_witnesses.empty();
            report.segre_probes = segre.probes;
            report.segre_interior_witnesses = segre.interior_witnesses;
            report.segre_failed_probes =
                static_cast<int>(segre.failed_probes.size() +
                                 segre.unverified_witnesses.size());
        }
        return report;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

void write_envelope_csv(const std::string& path, const DualCurve& curve,
                        const std::vector<Point2>& envelope) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw ConfigError("cannot open '" + path + "' for writing");
    std::fputs("s,x,y\n", fp);
    for (std::size_t i = 0; i < envelope.size(); ++i)
        std::fprintf(fp, "%.17g,%.17g,%.17g\n", curve.s()[i], envelope[i].x,
                     envelope[i].y);
    std::fclose(fp);
}

void write_caustic_report_json(const std::string& path,
                               const CausticReport& report,
                               const std::string& envelope_csv,
                               const std::string& table_spec,
                               const std::string& metric_spec,
                               Point2 source, const std::string& figure_tag) {
    nlohmann::ordered_json j;
    j["n"] = report.n;
    j["cusp_count"] = report.cusp_count;
    j["winding"] = report.winding;
    j["segre_ok"] = report.segre_ok;
    j["degenerate"] = report.degenerate;
    j["cusps"] = nlohmann::ordered_json::array();
    for (const auto& c : report.cusps) {
        j["cusps"].push_back({{"s", c.s},
                              {"alpha", c.alpha},
                              {"p", c.p},
                              {"x", c.point.x},
                              {"y", c.point.y}});
    }
    j["envelope_csv"] = envelope_csv;
    j["distinct_source_lines"] = report.distinct_source_lines;
    j["non_generic"] = report.non_generic;
    j["samples"] = report.samples;
    j["envelope_extent"] = report.envelope_extent;
    if (report.degenerate) {
        j["collapse_point"] = {report.collapse_point.x, report.collapse_point.y};
    }
    j["segre"] = {{"probes", report.segre_probes},
                  {"interior_witnesses", report.segre_interior_witnesses},
                  {"failed", report.segre_failed_probes}};
    j["scene"] = {{"table", table_spec},
                  {"metric", metric_spec},
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
