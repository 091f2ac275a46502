#include "finsler/verify.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "finsler/billiard.hpp"
#include "finsler/caustics.hpp"
#include "finsler/errors.hpp"
#include "finsler/linespace.hpp"
#include "finsler/magnetic.hpp"
#include "finsler/metrics.hpp"
#include "json.hpp"

namespace finsler {

namespace {

struct Suite {
    std::vector<CheckResult> results;
    double scale;
    unsigned workers;

    void below(const std::string& name, double measured, double threshold,
               bool discretization = false, const std::string& detail = "") {
        double effective =
            discretization ? threshold : threshold * scale;
        results.push_back({name, measured < effective, measured, threshold,
                           "below", discretization, detail});
    }
    void above(const std::string& name, double measured, double threshold,
               const std::string& detail = "") {
        results.push_back({name, measured > threshold, measured, threshold,
                           "above", false, detail});
    }
};

Vec2 incoming_at(const BilliardTable& table, double t, double incidence) {
    Point2 x = table.boundary().point(t);
    Vec2 T = table.boundary().tangent(t);
    Vec2 N = table.boundary().outward_normal(t);
    Vec2 u_hat = std::cos(incidence) * T + std::sin(incidence) * N;
    return u_hat / table.metric().norm(x, u_hat);
}

void geom_checks(Suite& s) {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    std::uniform_real_distribution<double> A(0.0, kTwoPi);
    double worst = 0.0;
    for (int k = 0; k < 500; ++k) {
        Point2 P{U(rng), U(rng)};
        auto l = line_from_point_dir(P, A(rng));
        worst = std::max(worst,
                         std::fabs(dot(P, l.normal()) - l.p) / (1.0 + P.norm()));
    }
    s.below("geom.point_on_own_line", worst, 1e-14);

    // Negative control: flipping the frame convention must break the
    // dual-point identity p(alpha) = a sin(alpha) - b cos(alpha).
    double flipped = 0.0;
    for (int k = 0; k < 32; ++k) {
        double alpha = kTwoPi * k / 32;
        Point2 P{1.0, 0.5};
        Vec2 n_flipped{-std::sin(alpha), std::cos(alpha)};
        flipped = std::max(flipped,
                           std::fabs(dot(P, n_flipped) - dual_of_point(P, alpha)));
    }
    s.above("geom.flipped_frame_breaks_duality", flipped, 0.1);

    SupportOval blob({1.0, 0.0, 0.0, 0.08, -0.03, 0.0, 0.0, 0.02});
    std::uniform_real_distribution<double> V(-0.4, 0.4);
    double off = 0.0;
    for (int k = 0; k < 200; ++k) {
        Point2 O{V(rng), V(rng)};
        double alpha = A(rng);
        double t = ray_oval_first_hit(O, alpha, blob);
        off = std::max(off, std::fabs(dot(blob.point(t) - O,
                                          OrientedLine::normal(alpha))));
    }
    s.below("geom.ray_hit_on_ray", off, 1e-10);

    double turn = 0.0, prev = blob.tangent(0.0).angle(), min_curv = 1e9;
    int grid = 4096;
    for (int i = 1; i <= grid; ++i) {
        double t = kTwoPi * i / grid;
        double cur = blob.tangent(t).angle();
        turn += angle_diff(cur, prev);
        prev = cur;
        min_curv = std::min(min_curv, blob.curvature(t));
    }
    s.below("geom.support_oval_turning", std::fabs(turn - kTwoPi), 1e-9);
    s.above("geom.support_oval_curvature_positive", min_curv, 0.0);
}

void linespace_checks(Suite& s) {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> U(-0.3, 0.3);
    int odd_counts = 0;
    for (int trial = 0; trial < 20; ++trial) {
        double a2 = U(rng), b2 = U(rng), a3 = U(rng);
        int m = 2048;
        std::vector<double> sv(m), av(m), pv(m);
        for (int i = 0; i < m; ++i) {
            sv[i] = kTwoPi * i / m;
            av[i] = sv[i];
            pv[i] = 1.0 + a2 * std::cos(2 * sv[i]) + b2 * std::sin(2 * sv[i]) +
                    a3 * std::cos(3 * sv[i]);
        }
        try {
            DualCurve c(sv, av, pv);
            if (inflections(c).zeros.size() % 2 != 0) ++odd_counts;
        } catch (const DegenerateCurve&) {
        }
    }
    s.below("linespace.inflection_parity_violations",
            static_cast<double>(odd_counts), 0.5);

    // Crofton lengths of circles against 2 pi r.
    double worst_rel = 0.0;
    for (double r : {0.5, 1.0, 2.0}) {
        CircleOval c(r);
        double len = crofton_length(c, nullptr, 1024, 1024);
        worst_rel = std::max(worst_rel, std::fabs(len - kTwoPi * r) / (kTwoPi * r));
    }
    s.below("linespace.crofton_circles", worst_rel, 0.005, true);
}

void metric_checks(Suite& s) {
    auto disc2 = parse_oval("circle:2");
    std::vector<std::shared_ptr<const FinslerMetric>> zoo = {
        std::make_shared<EuclideanMetric>(),
        std::make_shared<MinkowskiMetric>(MinkowskiMetric::from_fourier({1.0, 0.2})),
        std::make_shared<FunkMetric>(disc2),
        std::make_shared<HilbertMetric>(disc2),
        std::make_shared<MagneticMetric>(5.0),
    };
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> U(-0.8, 0.8);
    std::uniform_real_distribution<double> V(-1.0, 1.0);
    double homo = 0.0;
    for (const auto& m : zoo) {
        for (int k = 0; k < 100; ++k) {
            Point2 x{U(rng), U(rng)};
            Vec2 v{V(rng), V(rng)};
            if (v.norm() < 1e-3) continue;
            double F = m->norm(x, v);
            for (double lam : {0.5, 2.0, 10.0})
                homo = std::max(homo,
                                std::fabs(m->norm(x, lam * v) - lam * F) / (lam * F));
        }
    }
    s.below("metrics.homogeneity", homo, 1e-12);

    FunkMetric funk(disc2);
    double funk_id = 0.0;
    for (int k = 0; k < 100; ++k) {
        Point2 x{U(rng), U(rng)};
        double phi = kTwoPi * k / 100;
        funk_id = std::max(funk_id,
                           std::fabs(disc2->implicit(x + funk.indicatrix_point(x, phi))));
    }
    s.below("metrics.funk_indicatrix_on_domain_boundary", funk_id, 1e-10);

    HilbertMetric hilbert(disc2);
    std::uniform_real_distribution<double> W(-0.7, 0.7);
    std::uniform_real_distribution<double> J(-0.2, 0.2);
    double tri = -1e9;
    for (int k = 0; k < 30; ++k) {
        Point2 x{W(rng), W(rng)}, z{W(rng), W(rng)};
        Point2 y = 0.5 * (x + z) + Vec2{J(rng), J(rng)};
        double direct = segment_length(hilbert, x, z);
        double via = segment_length(hilbert, x, y) + segment_length(hilbert, y, z);
        tri = std::max(tri, direct - via);
    }
    s.below("metrics.triangle_inequality_defect", tri, 1e-9);

    BusemannMetric flat(busemann_density("flat"), "flat", 1024);
    double bus = 0.0;
    for (int k = 0; k < 50; ++k) {
        Point2 x{U(rng), U(rng)};
        Vec2 v{V(rng), V(rng)};
        bus = std::max(bus, std::fabs(flat.norm(x, v) - v.norm()));
    }
    s.below("metrics.busemann_flat_is_euclidean", bus, 1e-6, true);

    double sym = 0.0, asym = 0.0;
    for (int k = 0; k < 50; ++k) {
        Point2 a{U(rng) * 0.7, U(rng) * 0.7}, b{U(rng) * 0.7, U(rng) * 0.7};
        if ((a - b).norm() < 0.05) continue;
        sym = std::max(sym, std::fabs(hilbert_distance(*disc2, a, b) -
                                      hilbert_distance(*disc2, b, a)));
        asym = std::max(asym, std::fabs(funk_distance(*disc2, a, b) -
                                        funk_distance(*disc2, b, a)));
    }
    s.below("metrics.hilbert_symmetry", sym, 1e-12);
    s.above("metrics.funk_asymmetry_witnessed", asym, 0.01);

    double kepler = std::max(
        verify_kepler_indicatrix(MagneticMetric(5.0), {1.0, 0.0}, 512),
        verify_kepler_indicatrix(MagneticMetric(2.0), {-0.7, 1.3}, 512));
    s.below("metrics.kepler_indicatrix_residual", kepler, 1e-10);
}

void billiard_checks(Suite& s) {
    BilliardTable euclid(parse_oval("circle:1"), parse_metric("euclid"));
    std::mt19937_64 rng(109);
    std::uniform_real_distribution<double> Tp(0.0, kTwoPi);
    std::uniform_real_distribution<double> An(0.05, std::numbers::pi - 0.05);

    double spec = 0.0;
    for (int k = 0; k < 1000; ++k) {
        double t = Tp(rng);
        Vec2 u = incoming_at(euclid, t, An(rng));
        Vec2 v = reflect_geometric(euclid, t, u);
        Vec2 N = euclid.boundary().outward_normal(t);
        Vec2 mirror = u - 2.0 * dot(u, N) * N;
        spec = std::max(spec, std::fabs(angle_diff(v.angle(), mirror.angle())));
    }
    s.below("billiard.euclid_specular_law", spec, 1e-12);

    BilliardTable magnetic(parse_oval("circle:1"), parse_metric("magnetic:5"));
    double mag = 0.0;
    for (int k = 0; k < 200; ++k) {
        double t = Tp(rng);
        Vec2 u = incoming_at(magnetic, t, An(rng));
        Vec2 v = reflect_geometric(magnetic, t, u);
        Vec2 N = magnetic.boundary().outward_normal(t);
        Vec2 u_hat = u.normalized();
        Vec2 mirror = u_hat - 2.0 * dot(u_hat, N) * N;
        mag = std::max(mag, std::fabs(angle_diff(v.angle(), mirror.angle())));
    }
    s.below("billiard.magnetic_metric_specular", mag, 1e-9);

    std::vector<std::pair<std::string, std::string>> scenes = {
        {"circle:1", "euclid"},
        {"ellipse:1.2,0.8", "funk:circle:2"},
        {"ellipse:1.2,0.8", "hilbert:circle:2"},
        {"circle:1", "minkowski:rho=1,0.2"},
        {"circle:1", "magnetic:5"},
    };
    double residual = 0.0, agree = 0.0, inward = 1e9;
    std::uniform_real_distribution<double> Am(0.25, std::numbers::pi - 0.25);
    for (const auto& [oval_spec, metric_spec] : scenes) {
        BilliardTable table(parse_oval(oval_spec), parse_metric(metric_spec));
        for (int k = 0; k < 20; ++k) {
            double t = Tp(rng);
            Point2 x = table.boundary().point(t);
            Vec2 u = incoming_at(table, t, Am(rng));
            Vec2 v = reflect_geometric(table, t, u);
            residual = std::max(residual,
                                reflection_residual(table.metric(), x,
                                                    table.boundary().tangent(t), u, v));
            inward = std::min(inward, dot(v.normalized(),
                                          -table.boundary().outward_normal(t)));
            Point2 a = x - 0.4 * u.normalized();
            Point2 b = x + 0.4 * v.normalized();
            double t_star = reflect_variational(table, a, b, t + 0.002);
            Vec2 implied = b - table.boundary().point(t_star);
            agree = std::max(agree, std::fabs(angle_diff(implied.angle(), v.angle())));
        }
    }
    s.below("billiard.concurrency_residual", residual, 1e-9);
    s.below("billiard.geometric_vs_variational", agree, 1e-7);
    s.above("billiard.reflection_points_inward", inward, 0.0);

    std::uniform_real_distribution<double> Small(-0.15, 0.15);
    std::uniform_real_distribution<double> Scale(0.5, 2.0);
    double ak = 0.0;
    for (int k = 0; k < 12; ++k) {
        MinkowskiMetric K = MinkowskiMetric::from_fourier(
            {1.0, Small(rng), Small(rng), 0.5 * Small(rng)});
        double mirror = Tp(rng);
        double incoming =
            mirror + std::numbers::pi + (0.3 + 0.4 * (k % 3)) * ((k % 2) ? 1 : -1);
        ak = std::max(ak, ak_invariance_test(K, {Small(rng), Small(rng)},
                                             Scale(rng), mirror, incoming));
    }
    s.below("billiard.projective_reflection_invariance", ak, 1e-9);

    double jac = 0.0;
    for (int k = 0; k < 20; ++k) {
        double t = Tp(rng);
        RayState st{t, reflect_geometric(euclid, t, incoming_at(euclid, t, Am(rng)))};
        jac = std::max(jac, std::fabs(jacobian_experiment(euclid, st) - 1.0));
    }
    s.below("billiard.euclid_jacobian_unit", jac, 1e-6, true);

    // The Minkowski/Funk determinants are measurements, not assertions.
    BilliardTable mink(parse_oval("circle:1"), parse_metric("minkowski:rho=1,0.2"));
    BilliardTable funk(parse_oval("ellipse:1.2,0.8"), parse_metric("funk:circle:2"));
    double det_mink_lo = 1e9, det_mink_hi = -1e9, det_funk_lo = 1e9,
           det_funk_hi = -1e9;
    for (int k = 0; k < 100; ++k) {
        double t = Tp(rng);
        double inc = Am(rng);
        RayState sm{t, reflect_geometric(mink, t, incoming_at(mink, t, inc))};
        double dm = jacobian_experiment(mink, sm);
        det_mink_lo = std::min(det_mink_lo, dm);
        det_mink_hi = std::max(det_mink_hi, dm);
        RayState sf{t, reflect_geometric(funk, t, incoming_at(funk, t, inc))};
        double df = jacobian_experiment(funk, sf);
        det_funk_lo = std::min(det_funk_lo, df);
        det_funk_hi = std::max(det_funk_hi, df);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "minkowski det in [%.6f, %.6f]; funk det in [%.6f, %.6f]",
                  det_mink_lo, det_mink_hi, det_funk_lo, det_funk_hi);
    s.above("billiard.jacobian_reported_finite",
            std::isfinite(det_mink_lo + det_funk_lo) ? 1.0 : 0.0, 0.5, buf);
}

void caustic_checks(Suite& s) {
    BilliardTable table(parse_oval("circle:1"), parse_metric("euclid"));
    CausticOptions opts;
    opts.run_segre = false;
    opts.workers = s.workers;
    CausticReport a = four_cusp_verify(table, {0.3, 0.0}, 1, 512, opts);
    CausticReport b = four_cusp_verify(table, {0.3, 0.0}, 1, 1024, opts);
    double shift = 0.0;
    if (a.cusp_count == b.cusp_count) {
        for (const auto& ca : a.cusps) {
            double best = 1e9;
            for (const auto& cb : b.cusps)
                best = std::min(best, cyclic_dist(ca.s, cb.s, kTwoPi));
            shift = std::max(shift, best);
        }
    } else {
        shift = 1e9;
    }
    s.below("caustics.sampling_stability", shift, 1e-3, true);

    // Rotating the whole scene rotates the caustic and keeps the count.
    double phi = 0.7;
    Point2 src{0.3 * std::cos(phi), 0.3 * std::sin(phi)};
    CausticReport rot = four_cusp_verify(table, src, 1, 512, opts);
    s.below("caustics.rotation_equivariance_count",
            std::fabs(rot.cusp_count - a.cusp_count), 0.5);
    std::vector<Point2> rotated;
    for (const auto& p : a.envelope) rotated.push_back(rotate(p, phi));
    s.below("caustics.rotation_equivariance_envelope",
            hausdorff_distance(rotated, rot.envelope), 1e-4, true);

    // At each cusp the envelope speed dips below 1e-3 of its median.
    std::vector<double> speeds;
    for (std::size_t i = 0; i < a.envelope.size(); ++i)
        speeds.push_back(
            (a.envelope[(i + 1) % a.envelope.size()] - a.envelope[i]).norm());
    std::vector<double> sorted = speeds;
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[sorted.size() / 2];
    double worst_dip = 0.0;
    for (const auto& cusp : a.cusps) {
        double best = 1e9;
        for (std::size_t i = 0; i < a.envelope.size(); ++i) {
            double ds = cyclic_dist(a.dual.s()[i], cusp.s, kTwoPi);
            if (ds < 3.0 * kTwoPi / a.dual.size())
                best = std::min(best, speeds[i]);
        }
        worst_dip = std::max(worst_dip, best / median);
    }
    s.below("caustics.cusp_envelope_speed_dip", worst_dip, 1e-3, true);

    // Interior Segre witnesses certify as shots on a 2-bounce scene.
    CausticOptions seg_opts;
    seg_opts.workers = s.workers;
    seg_opts.probe_grid = 8;
    CausticReport c2 = four_cusp_verify(table, {0.3, 0.0}, 2, 512, seg_opts);
    s.above("caustics.segre_with_shot_witnesses", c2.segre_ok ? 1.0 : 0.0, 0.5);
}

void magnetic_checks(Suite& s) {
    MagneticBilliard mb(parse_oval("circle:1"), 2.0);
    std::mt19937_64 rng(113);
    std::uniform_real_distribution<double> An(0.0, kTwoPi);

    double spec = 0.0, worst_inside = -1e9;
    for (int k = 0; k < 50; ++k) {
        MagneticTrajectory traj = magnetic_propagate(mb, {0.3, 0.0}, An(rng), 2);
        for (const auto& arc : traj.arcs) {
            Vec2 N = mb.table().outward_normal(arc.t_hit);
            double in_angle = std::fabs(dot(arc.dir_at_hit, N));
            Vec2 out = arc.dir_at_hit - 2.0 * dot(arc.dir_at_hit, N) * N;
            spec = std::max(spec, std::fabs(std::fabs(dot(out, N)) - in_angle));
            // Sample the open arc: strictly inside the table.
            Vec2 w0 = (arc.start - arc.center) / mb.larmor_radius();
            for (int i = 1; i < 64; ++i) {
                double theta = arc.arc_angle * i / 64.0;
                Point2 p = arc.center + mb.larmor_radius() * rotate(w0, theta);
                worst_inside = std::max(worst_inside, mb.table().implicit(p));
            }
        }
    }
    s.below("magnetic.specular_reflection", spec, 1e-12);
    s.below("magnetic.arcs_stay_inside", worst_inside, 0.0);

    MagneticReport report = magnetic_caustic_report(mb, {0.3, 0.0}, 1, 512,
                                                    s.workers);
    // Offset-curve speed dips at the reported inner cusps.
    std::vector<double> speeds;
    std::size_t m = report.envelope.inner.size();
    for (std::size_t i = 0; i < m; ++i)
        speeds.push_back((report.envelope.inner[(i + 1) % m] -
                          report.envelope.inner[i]).norm());
    std::vector<double> sorted = speeds;
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[sorted.size() / 2];
    double dip = 0.0;
    for (double cusp_s : report.cusps.inner_params) {
        double best = 1e9;
        for (std::size_t i = 0; i < m; ++i) {
            double ds = cyclic_dist(report.centers.s()[i], cusp_s, kTwoPi);
            if (ds < 3.0 * kTwoPi / m) best = std::min(best, speeds[i]);
        }
        dip = std::max(dip, best / median);
    }
    s.below("magnetic.cusp_offset_speed_dip", dip, 1e-3, true);

    // Zero-field limit: at R = 1e4 the near-table component reproduces the
    // Euclidean caustic.
    MagneticBilliard weak(parse_oval("circle:1"), 1e4);
    MagneticReport far = magnetic_caustic_report(weak, {0.3, 0.0}, 1, 512,
                                                 s.workers);
    BilliardTable euclid(parse_oval("circle:1"), parse_metric("euclid"));
    CausticOptions opts;
    opts.run_segre = false;
    opts.workers = s.workers;
    CausticReport flat = four_cusp_verify(euclid, {0.3, 0.0}, 1, 512, opts);
    const std::vector<Point2>& near_component =
        (bbox_diameter(far.envelope.inner) < 10.0) ? far.envelope.inner
                                                   : far.envelope.outer;
    s.below("magnetic.zero_field_limit_hausdorff",
            hausdorff_distance(near_component, flat.envelope), 1e-3, true);
}

}  // namespace

std::vector<CheckResult> run_verification_suite(double tolerance_scale,
                                                unsigned workers) {
    Suite suite{{}, tolerance_scale, workers};
    geom_checks(suite);
    linespace_checks(suite);
    metric_checks(suite);
    billiard_checks(suite);
    caustic_checks(suite);
    magnetic_checks(suite);
    return suite.results;
}

void write_verify_json(const std::string& path,
                       const std::vector<CheckResult>& results,
                       double tolerance_scale) {
    nlohmann::ordered_json j;
    j["tolerance_scale"] = tolerance_scale;
    int failures = 0;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        if (!r.pass) ++failures;
        nlohmann::ordered_json c;
        c["name"] = r.name;
        c["pass"] = r.pass;
        c["measured"] = r.measured;
        c["threshold"] = r.threshold;
        c["kind"] = r.kind;
        c["discretization_bound"] = r.discretization_bound;
        if (!r.detail.empty()) c["detail"] = r.detail;
        j["checks"].push_back(c);
    }
    j["failures"] = failures;
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw ConfigError("cannot open '" + path + "' for writing");
    std::string text = j.dump(2);
    std::fwrite(text.data(), 1, text.size(), fp);
    std::fputc('\n', fp);
    std::fclose(fp);
}

}  // namespace finsler
