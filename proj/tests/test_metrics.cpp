#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "finsler/errors.hpp"
#include "finsler/linespace.hpp"
#include "finsler/metrics.hpp"

using namespace finsler;

namespace {

std::shared_ptr<const Oval> unit_disc() { return parse_oval("circle:1"); }

}  // namespace

TEST_CASE("Euclidean segment length") {
    EuclideanMetric euclid;
    CHECK(segment_length(euclid, {0, 0}, {3, 4}) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("Funk and Hilbert distances in the unit disc") {
    auto disc = unit_disc();
    FunkMetric funk(disc);
    HilbertMetric hilbert(disc);

    SUBCASE("closed forms on a diameter") {
        // d_F((0,0),(s,0)) = -ln(1-s); d_H = artanh(s).
        CHECK(funk_distance(*disc, {0, 0}, {0.5, 0}) ==
              doctest::Approx(std::log(2.0)).epsilon(1e-12));
        CHECK(funk_distance(*disc, {0.5, 0}, {0, 0}) ==
              doctest::Approx(std::log(1.5)).epsilon(1e-12));
        CHECK(hilbert_distance(*disc, {0, 0}, {0.6, 0}) ==
              doctest::Approx(std::log(2.0)).epsilon(1e-12));
        CHECK(hilbert_distance(*disc, {0, 0}, {0.6, 0}) ==
              doctest::Approx(std::atanh(0.6)).epsilon(1e-12));
    }

    SUBCASE("quadrature lengths match the closed forms") {
        CHECK(segment_length(funk, {0, 0}, {0.5, 0}) ==
              doctest::Approx(std::log(2.0)).epsilon(1e-10));
        CHECK(segment_length(hilbert, {0, 0}, {0.6, 0}) ==
              doctest::Approx(std::log(2.0)).epsilon(1e-10));

        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> U(-0.6, 0.6);
        int done = 0;
        while (done < 20) {
            Point2 x{U(rng), U(rng)}, y{U(rng), U(rng)};
            if ((x - y).norm() < 0.05) continue;
            ++done;
            CHECK(segment_length(funk, x, y) ==
                  doctest::Approx(funk_distance(*disc, x, y)).epsilon(1e-9));
            CHECK(segment_length(hilbert, x, y) ==
                  doctest::Approx(hilbert_distance(*disc, x, y)).epsilon(1e-9));
        }
    }

    SUBCASE("Funk asymmetry and the Hilbert symmetrization identity") {
        Point2 x{0.5, 0}, y{0, 0};
        CHECK(funk_distance(*disc, x, y) != doctest::Approx(funk_distance(*disc, y, x)));
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> U(-0.55, 0.55);
        for (int k = 0; k < 50; ++k) {
            Point2 a{U(rng), U(rng)}, b{U(rng), U(rng)};
            if ((a - b).norm() < 0.05) continue;
            double sum = funk_distance(*disc, a, b) + funk_distance(*disc, b, a);
            CHECK(sum == doctest::Approx(2.0 * hilbert_distance(*disc, a, b)).epsilon(1e-11));
            CHECK(hilbert_distance(*disc, a, b) ==
                  doctest::Approx(hilbert_distance(*disc, b, a)).epsilon(1e-12));
        }
    }

    SUBCASE("norm is the infinitesimal distance") {
        Point2 x{0.2, -0.1};
        Vec2 v{0.7, 0.4};
        double eps = 1e-5;
        double fd = funk_distance(*disc, x, x + eps * v) / eps;
        CHECK(fd == doctest::Approx(funk.norm(x, v)).epsilon(1e-4));
    }

    SUBCASE("coincident points are rejected") {
        CHECK_THROWS_AS(funk_distance(*disc, {0.1, 0.1}, {0.1, 0.1}), CoincidentPoints);
    }

    SUBCASE("segments leaving the domain are rejected") {
        CHECK_THROWS_AS(segment_length(funk, {0, 0}, {1.5, 0}), DomainEscape);
    }
}

TEST_CASE("homogeneity of every metric in the zoo") {
    auto disc2 = parse_oval("circle:2");
    std::vector<std::shared_ptr<const FinslerMetric>> metrics = {
        std::make_shared<EuclideanMetric>(),
        std::make_shared<MinkowskiMetric>(
            MinkowskiMetric::from_fourier({1.0, 0.2})),
        std::make_shared<FunkMetric>(disc2),
        std::make_shared<HilbertMetric>(disc2),
        std::make_shared<MagneticMetric>(5.0),
        std::make_shared<BusemannMetric>(busemann_density("pquad"), "pquad"),
    };
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(-0.8, 0.8);
    std::uniform_real_distribution<double> V(-1.0, 1.0);
    for (const auto& m : metrics) {
        for (int k = 0; k < 100; ++k) {
            Point2 x{U(rng), U(rng)};
            Vec2 v{V(rng), V(rng)};
            if (v.norm() < 1e-3) continue;
            double F = m->norm(x, v);
            for (double lam : {0.5, 2.0, 10.0}) {
                INFO(m->spec());
                CHECK(std::fabs(m->norm(x, lam * v) - lam * F) <= 1e-12 * lam * F);
            }
        }
    }
}

TEST_CASE("Funk indicatrix is the translated domain boundary") {
    auto disc2 = parse_oval("circle:2");
    FunkMetric funk(disc2);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        Point2 x{U(rng), U(rng)};
        double phi = kTwoPi * k / 100.0;
        Point2 q = x + funk.indicatrix_point(x, phi);
        CHECK(std::fabs(disc2->implicit(q)) < 1e-10);
    }
}

TEST_CASE("triangle inequality for projective metrics") {
    auto disc2 = parse_oval("circle:2");
    std::vector<std::shared_ptr<const FinslerMetric>> metrics = {
        std::make_shared<MinkowskiMetric>(
            MinkowskiMetric::from_fourier({1.0, 0.2})),
        std::make_shared<FunkMetric>(disc2),
        std::make_shared<HilbertMetric>(disc2),
    };
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> U(-0.7, 0.7);
    std::uniform_real_distribution<double> J(-0.2, 0.2);
    for (const auto& m : metrics) {
        for (int k = 0; k < 30; ++k) {
            Point2 x{U(rng), U(rng)}, z{U(rng), U(rng)};
            // Perturbed midpoint keeps triples near-collinear, the tight case.
            Point2 y = 0.5 * (x + z) + Vec2{J(rng), J(rng)};
            double direct = segment_length(*m, x, z);
            double via = segment_length(*m, x, y) + segment_length(*m, y, z);
            INFO(m->spec());
            CHECK(direct <= via + 1e-9);
        }
    }
}

TEST_CASE("Busemann metric with the flat density is Euclidean") {
    BusemannMetric flat(busemann_density("flat"), "flat", 1024);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int k = 0; k < 50; ++k) {
        Point2 x{U(rng), U(rng)};
        Vec2 v{U(rng), U(rng)};
        CHECK(std::fabs(flat.norm(x, v) - v.norm()) < 1e-6 * std::max(1.0, v.norm()));
    }
}

TEST_CASE("Busemann pointwise formula agrees with the curve-level measure") {
    // The norm formula must reproduce the Crofton length of short segments.
    auto f = busemann_density("pquad");
    BusemannMetric metric(f, "pquad");
    LineDensity density = f;
    std::pair<Point2, Point2> segments[] = {
        {{0.0, 0.0}, {1.0, 0.0}},
        {{0.2, -0.3}, {-0.4, 0.5}},
        {{0.5, 0.5}, {0.7, 0.1}},
    };
    for (auto [a, b] : segments) {
        double by_metric = segment_length(metric, a, b);
        double by_measure = crofton_segment_length(a, b, density, 4096, 4096);
        CHECK(std::fabs(by_metric - by_measure) < 1e-4 * by_metric);
    }
}

TEST_CASE("Kepler ellipse parameters") {
    auto k0 = kepler_params(0.0);
    CHECK(k0.a == doctest::Approx(1.0));
    CHECK(k0.b == doctest::Approx(1.0));
    CHECK(k0.c == doctest::Approx(0.0));

    auto k5 = kepler_params(0.5);
    CHECK(k5.a == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(k5.b == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(k5.c == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    for (double t : {0.0, 0.3, 0.9, -0.7, 0.99}) {
        auto k = kepler_params(t);
        CHECK(std::fabs(k.a * k.a - k.b * k.b - k.c * k.c) < 1e-14 * k.a * k.a);
    }
    CHECK_THROWS_AS(kepler_params(1.0), FieldTooStrong);
}

TEST_CASE("magnetic indicatrices are focus-centered ellipses") {
    MagneticMetric weak(5.0);
    CHECK(verify_kepler_indicatrix(weak, {1.0, 0.0}, 512) < 1e-10);
    CHECK(verify_kepler_indicatrix(weak, {0.0, 0.0}, 256) < 1e-14);
    CHECK(verify_kepler_indicatrix(weak, {-0.7, 1.3}, 512) < 1e-10);

    // At the origin the one-form vanishes and the indicatrix is a unit circle.
    for (int i = 0; i < 16; ++i) {
        double phi = kTwoPi * i / 16;
        CHECK((weak.indicatrix_point({0, 0}, phi) - unit_dir(phi)).norm() < 1e-14);
    }
}

TEST_CASE("Legendre duals") {
    SUBCASE("Euclidean") {
        EuclideanMetric euclid;
        Vec2 w = legendre_dual(euclid, {0, 0}, {1, 0});
        CHECK((w - Vec2{1, 0}).norm() < 1e-12);
    }

    SUBCASE("ellipse indicatrix") {
        QuadraticMetric quad(2.0, 1.0);
        Vec2 w = legendre_dual(quad, {0, 0}, {2, 0});
        CHECK((w - Vec2{0.5, 0}).norm() < 1e-12);
    }

    SUBCASE("duality residuals for the zoo") {
        auto disc2 = parse_oval("circle:2");
        std::vector<std::shared_ptr<const FinslerMetric>> metrics = {
            std::make_shared<EuclideanMetric>(),
            std::make_shared<MinkowskiMetric>(
                MinkowskiMetric::from_fourier({1.0, 0.2})),
            std::make_shared<FunkMetric>(disc2),
            std::make_shared<MagneticMetric>(5.0),
        };
        std::mt19937_64 rng(43);
        std::uniform_real_distribution<double> U(-0.8, 0.8);
        for (const auto& m : metrics) {
            for (int k = 0; k < 40; ++k) {
                Point2 x{U(rng), U(rng)};
                double phi = kTwoPi * k / 40.0;
                Vec2 v = m->indicatrix_point(x, phi);
                Vec2 w = legendre_dual(*m, x, v);
                // w(v) = 1 and w annihilates an independent finite-difference
                // tangent of the indicatrix.
                CHECK(std::fabs(dot(w, v) - 1.0) < 1e-10);
                double h = 1e-5;
                Vec2 fd_tan = (m->indicatrix_point(x, phi + h) -
                               m->indicatrix_point(x, phi - h)).normalized();
                INFO(m->spec());
                CHECK(std::fabs(dot(w, fd_tan)) < 1e-6 * w.norm());
            }
        }
    }

    SUBCASE("Funk dual annihilates the domain-boundary tangent") {
        auto disc = unit_disc();
        FunkMetric funk(disc);
        Point2 x{0.3, 0.2};
        // Direction toward the nearest boundary point.
        double phi = x.angle();
        Vec2 v = funk.indicatrix_point(x, phi);
        Vec2 w = legendre_dual(funk, x, v);
        double t = disc->ray_first_hit(x, phi);
        CHECK(std::fabs(dot(w, disc->tangent(t))) < 1e-10);
        CHECK(std::fabs(dot(w, v) - 1.0) < 1e-12);
    }
}

TEST_CASE("metric grammar") {
    CHECK(parse_metric("euclid")->reversible());
    auto mink = parse_metric("minkowski:rho=1,0.2");
    CHECK(!mink->reversible());
    CHECK(parse_metric("funk:circle:2")->domain() != nullptr);
    CHECK(parse_metric("hilbert:ellipse:2,1.5")->reversible());
    CHECK(parse_metric("magnetic:4")->spec() == "magnetic:4");
    CHECK(parse_metric("busemann:aniso")->reversible());

    CHECK_THROWS_AS(parse_metric("fancy"), ConfigError);
    CHECK_THROWS_AS(parse_metric("minkowski:1,0.2"), ConfigError);
    CHECK_THROWS_AS(parse_metric("busemann:unknown"), ConfigError);
    CHECK_THROWS_AS(parse_metric("magnetic:0"), ConfigError);
}

TEST_CASE("non-convex Minkowski profiles are rejected") {
    CHECK_THROWS_AS(MinkowskiMetric::from_fourier({1.0, 0.0, 0.0, 0.5}), NotConvex);
}
