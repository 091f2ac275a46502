#include <cmath>
#include <random>

#include "doctest.h"
#include "finsler/numerics.hpp"

using namespace finsler;

TEST_CASE("refine_root finds bracketed zeros") {
    auto f = [](double x) { return std::cos(x); };
    double r = refine_root(f, 1.0, 2.0, f(1.0), f(2.0), 1e-14);
    CHECK(std::fabs(r - std::numbers::pi / 2) < 1e-12);
}

TEST_CASE("scan_roots finds all zeros of sin on [0, 2pi)") {
    auto f = [](double x) { return std::sin(x); };
    auto roots = scan_roots(f, 0.0, kTwoPi, 128, 1e-13);
    REQUIRE(roots.size() == 2);  // 0 and pi; 2pi belongs to the next period
    CHECK(std::fabs(roots[0]) < 1e-12);
    CHECK(std::fabs(roots[1] - std::numbers::pi) < 1e-12);
}

TEST_CASE("adaptive quadrature reaches tight relative tolerance") {
    auto f = [](double x) { return std::exp(-x) * std::sin(5.0 * x); };
    // Analytic: integral of e^{-x} sin(5x) over [0, 2].
    auto F = [](double x) {
        return -std::exp(-x) * (std::sin(5.0 * x) + 5.0 * std::cos(5.0 * x)) / 26.0;
    };
    double exact = F(2.0) - F(0.0);
    CHECK(std::fabs(integrate(f, 0.0, 2.0, 1e-12) - exact) < 1e-12);
}

TEST_CASE("gauss_legendre integrates polynomials exactly") {
    auto f = [](double x) { return 5.0 * x * x * x * x; };
    CHECK(std::fabs(gauss_integrate(f, -1.0, 1.0, 3) - 2.0) < 1e-13);
    CHECK(std::fabs(gauss_integrate(f, 0.0, 2.0, 16) - 32.0) < 1e-12);
}

TEST_CASE("cyclic tridiagonal solver") {
    // Circulant system: 4 on the diagonal, 1 on both neighbours (cyclic).
    int n = 8;
    std::vector<double> sub(n, 1.0), diag(n, 4.0), sup(n, 1.0), rhs(n);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> x_true(n);
    for (int i = 0; i < n; ++i) x_true[i] = U(rng);
    for (int i = 0; i < n; ++i)
        rhs[i] = x_true[(i + n - 1) % n] + 4.0 * x_true[i] + x_true[(i + 1) % n];
    auto x = solve_cyclic_tridiagonal(sub, diag, sup, rhs);
    for (int i = 0; i < n; ++i) CHECK(std::fabs(x[i] - x_true[i]) < 1e-12);
}

TEST_CASE("periodic spline reproduces smooth periodic data") {
    int m = 256;
    std::vector<double> s(m), y(m);
    for (int i = 0; i < m; ++i) {
        s[i] = kTwoPi * i / m;
        y[i] = std::sin(s[i]) + 0.3 * std::cos(2.0 * s[i]);
    }
    PeriodicSpline sp(s, y, kTwoPi);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, kTwoPi);
    for (int k = 0; k < 200; ++k) {
        double t = U(rng);
        double exact = std::sin(t) + 0.3 * std::cos(2.0 * t);
        double d1 = std::cos(t) - 0.6 * std::sin(2.0 * t);
        double d2 = -std::sin(t) - 1.2 * std::cos(2.0 * t);
        CHECK(std::fabs(sp.eval(t) - exact) < 1e-8);
        CHECK(std::fabs(sp.deriv(t) - d1) < 1e-5);
        CHECK(std::fabs(sp.deriv2(t) - d2) < 5e-3);
    }
    // Periodicity across the wrap interval.
    CHECK(std::fabs(sp.eval(-0.1) - sp.eval(kTwoPi - 0.1)) < 1e-14);
}

TEST_CASE("unwrapped spline carries a linear trend") {
    int m = 128;
    std::vector<double> s(m), y(m);
    for (int i = 0; i < m; ++i) {
        s[i] = kTwoPi * i / m;
        y[i] = s[i] + 0.2 * std::sin(s[i]);  // gains 2pi per period
    }
    UnwrappedSpline sp(s, y, kTwoPi, kTwoPi);
    CHECK(std::fabs(sp.eval(1.0) - (1.0 + 0.2 * std::sin(1.0))) < 1e-8);
    CHECK(std::fabs(sp.deriv(1.0) - (1.0 + 0.2 * std::cos(1.0))) < 1e-5);
    CHECK(std::fabs(sp.eval(1.0 + kTwoPi) - (sp.eval(1.0) + kTwoPi)) < 1e-10);
}

TEST_CASE("polyline helpers") {
    std::vector<Point2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(polyline_length(square, true) == doctest::Approx(4.0));
    CHECK(polygon_area(square) == doctest::Approx(1.0));
    CHECK(bbox_diameter(square) == doctest::Approx(std::sqrt(2.0)));
    CHECK(point_segment_distance({0.5, 2.0}, {0, 1}, {1, 1}) == doctest::Approx(1.0));

    std::vector<Point2> shifted;
    for (auto p : square) shifted.push_back(p + Vec2{0.0, 0.25});
    CHECK(hausdorff_distance(square, shifted) == doctest::Approx(0.25));
}

TEST_CASE("parallel_for is order-independent on disjoint slots") {
    std::vector<double> a(1000), b(1000);
    auto body = [](std::vector<double>& out) {
        return [&out](std::size_t i) { out[i] = std::sin(0.01 * i); };
    };
    parallel_for(a.size(), 1, body(a));
    parallel_for(b.size(), 7, body(b));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
