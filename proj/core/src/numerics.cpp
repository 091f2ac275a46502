#include "finsler/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace finsler {

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

double refine_root(const std::function<double(double)>& f, double a, double b,
                   double fa, double fb, double xtol) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw std::invalid_argument("refine_root: not a bracket");

    while (b - a > xtol) {
        double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;  // interval at machine resolution
        double fm = f(m);
        if (fm == 0.0) return m;
        if (fa * fm < 0.0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }

    // Secant polish inside the final bracket.
    double x0 = a, x1 = b, f0 = fa, f1 = fb;
    for (int it = 0; it < 4; ++it) {
        double denom = f1 - f0;
        if (denom == 0.0) break;
        double x2 = x1 - f1 * (x1 - x0) / denom;
        if (!(x2 >= a && x2 <= b)) break;
        double f2 = f(x2);
        x0 = x1; f0 = f1;
        x1 = x2; f1 = f2;
        if (f2 == 0.0) break;
    }
    return (std::fabs(f1) <= std::fabs(f0)) ? x1 : x0;
}

std::vector<double> scan_roots(const std::function<double(double)>& f, double a,
                               double b, int n, double xtol) {
    std::vector<double> roots;
    double h = (b - a) / n;
    double x0 = a;
    double f0 = f(x0);
    for (int i = 1; i <= n; ++i) {
        double x1 = a + i * h;
        double f1 = f(x1);
        if (f0 == 0.0) {
            roots.push_back(x0);
        } else if (f0 * f1 < 0.0) {
            roots.push_back(refine_root(f, x0, x1, f0, f1, xtol));
        }
        x0 = x1;
        f0 = f1;
    }
    return roots;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Lobatto (Gander & Gautschi's adaptlob)
// ---------------------------------------------------------------------------

namespace {

const double kLobAlpha = std::sqrt(2.0 / 3.0);
const double kLobBeta = 1.0 / std::sqrt(5.0);

double lobatto_step(const std::function<double(double)>& f, double a, double b,
                    double fa, double fb, double scale, int depth) {
    double h = 0.5 * (b - a);
    double m = 0.5 * (a + b);
    double mll = m - kLobAlpha * h, ml = m - kLobBeta * h;
    double mr = m + kLobBeta * h, mrr = m + kLobAlpha * h;
    double fmll = f(mll), fml = f(ml), fm = f(m), fmr = f(mr), fmrr = f(mrr);
    double i2 = (h / 6.0) * (fa + fb + 5.0 * (fml + fmr));
    double i1 = (h / 1470.0) *
                (77.0 * (fa + fb) + 432.0 * (fmll + fmrr) + 625.0 * (fml + fmr) +
                 672.0 * fm);
    if (scale + (i1 - i2) == scale || mll <= a || b <= mrr || depth > 48)
        return i1;
    return lobatto_step(f, a, mll, fa, fmll, scale, depth + 1) +
           lobatto_step(f, mll, ml, fmll, fml, scale, depth + 1) +
           lobatto_step(f, ml, m, fml, fm, scale, depth + 1) +
           lobatto_step(f, m, mr, fm, fmr, scale, depth + 1) +
           lobatto_step(f, mr, mrr, fmr, fmrr, scale, depth + 1) +
           lobatto_step(f, mrr, b, fmrr, fb, scale, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b), h = 0.5 * (b - a);
    const double x1 = 0.942882415695480, x2 = 0.641853342345781,
                 x3 = 0.236383199662150;
    double y[13];
    const double xs[13] = {-1.0, -x1, -kLobAlpha, -x2, -kLobBeta, -x3, 0.0,
                           x3,   kLobBeta, x2, kLobAlpha, x1, 1.0};
    for (int i = 0; i < 13; ++i) y[i] = f(m + h * xs[i]);

    double i2 = (h / 6.0) * (y[0] + y[12] + 5.0 * (y[4] + y[8]));
    double i1 = (h / 1470.0) * (77.0 * (y[0] + y[12]) + 432.0 * (y[2] + y[10]) +
                                625.0 * (y[4] + y[8]) + 672.0 * y[6]);
    double is = h * (0.0158271919734802 * (y[0] + y[12]) +
                     0.0942738402188500 * (y[1] + y[11]) +
                     0.155071987336585 * (y[2] + y[10]) +
                     0.188821573960182 * (y[3] + y[9]) +
                     0.199773405226859 * (y[4] + y[8]) +
                     0.224926465333340 * (y[5] + y[7]) +
                     0.242611071901408 * y[6]);
    double err_i1 = std::fabs(i1 - is), err_i2 = std::fabs(i2 - is);
    double r = (err_i2 != 0.0) ? err_i1 / err_i2 : 1.0;
    double tol = rel_tol;
    if (r > 0.0 && r < 1.0) tol /= r;
    double scale = std::fabs(is) * tol / std::numeric_limits<double>::epsilon();
    if (scale == 0.0) scale = std::fabs(b - a);
    return lobatto_step(f, a, b, y[0], y[12], scale, 0);
}

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            // Legendre P_n(x) and derivative by recurrence.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    auto [pos, inserted] = cache.emplace(n, std::move(rule));
    return pos->second;
}

double gauss_integrate(const std::function<double(double)>& f, double a,
                       double b, int order) {
    const GaussRule& rule = gauss_legendre(order);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < order; ++i)
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

// ---------------------------------------------------------------------------
// Cyclic tridiagonal solve
// ---------------------------------------------------------------------------

namespace {

std::vector<double> solve_tridiagonal(const std::vector<double>& sub,
                                      std::vector<double> diag,
                                      const std::vector<double>& sup,
                                      std::vector<double> rhs) {
    std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
    return x;
}

}  // namespace

std::vector<double> solve_cyclic_tridiagonal(std::vector<double> sub,
                                             std::vector<double> diag,
                                             std::vector<double> sup,
                                             std::vector<double> rhs) {
    std::size_t n = diag.size();
    if (n < 3) throw std::invalid_argument("cyclic tridiagonal: need n >= 3");
    double corner_top = sub[0];     // A[0][n-1]
    double corner_bot = sup[n - 1]; // A[n-1][0]

    // Sherman-Morrison: A = T + u v^T with u = gamma*e_0 + corner_bot*e_{n-1},
    // v = e_0 + (corner_top/gamma) e_{n-1}.
    double gamma = -diag[0];
    std::vector<double> d = diag;
    d[0] -= gamma;
    d[n - 1] -= corner_top * corner_bot / gamma;

    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = corner_bot;

    std::vector<double> y = solve_tridiagonal(sub, d, sup, rhs);
    std::vector<double> z = solve_tridiagonal(sub, d, sup, u);

    double v_dot_y = y[0] + (corner_top / gamma) * y[n - 1];
    double v_dot_z = z[0] + (corner_top / gamma) * z[n - 1];
    double factor = v_dot_y / (1.0 + v_dot_z);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] - factor * z[i];
    return x;
}

// ---------------------------------------------------------------------------
// Periodic cubic spline
// ---------------------------------------------------------------------------

PeriodicSpline::PeriodicSpline(std::vector<double> s, std::vector<double> y,
                               double period)
    : s_(std::move(s)), y_(std::move(y)), period_(period) {
    std::size_t m = s_.size();
    if (m < 3 || y_.size() != m)
        throw std::invalid_argument("PeriodicSpline: need >= 3 samples");
    for (std::size_t i = 0; i + 1 < m; ++i)
        if (!(s_[i] < s_[i + 1]))
            throw std::invalid_argument("PeriodicSpline: knots not increasing");
    if (!(s_[m - 1] - s_[0] < period_))
        throw std::invalid_argument("PeriodicSpline: knots exceed period");

    // h_i = s_{i+1} - s_i with the wrap interval closing the period.
    std::vector<double> h(m);
    for (std::size_t i = 0; i + 1 < m; ++i) h[i] = s_[i + 1] - s_[i];
    h[m - 1] = s_[0] + period_ - s_[m - 1];

    auto yv = [&](std::size_t i) { return y_[i % m]; };
    std::vector<double> sub(m), diag(m), sup(m), rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
        double h_prev = h[(i + m - 1) % m];
        double h_cur = h[i];
        sub[i] = h_prev / 6.0;
        diag[i] = (h_prev + h_cur) / 3.0;
        sup[i] = h_cur / 6.0;
        rhs[i] = (yv(i + 1) - yv(i)) / h_cur - (yv(i) - yv(i + m - 1)) / h_prev;
    }
    m2_ = solve_cyclic_tridiagonal(std::move(sub), std::move(diag),
                                   std::move(sup), std::move(rhs));
}

std::size_t PeriodicSpline::locate(double& s) const {
    std::size_t m = s_.size();
    s = s_[0] + std::fmod(s - s_[0], period_);
    if (s < s_[0]) s += period_;
    // Last knot owns the wrap interval [s_{m-1}, s_0 + period).
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t i = (it == s_.begin()) ? 0 : (it - s_.begin() - 1);
    if (i >= m) i = m - 1;
    return i;
}

double PeriodicSpline::eval(double s) const {
    std::size_t m = s_.size();
    std::size_t i = locate(s);
    std::size_t j = (i + 1) % m;
    double s1 = s_[i];
    double s2 = (i + 1 < m) ? s_[i + 1] : s_[0] + period_;
    double h = s2 - s1;
    double A = (s2 - s) / h, B = (s - s1) / h;
    return A * y_[i] + B * y_[j] +
           ((A * A * A - A) * m2_[i] + (B * B * B - B) * m2_[j]) * h * h / 6.0;
}

double PeriodicSpline::deriv(double s) const {
    std::size_t m = s_.size();
    std::size_t i = locate(s);
    std::size_t j = (i + 1) % m;
    double s1 = s_[i];
    double s2 = (i + 1 < m) ? s_[i + 1] : s_[0] + period_;
    double h = s2 - s1;
    double A = (s2 - s) / h, B = (s - s1) / h;
    return (y_[j] - y_[i]) / h +
           ((3.0 * B * B - 1.0) * m2_[j] - (3.0 * A * A - 1.0) * m2_[i]) * h / 6.0;
}

double PeriodicSpline::deriv2(double s) const {
    std::size_t m = s_.size();
    std::size_t i = locate(s);
    std::size_t j = (i + 1) % m;
    double s1 = s_[i];
    double s2 = (i + 1 < m) ? s_[i + 1] : s_[0] + period_;
    double h = s2 - s1;
    double A = (s2 - s) / h, B = (s - s1) / h;
    return A * m2_[i] + B * m2_[j];
}

UnwrappedSpline::UnwrappedSpline(const std::vector<double>& s,
                                 const std::vector<double>& y, double period,
                                 double total_change)
    : slope_(total_change / period),
      base_s_(s.empty() ? 0.0 : s[0]),
      base_y_(y.empty() ? 0.0 : y[0]),
      total_change_(total_change) {
    std::vector<double> resid(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        resid[i] = y[i] - base_y_ - slope_ * (s[i] - base_s_);
    residual_ = PeriodicSpline(s, std::move(resid), period);
}

double UnwrappedSpline::eval(double s) const {
    return base_y_ + slope_ * (s - base_s_) + residual_.eval(s);
}

double UnwrappedSpline::deriv(double s) const { return slope_ + residual_.deriv(s); }

double UnwrappedSpline::deriv2(double s) const { return residual_.deriv2(s); }

// ---------------------------------------------------------------------------
// Polylines
// ---------------------------------------------------------------------------

double polyline_length(const std::vector<Point2>& pts, bool closed) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        len += (pts[i + 1] - pts[i]).norm();
    if (closed && pts.size() > 1) len += (pts.front() - pts.back()).norm();
    return len;
}

double polygon_area(const std::vector<Point2>& pts) {
    double a = 0.0;
    std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) a += cross(pts[i], pts[(i + 1) % n]);
    return 0.5 * a;
}

Point2 polyline_centroid(const std::vector<Point2>& pts) {
    Point2 c{0.0, 0.0};
    for (const auto& p : pts) c += p;
    return pts.empty() ? c : c / static_cast<double>(pts.size());
}

double bbox_diameter(const std::vector<Point2>& pts) {
    if (pts.empty()) return 0.0;
    double xlo = pts[0].x, xhi = pts[0].x, ylo = pts[0].y, yhi = pts[0].y;
    for (const auto& p : pts) {
        xlo = std::min(xlo, p.x);
        xhi = std::max(xhi, p.x);
        ylo = std::min(ylo, p.y);
        yhi = std::max(yhi, p.y);
    }
    return std::hypot(xhi - xlo, yhi - ylo);
}

double point_segment_distance(Point2 q, Point2 a, Point2 b) {
    Vec2 ab = b - a;
    double len2 = ab.norm2();
    if (len2 == 0.0) return (q - a).norm();
    double t = std::clamp(dot(q - a, ab) / len2, 0.0, 1.0);
    return (q - (a + t * ab)).norm();
}

double point_polyline_distance(Point2 q, const std::vector<Point2>& pts,
                               bool closed) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t n = pts.size();
    if (n == 1) return (q - pts[0]).norm();
    std::size_t last = closed ? n : n - 1;
    for (std::size_t i = 0; i < last; ++i)
        best = std::min(best, point_segment_distance(q, pts[i], pts[(i + 1) % n]));
    return best;
}

double hausdorff_distance(const std::vector<Point2>& a,
                          const std::vector<Point2>& b) {
    double d = 0.0;
    for (const auto& p : a) d = std::max(d, point_polyline_distance(p, b, true));
    for (const auto& p : b) d = std::max(d, point_polyline_distance(p, a, true));
    return d;
}

// ---------------------------------------------------------------------------
// Deterministic parallelism
// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (workers == 0) workers = hw ? hw : 1;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace finsler
