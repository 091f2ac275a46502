#include "finsler/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "finsler/errors.hpp"
#include "finsler/numerics.hpp"

namespace finsler {

namespace {

constexpr double kUnitSpeedTol = 1e-8;       // |F(x,u) - 1| accepted on input
constexpr double kIncidenceSineMin = 1e-6;   // grazing guard for reflections
constexpr double kConcurrencyTol = 1e-9;     // accepted reflection residual
constexpr int kReflectScanCells = 512;
constexpr double kVariationalDerivTol = 1e-8;
constexpr double kTableClearance = 0.05;     // Funk/Hilbert domain margin

struct HomLine {
    // a x + b y + c = 0 with (a, b) unit.
    double a, b, c;
};

HomLine tangent_line(const FinslerMetric& metric, Point2 x, double phi) {
    Vec2 n = perp(metric.indicatrix_tangent(x, phi));
    Vec2 point = metric.indicatrix_point(x, phi);
    return {n.x, n.y, -dot(n, point)};
}

double det3(const HomLine& l1, const HomLine& l2, const HomLine& l3) {
    return l1.a * (l2.b * l3.c - l2.c * l3.b) -
           l1.b * (l2.a * l3.c - l2.c * l3.a) +
           l1.c * (l2.a * l3.b - l2.b * l3.a);
}

// Derivative (up to the positive boundary speed) of
// t -> dist(a, x(t)) + dist(x(t), b) via the first variation: the Legendre
// covectors of the incoming and outgoing unit velocities paired with the
// boundary tangent.
double broken_path_derivative(const BilliardTable& table, Point2 a, Point2 b,
                              double t) {
    const FinslerMetric& metric = table.metric();
    Point2 x = table.boundary().point(t);
    Vec2 in = x - a;
    Vec2 out = b - x;
    Vec2 u = in / metric.norm(x, in);
    Vec2 v = out / metric.norm(x, out);
    Vec2 w_in = legendre_dual(metric, x, u);
    Vec2 w_out = legendre_dual(metric, x, v);
    return dot(w_in - w_out, table.boundary().tangent(t));
}

}  // namespace

// ---------------------------------------------------------------------------
// BilliardTable
// ---------------------------------------------------------------------------

BilliardTable::BilliardTable(std::shared_ptr<const Oval> boundary,
                             std::shared_ptr<const FinslerMetric> metric)
    : boundary_(std::move(boundary)), metric_(std::move(metric)) {
    if (!boundary_ || !metric_) throw ConfigError("table needs boundary and metric");
    if (!(boundary_->min_curvature(1024) > 0.0))
        throw ConfigError("table boundary must be strictly convex");

    const int grid = 256;
    if (const Oval* omega = metric_->domain()) {
        double clearance = std::numeric_limits<double>::infinity();
        for (int i = 0; i < grid; ++i) {
            Point2 q = boundary_->point(kTwoPi * i / grid);
            if (!(omega->implicit(q) < 0.0))
                throw ConfigError("table boundary leaves the metric domain");
            for (int j = 0; j < grid; ++j)
                clearance = std::min(
                    clearance, (q - omega->point(kTwoPi * j / grid)).norm());
        }
        if (clearance < kTableClearance)
            throw ConfigError("table too close to the metric domain boundary");
    }
    if (auto* magnetic = dynamic_cast<const MagneticMetric*>(metric_.get())) {
        for (int i = 0; i < grid; ++i) {
            Point2 q = boundary_->point(kTwoPi * i / grid);
            if (!(q.norm() < 2.0 * magnetic->larmor_radius()))
                throw FieldTooStrong("table reaches |x| >= 2R of the magnetic metric");
        }
    }
}

// ---------------------------------------------------------------------------
// Geometric reflection
// ---------------------------------------------------------------------------

Vec2 finsler_reflect(const FinslerMetric& metric, Point2 x, Vec2 mirror_tangent,
                     Vec2 inward_normal, Vec2 u) {
    if (std::fabs(metric.norm(x, u) - 1.0) > kUnitSpeedTol)
        throw std::invalid_argument("finsler_reflect: u is not unit");
    Vec2 u_hat = u.normalized();
    if (std::fabs(cross(mirror_tangent, u_hat)) < kIncidenceSineMin)
        throw GrazingIncidence("incidence sine below 1e-6");
    if (!(dot(u, inward_normal) < 0.0))
        throw std::invalid_argument("finsler_reflect: u must head outward");

    double phi_u = u.angle();
    HomLine line_u = tangent_line(metric, x, phi_u);
    Vec2 nb = perp(mirror_tangent).normalized();
    HomLine line_b{nb.x, nb.y, 0.0};

    // The concurrency determinant h(phi) vanishes at exactly two directions:
    // phi_u itself and the outgoing one. Dividing by 2 sin((phi - phi_u)/2)
    // removes the known root without flipping signs inside (0, 2pi), so the
    // one remaining sign change is the solution even when it sits close to
    // phi_u.
    auto h = [&](double phi) {
        return det3(line_u, line_b, tangent_line(metric, x, phi));
    };
    auto h_deflated = [&](double d) {
        return h(phi_u + d) / (2.0 * std::sin(0.5 * d));
    };

    std::vector<double> candidates;
    {
        double step = kTwoPi / kReflectScanCells;
        double prev_d = 0.5 * step;
        double prev = h_deflated(prev_d);
        for (int k = 1; k <= kReflectScanCells; ++k) {
            double d = std::min((k + 0.5) * step, kTwoPi - 1e-9);
            double cur = h_deflated(d);
            if (prev == 0.0)
                candidates.push_back(prev_d);
            else if (prev * cur < 0.0)
                candidates.push_back(
                    refine_root(h_deflated, prev_d, d, prev, cur, 1e-13));
            prev_d = d;
            prev = cur;
            if (d >= kTwoPi - 1e-9) break;
        }
    }
    if (candidates.empty()) {
        // Near-grazing: the outgoing direction hugs phi_u. Geometric scans
        // toward both ends of the punctured interval.
        for (bool from_below : {false, true}) {
            double prev_d = from_below ? kTwoPi - 1e-9 : 1e-9;
            double prev = h_deflated(prev_d);
            for (int k = 1; k <= 128; ++k) {
                double mag = std::pow(10.0, -9.0 + 9.0 * k / 128.0);
                double d = from_below ? kTwoPi - mag : mag;
                double cur = h_deflated(d);
                if (prev * cur < 0.0) {
                    double lo = std::min(prev_d, d), hi = std::max(prev_d, d);
                    candidates.push_back(refine_root(h_deflated, lo, hi,
                                                     h_deflated(lo),
                                                     h_deflated(hi), 1e-15));
                    break;
                }
                prev_d = d;
                prev = cur;
            }
        }
    }

    Vec2 best{0.0, 0.0};
    double best_inward = -std::numeric_limits<double>::infinity();
    for (double d : candidates) {
        Vec2 v = metric.indicatrix_point(x, phi_u + d);
        double inward = dot(v.normalized(), inward_normal);
        if (inward > best_inward) {
            best_inward = inward;
            best = v;
        }
    }
    if (!(best_inward > 0.0))
        throw NoTransversalSolution("no inward-pointing tangency direction");
    double residual = reflection_residual(metric, x, mirror_tangent, u, best);
    if (!(residual < kConcurrencyTol))
        throw NoTransversalSolution("concurrency residual " +
                                    std::to_string(residual));
    return best;
}

double reflection_residual(const FinslerMetric& metric, Point2 x,
                           Vec2 mirror_tangent, Vec2 u, Vec2 v) {
    HomLine lu = tangent_line(metric, x, u.angle());
    HomLine lv = tangent_line(metric, x, v.angle());
    Vec2 T = mirror_tangent.normalized();
    double denom = lu.a * T.x + lu.b * T.y;
    if (std::fabs(denom) < 1e-10) {
        // Tangent at u parallel to the mirror: all three must be parallel.
        return std::fabs(lv.a * T.x + lv.b * T.y);
    }
    // Meet of the tangent at u with the mirror line (through the origin).
    double s = -lu.c / denom;
    Point2 P = s * T;
    return std::fabs(lv.a * P.x + lv.b * P.y + lv.c);
}

Vec2 reflect_geometric(const BilliardTable& table, double t, Vec2 u) {
    const Oval& oval = table.boundary();
    return finsler_reflect(table.metric(), oval.point(t), oval.tangent(t),
                           -oval.outward_normal(t), u);
}

// ---------------------------------------------------------------------------
// Variational reflection
// ---------------------------------------------------------------------------

double reflect_variational(const BilliardTable& table, Point2 a, Point2 b,
                           double t_guess) {
    auto D = [&](double t) { return broken_path_derivative(table, a, b, t); };
    for (double w : {0.02, 0.05, 0.1, 0.2, 0.35, 0.5}) {
        // Scan the window; it may contain several critical points.
        const int cells = 16;
        double prev_t = t_guess - w;
        double prev = D(prev_t);
        for (int k = 1; k <= cells; ++k) {
            double cur_t = t_guess - w + 2.0 * w * k / cells;
            double cur = D(cur_t);
            if (prev == 0.0 || prev * cur < 0.0) {
                double root = (prev == 0.0)
                                  ? prev_t
                                  : refine_root(D, prev_t, cur_t, prev, cur, 1e-12);
                if (std::fabs(D(root)) < kVariationalDerivTol)
                    return wrap_angle(root);
            }
            prev_t = cur_t;
            prev = cur;
        }
    }
    throw NoConvergence("no critical point of the path length near the guess");
}

// ---------------------------------------------------------------------------
// Map and propagation
// ---------------------------------------------------------------------------

RayState billiard_map(const BilliardTable& table, const RayState& state) {
    const Oval& oval = table.boundary();
    Point2 x = oval.point(state.t);
    double t_next = oval.ray_first_hit(x, state.v.angle(), state.t);
    Point2 x_next = oval.point(t_next);
    Vec2 u = state.v / table.metric().norm(x_next, state.v);
    return {t_next, reflect_geometric(table, t_next, u)};
}

Trajectory propagate(const BilliardTable& table, Point2 source, double phi,
                     int bounces) {
    if (bounces < 1) throw ConfigError("propagate needs at least one bounce");
    const Oval& oval = table.boundary();
    if (!oval.contains(source))
        throw ConfigError("source must lie strictly inside the table");

    Trajectory traj;
    traj.source = source;
    traj.initial_angle = phi;
    traj.initial_line = line_from_point_dir(source, phi);

    double t = oval.ray_first_hit(source, phi);
    Vec2 d = OrientedLine::direction(phi);
    Vec2 u = d / table.metric().norm(oval.point(t), d);
    RayState state{t, reflect_geometric(table, t, u)};
    traj.params.push_back(state.t);
    traj.points.push_back(oval.point(state.t));
    traj.velocities.push_back(state.v);
    for (int k = 1; k < bounces; ++k) {
        state = billiard_map(table, state);
        traj.params.push_back(state.t);
        traj.points.push_back(oval.point(state.t));
        traj.velocities.push_back(state.v);
    }
    traj.final_line = line_from_point_dir(traj.points.back(),
                                          traj.velocities.back().angle());
    traj.exit_t = oval.ray_first_hit(traj.points.back(),
                                     traj.velocities.back().angle(), state.t);
    return traj;
}

double reversibility_defect(const BilliardTable& table, const Trajectory& traj) {
    const Oval& oval = table.boundary();
    int n = static_cast<int>(traj.params.size());
    Point2 entry = oval.point(traj.exit_t);
    Vec2 back = -traj.velocities.back();
    double t = oval.ray_first_hit(entry, back.angle(), traj.exit_t);
    Vec2 u = back / table.metric().norm(oval.point(t), back);
    RayState state{t, reflect_geometric(table, t, u)};
    for (int k = 1; k < n; ++k) state = billiard_map(table, state);
    OrientedLine final_back =
        line_from_point_dir(oval.point(state.t), state.v.angle());
    OrientedLine recovered = final_back.reversed();
    return std::fabs(angle_diff(recovered.alpha, traj.initial_line.alpha)) +
           std::fabs(recovered.p - traj.initial_line.p);
}

bool reversibility_test(const BilliardTable& table, const Trajectory& traj,
                        double tol) {
    return reversibility_defect(table, traj) < tol;
}

// ---------------------------------------------------------------------------
// Projective invariance of the Minkowski reflection
// ---------------------------------------------------------------------------

double ak_invariance_test(const MinkowskiMetric& K, Vec2 ell, double t,
                          double mirror_angle, double incoming_angle) {
    if (!(t > 0.0)) throw ConfigError("projective map needs t > 0");
    // The map x -> t x / (1 + l(x)) preserves directions, so the image body
    // is radial with profile rho1(phi) = t rho(phi) / (1 + l(rho(phi) u(phi))).
    const MinkowskiMetric* base = &K;
    auto rho1 = [base, ell, t](double phi) {
        double r = base->rho(phi);
        double denom = 1.0 + dot(ell, r * unit_dir(phi));
        if (!(denom > 0.0))
            throw ImageNotConvex("1 + l(x) must stay positive on the indicatrix");
        return t * r / denom;
    };
    auto drho1 = [base, ell, t](double phi) {
        double r = base->rho(phi);
        double r1 = base->drho(phi);
        Vec2 u = unit_dir(phi);
        double g = 1.0 + dot(ell, r * u);
        double g1 = r1 * dot(ell, u) + r * dot(ell, perp(u));
        return t * (r1 * g - r * g1) / (g * g);
    };
    std::unique_ptr<MinkowskiMetric> image;
    try {
        image = std::make_unique<MinkowskiMetric>(rho1, drho1, "ak-image");
    } catch (const NotConvex& e) {
        throw ImageNotConvex(e.what());
    }

    Vec2 T = unit_dir(mirror_angle);
    Vec2 u_hat = unit_dir(incoming_angle);
    Vec2 n_in = perp(T);
    if (dot(u_hat, n_in) > 0.0) n_in = -n_in;
    Point2 origin{0.0, 0.0};
    Vec2 v1 = finsler_reflect(K, origin, T, n_in,
                              K.indicatrix_point(origin, incoming_angle));
    Vec2 v2 = finsler_reflect(*image, origin, T, n_in,
                              image->indicatrix_point(origin, incoming_angle));
    return std::fabs(angle_diff(v1.angle(), v2.angle()));
}

// ---------------------------------------------------------------------------
// n-bounce shots
// ---------------------------------------------------------------------------

namespace {

struct ShotProblem {
    const BilliardTable* table;
    Point2 O, A;
    int n;

    Point2 anchor(const std::vector<double>& ts, int i, int side) const {
        // side -1: predecessor of bounce i; side +1: successor.
        int j = i + side;
        if (j < 0) return O;
        if (j >= n) return A;
        return table->boundary().point(ts[j]);
    }

    std::vector<double> gradient(const std::vector<double>& ts) const {
        std::vector<double> g(n);
        for (int i = 0; i < n; ++i)
            g[i] = broken_path_derivative(*table, anchor(ts, i, -1),
                                          anchor(ts, i, +1), ts[i]);
        return g;
    }

    double length(const std::vector<double>& ts) const {
        const FinslerMetric& m = table->metric();
        double L = segment_length(m, O, table->boundary().point(ts[0]));
        for (int i = 0; i + 1 < n; ++i)
            L += segment_length(m, table->boundary().point(ts[i]),
                                table->boundary().point(ts[i + 1]));
        L += segment_length(m, table->boundary().point(ts[n - 1]), A);
        return L;
    }
};

bool solve_linear(std::vector<std::vector<double>> M, std::vector<double>& rhs) {
    int n = static_cast<int>(rhs.size());
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(M[r][col]) > std::fabs(M[pivot][col])) pivot = r;
        if (std::fabs(M[pivot][col]) < 1e-14) return false;
        std::swap(M[pivot], M[col]);
        std::swap(rhs[pivot], rhs[col]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = M[r][col] / M[col][col];
            for (int c = col; c < n; ++c) M[r][c] -= f * M[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    for (int i = 0; i < n; ++i) rhs[i] /= M[i][i];
    return true;
}

// Newton iteration on the gradient; converges to critical points of any
// index, which the multistart needs (the count includes saddles).
bool newton_polish(const ShotProblem& prob, std::vector<double>& ts) {
    const int n = prob.n;
    const double fd_step = 1e-6;
    for (int iter = 0; iter < 60; ++iter) {
        std::vector<double> g = prob.gradient(ts);
        std::vector<std::vector<double>> H(n, std::vector<double>(n));
        for (int j = 0; j < n; ++j) {
            std::vector<double> tp = ts, tm = ts;
            tp[j] += fd_step;
            tm[j] -= fd_step;
            std::vector<double> gp = prob.gradient(tp);
            std::vector<double> gm = prob.gradient(tm);
            for (int i = 0; i < n; ++i)
                H[i][j] = (gp[i] - gm[i]) / (2.0 * fd_step);
        }
        std::vector<double> step = g;
        for (double& s : step) s = -s;
        if (!solve_linear(H, step)) return false;
        double inf = 0.0;
        for (double s : step) inf = std::max(inf, std::fabs(s));
        if (inf > 0.3) {
            for (double& s : step) s *= 0.3 / inf;
            inf = 0.3;
        }
        for (int i = 0; i < n; ++i) ts[i] += step[i];
        if (inf < 1e-10) {
            std::vector<double> gf = prob.gradient(ts);
            double gmax = 0.0;
            for (double v : gf) gmax = std::max(gmax, std::fabs(v));
            return gmax < 1e-8;
        }
    }
    return false;
}

}  // namespace

std::vector<Shot> n_bounce_shots(const BilliardTable& table, Point2 O, Point2 A,
                                 int bounces, const ShotOptions& opts) {
    if (bounces < 1) throw ConfigError("n_bounce_shots needs n >= 1");
    if (!table.boundary().contains(O) || !table.boundary().contains(A))
        throw ConfigError("shot endpoints must lie inside the table");
    ShotProblem prob{&table, O, A, bounces};

    std::vector<std::vector<double>> seeds = opts.extra_seeds;
    if (opts.seeds_per_dim <= 0) {
        // seeded entirely by extra_seeds
    } else if (bounces <= 3) {
        int per = opts.seeds_per_dim;
        std::vector<int> idx(bounces, 0);
        while (true) {
            std::vector<double> seed(bounces);
            for (int i = 0; i < bounces; ++i)
                seed[i] = kTwoPi * (idx[i] + 0.5) / per;
            seeds.push_back(seed);
            int d = bounces - 1;
            while (d >= 0 && ++idx[d] == per) idx[d--] = 0;
            if (d < 0) break;
        }
    } else {
        std::mt19937_64 rng(12345);
        std::uniform_real_distribution<double> U(0.0, kTwoPi);
        for (int k = 0; k < 4096; ++k) {
            std::vector<double> seed(bounces);
            for (double& t : seed) t = U(rng);
            seeds.push_back(seed);
        }
    }

    std::vector<Shot> shots;
    for (const auto& seed : seeds) {
        std::vector<double> ts = seed;
        // A few blockwise 1-d critical-point sweeps move the seed into a
        // basin; Newton then lands on the critical point regardless of index.
        for (int sweep = 0; sweep < 3; ++sweep) {
            for (int i = 0; i < bounces; ++i) {
                try {
                    ts[i] = reflect_variational(table, prob.anchor(ts, i, -1),
                                                prob.anchor(ts, i, +1), ts[i]);
                } catch (const NumericError&) {
                    // keep the current coordinate
                }
            }
        }
        if (!newton_polish(prob, ts)) continue;
        for (double& t : ts) t = wrap_angle(t);

        // Triangle inequality keeps genuine shots off the diagonal.
        bool distinct = true;
        for (int i = 0; i + 1 < bounces; ++i)
            if (cyclic_dist(ts[i], ts[i + 1], kTwoPi) <= 1e-3) distinct = false;
        if (!distinct) continue;

        Shot shot;
        shot.params = ts;
        for (double t : ts) shot.points.push_back(table.boundary().point(t));

        // Certify the reflection law at every bounce; unphysical critical
        // points (incoming leg pointing the wrong way) fail here.
        bool valid = true;
        double worst = 0.0;
        try {
            for (int i = 0; i < bounces; ++i) {
                Point2 x = shot.points[i];
                Point2 prev = prob.anchor(ts, i, -1);
                Point2 next = prob.anchor(ts, i, +1);
                Vec2 in = x - prev;
                Vec2 u = in / table.metric().norm(x, in);
                Vec2 v = reflect_geometric(table, ts[i], u);
                worst = std::max(
                    worst, std::fabs(angle_diff(v.angle(), (next - x).angle())));
            }
        } catch (const NumericError&) {
            valid = false;
        } catch (const std::invalid_argument&) {
            valid = false;
        }
        if (!valid || worst > opts.residual_tol) continue;
        shot.reflection_residual = worst;
        shot.length = prob.length(ts);

        bool duplicate = false;
        for (const auto& other : shots) {
            double dist = 0.0;
            for (int i = 0; i < bounces; ++i)
                dist = std::max(dist, cyclic_dist(ts[i], other.params[i], kTwoPi));
            if (dist < opts.dedup_tol) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) shots.push_back(std::move(shot));
    }

    std::sort(shots.begin(), shots.end(), [](const Shot& a, const Shot& b) {
        return a.params < b.params;
    });
    return shots;
}

// ---------------------------------------------------------------------------
// Line map and Jacobian experiment
// ---------------------------------------------------------------------------

OrientedLine line_billiard_map(const BilliardTable& table, OrientedLine line) {
    const Oval& oval = table.boundary();
    Point2 start = line.base_point() - 2.0 * oval.max_radius() * line.direction();
    double t_in = oval.ray_first_hit(start, line.alpha);
    double t_out = oval.ray_first_hit(oval.point(t_in), line.alpha, t_in);
    Point2 x = oval.point(t_out);
    Vec2 d = line.direction();
    Vec2 u = d / table.metric().norm(x, d);
    Vec2 v = reflect_geometric(table, t_out, u);
    return line_from_point_dir(x, v.angle());
}

double jacobian_experiment(const BilliardTable& table, const RayState& state,
                           double h) {
    OrientedLine base = line_from_point_dir(table.boundary().point(state.t),
                                            state.v.angle());
    auto image = [&](double alpha, double p) {
        return line_billiard_map(table, {wrap_angle(alpha), p});
    };
    OrientedLine a_hi = image(base.alpha + h, base.p);
    OrientedLine a_lo = image(base.alpha - h, base.p);
    OrientedLine p_hi = image(base.alpha, base.p + h);
    OrientedLine p_lo = image(base.alpha, base.p - h);
    double j00 = angle_diff(a_hi.alpha, a_lo.alpha) / (2.0 * h);
    double j10 = (a_hi.p - a_lo.p) / (2.0 * h);
    double j01 = angle_diff(p_hi.alpha, p_lo.alpha) / (2.0 * h);
    double j11 = (p_hi.p - p_lo.p) / (2.0 * h);
    return j00 * j11 - j01 * j10;
}

}  // namespace finsler
