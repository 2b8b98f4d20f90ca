#include "singsurf/quasi_iso.hpp"

#include "singsurf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace singsurf {

namespace {

// arc / chord ratio for a circular arc with total tangent turning psi.
double chord_factor(double psi) {
    if (psi < 1e-4) return 1.0 + psi * psi / 24.0;
    return 0.5 * psi / std::sin(0.5 * psi);
}

double angle_between(const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
    double c = std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0);
    return std::acos(c);
}

// Projects onto {f = 0} n {|x - p| = r} (Gauss-Newton, minimum norm).
void project_to_link(const SurfaceEval& eval, const Eigen::Vector3d& p, double r,
                     Eigen::Vector3d& x) {
    for (int it = 0; it < 50; ++it) {
        Eigen::Vector3d u = (x - p) / r;
        Eigen::Vector2d F(eval.f(x), 0.5 * r * (u.squaredNorm() - 1.0));
        Eigen::Matrix<double, 2, 3> J;
        J.row(0) = eval.grad(x);
        J.row(1) = u;
        Eigen::Matrix2d JJt = J * J.transpose();
        Eigen::Vector3d d = -J.transpose() * JJt.inverse() * F;
        if (!d.allFinite()) throw QiError("projection diverged");
        x += d;
        if (d.norm() <= 1e-13 * r) return;
    }
    throw QiError("projection did not converge");
}

// Solves f = 0, |x - p| = r, (x - p) . n = 0 by Newton from a nearby start.
Eigen::Vector3d solve_anchor(const SurfaceEval& eval, const Eigen::Vector3d& p,
                             double r, const Eigen::Vector3d& n,
                             Eigen::Vector3d x) {
    for (int it = 0; it < 60; ++it) {
        Eigen::Vector3d u = (x - p) / r;
        Eigen::Vector3d F(eval.f(x), 0.5 * r * (u.squaredNorm() - 1.0),
                          (x - p).dot(n));
        Eigen::Matrix3d J;
        J.row(0) = eval.grad(x);
        J.row(1) = u;
        J.row(2) = n;
        Eigen::Vector3d d = J.partialPivLu().solve(-F);
        if (!d.allFinite() || d.norm() > 0.5 * r)
            throw QiError("anchor solve diverged");
        x += d;
        if (d.norm() <= 1e-13 * r) return x;
    }
    throw QiError("anchor solve did not converge");
}

struct OrientedLevel {
    LinkCurve curve;                      // oriented, starting at the anchor
    std::vector<double> cum;              // cumulative corrected metric length
    Eigen::Vector3d anchor_tangent;
};

// Rebuilds the component polyline to start at the half-plane anchor and run
// in the requested direction.
OrientedLevel orient_level(const ImplicitSurfaceSpec& spec, const LinkCurve& raw,
                           const Eigen::Vector3d& n, const Eigen::Vector3d& m,
                           const Eigen::Vector3d& forward_hint) {
    const Eigen::Vector3d p = spec.point();
    const std::size_t N = raw.points.size();

    // Find a transversal crossing of the half-plane {(x-p).n = 0, (x-p).m > 0}.
    std::size_t seg = N;
    for (std::size_t i = 0; i < N; ++i) {
        const Eigen::Vector3d& a = raw.points[i];
        const Eigen::Vector3d& b = raw.points[(i + 1) % N];
        double sa = (a - p).dot(n), sb = (b - p).dot(n);
        if (sa == 0.0) sa = -1e-300;
        if (!(sa < 0 && sb >= 0) && !(sa > 0 && sb <= 0)) continue;
        double u = sa / (sa - sb);
        Eigen::Vector3d mid = a + u * (b - a);
        if ((mid - p).dot(m) <= 0.0) continue;  // wrong side of the axis
        seg = i;
        break;
    }
    if (seg == N) throw QiError("anchor half-plane misses the component");

    double sa = (raw.points[seg] - p).dot(n);
    double sb = (raw.points[(seg + 1) % N] - p).dot(n);
    Eigen::Vector3d anchor = raw.points[seg] +
                             sa / (sa - sb) * (raw.points[(seg + 1) % N] - raw.points[seg]);
    anchor = solve_anchor(*spec.eval, p, raw.r, n, anchor);

    Eigen::Vector3d t_anchor, dtds;
    link_frame(*spec.eval, p, anchor, t_anchor, dtds);
    if (std::abs(t_anchor.dot(n)) < 0.05)
        throw QiError("anchor half-plane is tangent to the component");
    int dir = t_anchor.dot(forward_hint) >= 0 ? 1 : -1;
    if (dir < 0) t_anchor = -t_anchor;

    OrientedLevel lev;
    lev.curve.r = raw.r;
    lev.curve.points.push_back(anchor);
    lev.curve.tangents.push_back(t_anchor);
    for (std::size_t k = 1; k <= N; ++k) {
        std::size_t i = dir > 0 ? (seg + k) % N
                                : (seg + 1 + N - (k - 1) - 1) % N;
        lev.curve.points.push_back(raw.points[i]);
        lev.curve.tangents.push_back(dir > 0 ? raw.tangents[i]
                                             : Eigen::Vector3d(-raw.tangents[i]));
    }
    lev.curve.points.push_back(anchor);  // explicit closure
    lev.curve.tangents.push_back(t_anchor);

    lev.cum.assign(lev.curve.points.size(), 0.0);
    for (std::size_t i = 1; i < lev.curve.points.size(); ++i) {
        Eigen::Vector3d d = lev.curve.points[i] - lev.curve.points[i - 1];
        Eigen::Vector3d mid = 0.5 * (lev.curve.points[i] + lev.curve.points[i - 1]);
        double chord = std::sqrt(spec.metric.norm2(mid, d));
        double psi = angle_between(lev.curve.tangents[i - 1], lev.curve.tangents[i]);
        lev.cum[i] = lev.cum[i - 1] + chord * chord_factor(psi);
    }
    lev.anchor_tangent = t_anchor;
    return lev;
}

// Point at cumulative metric arc target tau, by cubic Hermite interpolation
// on the containing polyline segment followed by projection onto the link.
Eigen::Vector3d point_at_arc(const ImplicitSurfaceSpec& spec,
                             const OrientedLevel& lev, double tau) {
    const auto& P = lev.curve.points;
    const auto& T = lev.curve.tangents;
    auto it = std::upper_bound(lev.cum.begin(), lev.cum.end(), tau);
    std::size_t i = std::min<std::size_t>(
        std::max<std::ptrdiff_t>(1, it - lev.cum.begin()), lev.cum.size() - 1);
    double s0 = lev.cum[i - 1], s1 = lev.cum[i];
    double u = s1 > s0 ? (tau - s0) / (s1 - s0) : 0.0;
    double ds = (P[i] - P[i - 1]).norm() *
                chord_factor(angle_between(T[i - 1], T[i]));  // Euclidean arc
    double u2 = u * u, u3 = u2 * u;
    Eigen::Vector3d x = (2 * u3 - 3 * u2 + 1) * P[i - 1] +
                        (u3 - 2 * u2 + u) * ds * T[i - 1] +
                        (-2 * u3 + 3 * u2) * P[i] + (u3 - u2) * ds * T[i];
    project_to_link(*spec.eval, spec.point(), lev.curve.r, x);
    return x;
}

double metric_dot(const AmbientMetric& g, const Eigen::Vector3d& x,
                  const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
    // Polarization keeps AmbientMetric's interface minimal.
    return 0.25 * (g.norm2(x, u + v) - g.norm2(x, u - v));
}

}  // namespace

QiGrid build_phi_grid(const ImplicitSurfaceSpec& spec, int component,
                      const std::vector<double>& r_levels, int theta_count,
                      const TraceOptions& opts) {
    if (r_levels.size() < 3) throw QiError("need at least 3 r-levels");
    for (std::size_t i = 1; i < r_levels.size(); ++i)
        if (!(r_levels[i] < r_levels[i - 1]))
            throw QiError("r-levels must be strictly decreasing");
    if (theta_count < 8) throw QiError("need at least 8 theta samples");

    const Eigen::Vector3d p = spec.point();

    // Trace all levels first, tracking the chosen component by centroid.
    std::vector<LinkCurve> raw;
    Eigen::Vector3d track_dir = Eigen::Vector3d::Zero();
    for (double r : r_levels) {
        auto comps = trace_link(spec, r, opts);
        if (comps.empty()) throw QiError("no link found at a level");
        const LinkCurve* pick = nullptr;
        if (raw.empty()) {
            for (const auto& c : comps)
                if (c.component_id == component) pick = &c;
            if (!pick) throw QiError("requested component not present");
        } else {
            double best = -2;
            for (const auto& c : comps) {
                double d = c.centroid_dir.dot(track_dir);
                if (d > best) {
                    best = d;
                    pick = &c;
                }
            }
        }
        track_dir = pick->centroid_dir;
        raw.push_back(*pick);
    }

    // Anchor half-planes: 8 half-planes bounded by the vertical axis through
    // p, at 45 degree increments; the first that crosses every level wins.
    QiGrid grid;
    bool anchored = false;
    std::vector<OrientedLevel> levels;
    for (int k = 0; k < 8 && !anchored; ++k) {
        double phi = k * M_PI / 4.0;
        Eigen::Vector3d m(std::cos(phi), std::sin(phi), 0.0);
        Eigen::Vector3d n(std::sin(phi), -std::cos(phi), 0.0);
        try {
            levels.clear();
            Eigen::Vector3d hint = n;
            for (const auto& rawlev : raw) {
                levels.push_back(orient_level(spec, rawlev, n, m, hint));
                hint = levels.back().anchor_tangent;
            }
            anchored = true;
        } catch (const QiError&) {
        }
    }
    if (!anchored) throw QiError("no anchor half-plane works for this component");

    grid.component_id = component;
    grid.r_levels = r_levels;
    grid.theta_count = theta_count;
    const int M = theta_count;
    for (std::size_t lv = 0; lv < levels.size(); ++lv) {
        double L = levels[lv].cum.back();
        grid.l_of_r.push_back(L);
        std::vector<Eigen::Vector3d> row;
        for (int j = 0; j < M; ++j)
            row.push_back(point_at_arc(spec, levels[lv], L * j / M));
        grid.points.push_back(std::move(row));
    }

    // Measured |Phi_theta| per level (centered differences with the circular
    // chord correction, analytic tangents).
    const double dth = 2.0 * M_PI / M;
    std::vector<std::vector<Eigen::Vector3d>> phi_theta(levels.size());
    for (std::size_t lv = 0; lv < levels.size(); ++lv) {
        double mean_speed = 0;
        for (int j = 0; j < M; ++j) {
            const Eigen::Vector3d& xm = grid.points[lv][(j + M - 1) % M];
            const Eigen::Vector3d& xp = grid.points[lv][(j + 1) % M];
            const Eigen::Vector3d& x0 = grid.points[lv][j];
            Eigen::Vector3d tm, tp, t0, dummy;
            link_frame(*spec.eval, p, xm, tm, dummy);
            link_frame(*spec.eval, p, xp, tp, dummy);
            link_frame(*spec.eval, p, x0, t0, dummy);
            Eigen::Vector3d d = xp - xm;
            if (t0.dot(d) < 0) t0 = -t0;
            if (tm.dot(d) < 0) tm = -tm;
            if (tp.dot(d) < 0) tp = -tp;
            double speed = std::sqrt(spec.metric.norm2(x0, d)) *
                           chord_factor(angle_between(tm, tp)) / (2.0 * dth);
            phi_theta[lv].push_back(t0 * (speed / std::sqrt(spec.metric.norm2(x0, t0))));
            mean_speed += speed;
        }
        grid.speed_of_r.push_back(mean_speed / M);
    }

    // Metric cells on interior levels: Phi_r by nonuniform centered
    // differences down the geometric r-ladder at fixed theta.
    grid.metric_cells.resize(levels.size());
    for (std::size_t lv = 0; lv + 1 < levels.size(); ++lv) {
        if (lv == 0) continue;
        double x1 = r_levels[lv - 1], x2 = r_levels[lv], x3 = r_levels[lv + 1];
        double c1 = (x2 - x3) / ((x1 - x2) * (x1 - x3));
        double c2 = (2 * x2 - x1 - x3) / ((x2 - x1) * (x2 - x3));
        double c3 = (x2 - x1) / ((x3 - x1) * (x3 - x2));
        for (int j = 0; j < M; ++j) {
            Eigen::Vector3d phi_r = c1 * grid.points[lv - 1][j] +
                                    c2 * grid.points[lv][j] +
                                    c3 * grid.points[lv + 1][j];
            const Eigen::Vector3d& x0 = grid.points[lv][j];
            QiGrid::Cell cell;
            cell.r = x2;
            cell.a = spec.metric.norm2(x0, phi_r);
            cell.b = metric_dot(spec.metric, x0, phi_r, phi_theta[lv][j]);
            cell.c = spec.metric.norm2(x0, phi_theta[lv][j]);
            if (!(cell.a > 0 && cell.c > 0 && cell.a * cell.c - cell.b * cell.b > 0))
                throw QiError("degenerate metric cell");
            grid.metric_cells[lv].push_back(cell);
        }
    }

    // Sphere-radius invariant.
    for (std::size_t lv = 0; lv < levels.size(); ++lv)
        for (const auto& x : grid.points[lv])
            if (std::abs((x - p).norm() - r_levels[lv]) > 1e-9 * r_levels[lv])
                throw QiError("grid point misses its sphere");
    return grid;
}

double qi_defect(const QiGrid& grid, double eps) {
    double worst = -1;
    for (std::size_t lv = 0; lv < grid.metric_cells.size(); ++lv) {
        if (grid.metric_cells[lv].empty() || grid.r_levels[lv] > eps) continue;
        double s = grid.l_of_r[lv] / (2.0 * M_PI);
        for (const auto& cell : grid.metric_cells[lv]) {
            // Eigenvalues of diag(1, s)^-1 g diag(1, s)^-1.
            double a = cell.a, b = cell.b / s, c = cell.c / (s * s);
            double tr = a + c, det = a * c - b * b;
            double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
            double lmax = tr / 2.0 + disc, lmin = tr / 2.0 - disc;
            if (!(lmin > 0)) throw QiError("degenerate metric cell");
            worst = std::max(worst, std::max(lmax - 1.0, 1.0 / lmin - 1.0));
        }
    }
    if (worst < 0) throw QiError("no metric cells at or below eps");
    return std::max(worst, 0.0);
}

std::pair<double, double> sandwich_margins(const QiGrid::Cell& cell) {
    double T = std::abs(cell.b) / std::sqrt(cell.a * cell.c);
    // g - (1-T) diag(a,c) and (1+T) diag(a,c) - g are both [[T a, +-b],[+-b, T c]];
    // the margin is the smaller eigenvalue of that matrix.
    double tr = T * (cell.a + cell.c);
    double det = T * T * cell.a * cell.c - cell.b * cell.b;  // 0 up to roundoff
    double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
    return {tr / 2.0 - disc, tr / 2.0 - disc};
}

QiDefectCurve fit_alpha(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 5) throw QiError("need at least 5 defect samples");
    double lo = samples.front().first, hi = samples.front().first;
    for (const auto& [e, d] : samples) {
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        if (d < 0) throw QiError("negative defect sample");
    }
    if (hi / lo < 10.0) throw QiError("defect samples must span a decade of eps");

    QiDefectCurve out;
    out.samples = samples;
    const double floor = 1e-6;
    std::vector<double> lx, ly;
    for (const auto& [e, d] : samples)
        if (d > floor) {
            lx.push_back(std::log(e));
            ly.push_back(std::log(d));
        }
    if (lx.size() < 3) {
        out.noise_floor = true;
        out.pass = true;
        return out;
    }
    auto [slope, intercept] = linear_fit(lx, ly);
    out.alpha = slope;
    out.C = std::exp(intercept);
    out.pass = out.alpha > 0;
    return out;
}

std::vector<double> radial_angle_profile(const QiGrid& grid) {
    std::vector<double> prof(grid.r_levels.size(), 0.0);
    for (std::size_t lv = 0; lv < grid.metric_cells.size(); ++lv)
        for (const auto& cell : grid.metric_cells[lv])
            prof[lv] = std::max(
                prof[lv],
                std::abs(std::asin(std::clamp(
                    cell.b / std::sqrt(cell.a * cell.c), -1.0, 1.0))));
    return prof;
}

Decomposition classify(const std::vector<AsymptoticExpansion>& expansions,
                       int lattice_m) {
    if (lattice_m < 1) throw QiError("lattice_m must be positive");
    Decomposition d;
    for (std::size_t k = 0; k < expansions.size(); ++k) {
        ComponentClass cc;
        cc.component_id = static_cast<int>(k);
        cc.gamma_raw = expansions[k].gamma;
        double nearest = std::round(cc.gamma_raw * lattice_m);
        if (std::abs(cc.gamma_raw - nearest / lattice_m) <= 0.05 && nearest >= 1) {
            cc.snapped = true;
            cc.gamma = Rational(static_cast<long long>(nearest), lattice_m);
        } else {
            cc.gamma = Rational(0);
        }
        cc.anomaly = cc.gamma_raw < 1.0 - 0.05;
        cc.is_cone = cc.snapped && cc.gamma == Rational(1);
        d.components.push_back(cc);
    }
    d.N = static_cast<int>(d.components.size());
    return d;
}

std::string decomposition_to_text(const Decomposition& d) {
    std::ostringstream os;
    os << "[";
    for (std::size_t k = 0; k < d.components.size(); ++k) {
        const auto& c = d.components[k];
        if (k) os << ", ";
        if (c.anomaly)
            os << "anomaly(gamma=" << c.gamma_raw << ")";
        else if (c.is_cone)
            os << "cone";
        else if (c.snapped)
            os << "horn(" << c.gamma << ")";
        else
            os << "horn(~" << c.gamma_raw << ")";
    }
    os << "], N=" << d.N;
    return os.str();
}

LedgerCheck constant_ledger_check(const QiGrid& grid, double C0, double C1, int k) {
    if (!(C0 > 0) || !(C1 >= 0) || k < 1)
        throw QiError("constant ledger needs C0 > 0, C1 >= 0, k >= 1");
    LedgerCheck out;
    out.measured_delta = qi_defect(grid, grid.r_levels.front());
    out.bound = C0 * (6.0 + 4.0 * k * (6.0 + 2.0 * C1));
    out.pass = out.measured_delta <= out.bound;
    return out;
}

void write_defect_csv(std::ostream& os, const QiGrid& grid) {
    os << "eps,delta,beta_max\n";
    auto beta = radial_angle_profile(grid);
    os.precision(17);
    for (std::size_t lv = 0; lv < grid.metric_cells.size(); ++lv) {
        if (grid.metric_cells[lv].empty()) continue;
        double s = grid.l_of_r[lv] / (2.0 * M_PI);
        double worst = 0;
        for (const auto& cell : grid.metric_cells[lv]) {
            double a = cell.a, b = cell.b / s, c = cell.c / (s * s);
            double tr = a + c, det = a * c - b * b;
            double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
            worst = std::max(worst,
                             std::max(tr / 2.0 + disc - 1.0,
                                      1.0 / (tr / 2.0 - disc) - 1.0));
        }
        os << grid.r_levels[lv] << ',' << worst << ',' << beta[lv] << '\n';
    }
}

}  // namespace singsurf
