#include "singsurf/curvature.hpp"

#include "singsurf/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace singsurf {

namespace {

Eigen::Matrix3d adjugate(const Eigen::Matrix3d& m) {
    Eigen::Matrix3d a;
    a.row(0) = m.col(1).cross(m.col(2));
    a.row(1) = m.col(2).cross(m.col(0));
    a.row(2) = m.col(0).cross(m.col(1));
    return a;
}

double aitken(const std::vector<double>& v) {
    if (v.size() < 3) return v.back();
    double d2 = v[v.size() - 1] - v[v.size() - 2];
    double d1 = v[v.size() - 2] - v[v.size() - 3];
    double den = d2 - d1;
    if (std::abs(den) < 1e-14 * (std::abs(d1) + std::abs(d2)) || den == 0.0)
        return v.back();
    double ext = v.back() - d2 * d2 / den;
    // Reject wild extrapolations when the sequence is not geometric.
    if (std::abs(ext - v.back()) > 2.0 * std::abs(d2) + 1e-12) return v.back();
    return ext;
}

// --- 2-D profile tracing in the half-plane {y = 0, x >= 0} -----------------

struct Profile2D {
    const SurfaceEval* eval;
    Eigen::Vector2d p2;  // center projected to the half-plane (on the axis)

    double g(const Eigen::Vector2d& q) const {
        return eval->f({q.x(), 0.0, q.y()});
    }
    Eigen::Vector2d grad(const Eigen::Vector2d& q) const {
        Eigen::Vector3d G = eval->grad({q.x(), 0.0, q.y()});
        return {G.x(), G.z()};
    }
    Eigen::Matrix2d hess(const Eigen::Vector2d& q) const {
        Eigen::Matrix3d H = eval->hess({q.x(), 0.0, q.y()});
        Eigen::Matrix2d h;
        h << H(0, 0), H(0, 2), H(2, 0), H(2, 2);
        return h;
    }

    void correct(Eigen::Vector2d& q) const {
        for (int it = 0; it < 30; ++it) {
            Eigen::Vector2d G = grad(q);
            double n2 = G.squaredNorm();
            if (n2 < 1e-24) throw CurvatureError("profile gradient vanished");
            Eigen::Vector2d d = -g(q) / n2 * G;
            q += d;
            if (d.norm() < 1e-14 * (1.0 + q.norm())) return;
        }
        throw CurvatureError("profile correction failed");
    }

    // Projects onto {g = 0} n {|q - p2| = r}.
    void correct_to_circle(Eigen::Vector2d& q, double r) const {
        for (int it = 0; it < 40; ++it) {
            Eigen::Vector2d u = (q - p2) / r;
            Eigen::Vector2d F(g(q), 0.5 * r * (u.squaredNorm() - 1.0));
            Eigen::Matrix2d J;
            J.row(0) = grad(q).transpose();
            J.row(1) = u.transpose();
            Eigen::Vector2d d = J.partialPivLu().solve(-F);
            if (!d.allFinite()) throw CurvatureError("profile seed diverged");
            q += d;
            if (d.norm() < 1e-13 * r) return;
        }
        throw CurvatureError("profile seed did not converge");
    }

    Eigen::Vector2d tangent(const Eigen::Vector2d& q) const {
        Eigen::Vector2d G = grad(q);
        Eigen::Vector2d t(-G.y(), G.x());
        double n = t.norm();
        if (n < 1e-14) throw CurvatureError("profile gradient vanished");
        return t / n;
    }
};

struct ProfileEnd {
    bool on_axis = false;
    bool truncated = false;
    double rho_prime = 0;  // drho/ds in the direction of travel, at the end
};

// Traces from `start` in direction `dir` until the axis, the exclusion
// circle, or the truncation radius; returns the polyline (including start).
ProfileEnd trace_profile(const Profile2D& pr, Eigen::Vector2d start,
                         Eigen::Vector2d dir, double eps_excl, double r_stop,
                         std::vector<Eigen::Vector2d>& out) {
    out.clear();
    out.push_back(start);
    Eigen::Vector2d q = start;
    Eigen::Vector2d t = dir.normalized();
    ProfileEnd end;
    for (int step = 0; step < 400000; ++step) {
        double kappa = std::abs(t.dot(pr.hess(q) * t)) / pr.grad(q).norm();
        double r_loc = (q - pr.p2).norm();
        double h = std::min(0.01 * std::max(r_loc, 0.05),
                            0.2 / std::max(kappa, 1e-3));
        h = std::max(h, 1e-7);
        Eigen::Vector2d qn = q + h * t;
        pr.correct(qn);
        Eigen::Vector2d tn = pr.tangent(qn);
        if (tn.dot(t) < 0) tn = -tn;

        if (qn.x() <= 1e-6) {  // hit the rotation axis: finish at x = 0
            double lam = t.x() != 0.0 ? -q.x() / t.x() : 0.0;
            Eigen::Vector2d axis_pt = q + lam * t;
            axis_pt.x() = 0.0;
            for (int it = 0; it < 30; ++it) {  // 1-D Newton in z on the axis
                double val = pr.g(axis_pt);
                double dz = pr.grad(axis_pt).y();
                if (std::abs(dz) < 1e-12) break;
                axis_pt.y() -= val / dz;
                if (std::abs(val) < 1e-14) break;
            }
            out.push_back(axis_pt);
            end.on_axis = true;
            end.rho_prime = t.x();
            return end;
        }
        double rn = (qn - pr.p2).norm();
        if (eps_excl > 0 && rn <= eps_excl) {
            pr.correct_to_circle(qn, eps_excl);
            out.push_back(qn);
            end.rho_prime = tn.x();
            return end;
        }
        if (rn >= r_stop) {
            pr.correct_to_circle(qn, r_stop);
            out.push_back(qn);
            end.truncated = true;
            end.rho_prime = tn.x();
            return end;
        }
        out.push_back(qn);
        q = qn;
        t = tn;
    }
    throw CurvatureError("profile trace exhausted its step budget");
}

}  // namespace

double gauss_curvature(const ImplicitSurfaceSpec& spec, const Eigen::Vector3d& x) {
    if (!spec.metric.is_euclidean())
        throw CurvatureError("curvature requires the Euclidean ambient metric");
    Eigen::Vector3d g = spec.eval->grad(x);
    double n2 = g.squaredNorm();
    if (n2 < 1e-14)
        throw CurvatureError("gradient too small (too near the singular point)");
    Eigen::Matrix3d H = spec.eval->hess(x);
    return g.dot(adjugate(H) * g) / (n2 * n2);
}

double integrate_K(const ImplicitSurfaceSpec& spec, int component, double eps,
                   double eps0, int n_levels, int theta_count) {
    if (!(0 < eps && eps < eps0)) throw CurvatureError("need 0 < eps < eps0");
    if (n_levels < 5) throw CurvatureError("need at least 5 r-levels");
    std::vector<double> levels;
    double ratio = std::pow(eps / eps0, 1.0 / (n_levels - 1));
    for (int i = 0; i < n_levels; ++i) levels.push_back(eps0 * std::pow(ratio, i));
    levels.back() = eps;
    auto grid = build_phi_grid(spec, component, levels, theta_count);

    // Per-level theta integral of K sqrt(det g), on interior levels.
    const double dth = 2.0 * M_PI / theta_count;
    std::vector<double> node_r, node_f;
    for (std::size_t lv = 0; lv < grid.metric_cells.size(); ++lv) {
        if (grid.metric_cells[lv].empty()) continue;
        double acc = 0;
        for (int j = 0; j < theta_count; ++j) {
            const auto& cell = grid.metric_cells[lv][j];
            acc += gauss_curvature(spec, grid.points[lv][j]) *
                   std::sqrt(cell.a * cell.c - cell.b * cell.b);
        }
        node_r.push_back(levels[lv]);
        node_f.push_back(acc * dth);
    }
    if (node_r.size() < 3) throw CurvatureError("too few interior levels");

    // Linear extrapolation of the smooth integrand to the clipped endpoints.
    auto lin = [](double r, double r1, double f1, double r2, double f2) {
        return f1 + (f2 - f1) * (r - r1) / (r2 - r1);
    };
    std::vector<double> rr, ff;
    rr.push_back(eps0);
    ff.push_back(lin(eps0, node_r[0], node_f[0], node_r[1], node_f[1]));
    rr.insert(rr.end(), node_r.begin(), node_r.end());
    ff.insert(ff.end(), node_f.begin(), node_f.end());
    std::size_t n = node_r.size();
    rr.push_back(eps);
    ff.push_back(lin(eps, node_r[n - 1], node_f[n - 1], node_r[n - 2], node_f[n - 2]));

    double total = 0;  // rr is descending
    for (std::size_t i = 0; i + 1 < rr.size(); ++i)
        total += 0.5 * (ff[i] + ff[i + 1]) * (rr[i] - rr[i + 1]);
    return total;
}

ConvergenceTable integrate_K_sequence(const ImplicitSurfaceSpec& spec,
                                      int component,
                                      const std::vector<double>& eps_list,
                                      double eps0, int n_levels, int theta_count) {
    if (eps_list.empty()) throw CurvatureError("empty eps sequence");
    ConvergenceTable t;
    t.eps = eps_list;
    std::sort(t.eps.rbegin(), t.eps.rend());
    for (double e : t.eps)
        t.value.push_back(integrate_K(spec, component, e, eps0, n_levels, theta_count));
    t.extrapolated = aitken(t.value);
    return t;
}

ProfileKReport integrate_K_profile(const ImplicitSurfaceSpec& spec,
                                   double eps_excl, double r_stop) {
    if (!spec.revolution)
        throw CurvatureError("profile quadrature needs a surface of revolution");
    if (!spec.metric.is_euclidean())
        throw CurvatureError("curvature requires the Euclidean ambient metric");
    const Eigen::Vector3d p = spec.point();
    if (p.head<2>().norm() > 1e-12)
        throw CurvatureError("center must lie on the rotation axis");
    Profile2D pr{spec.eval.get(), {0.0, p.z()}};

    // One seed per link component, on the profile half-plane.
    double r_seed = spec.is_singular ? eps_excl : 0.5 * spec.eps0;
    if (!(r_seed > 0)) throw CurvatureError("need a positive seed radius");
    auto comps = trace_link(spec, r_seed);
    std::vector<Eigen::Vector2d> seeds;
    for (const auto& c : comps) {
        const std::size_t N = c.points.size();
        for (std::size_t i = 0; i < N; ++i) {
            const Eigen::Vector3d& a = c.points[i];
            const Eigen::Vector3d& b = c.points[(i + 1) % N];
            if (!((a.y() < 0) != (b.y() < 0)) || a.x() + b.x() <= 0) continue;
            double u = a.y() / (a.y() - b.y());
            Eigen::Vector3d mid = a + u * (b - a);
            Eigen::Vector2d s(mid.x(), mid.z());
            pr.correct_to_circle(s, r_seed);
            seeds.push_back(s);
            break;
        }
    }
    if (seeds.size() != comps.size())
        throw CurvatureError("profile seed not found for every component");

    ProfileKReport rep;
    rep.components = static_cast<int>(seeds.size());
    auto integrate_polyline = [&](const std::vector<Eigen::Vector2d>& pts) {
        double acc = 0;
        auto f = [&](const Eigen::Vector2d& q) {
            return gauss_curvature(spec, {q.x(), 0.0, q.y()}) * 2.0 * M_PI * q.x();
        };
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            acc += 0.5 * (f(pts[i]) + f(pts[i + 1])) * (pts[i + 1] - pts[i]).norm();
        return acc;
    };

    std::vector<Eigen::Vector2d> pts;
    for (const auto& s : seeds) {
        Eigen::Vector2d t0 = pr.tangent(s);
        if (spec.is_singular) {
            // Outward only: the inward side is the excluded disk.
            if ((s - pr.p2).dot(t0) < 0) t0 = -t0;
            auto end = trace_profile(pr, s, t0, eps_excl, r_stop, pts);
            rep.traced += integrate_polyline(pts);
            if (end.truncated) {
                rep.cap_term += 2.0 * M_PI * (1.0 + end.rho_prime);
                ++rep.caps;
            }
        } else {
            for (int sgn : {1, -1}) {
                auto end = trace_profile(pr, s, sgn * t0, eps_excl, r_stop, pts);
                rep.traced += integrate_polyline(pts);
                if (end.truncated) {
                    rep.cap_term += 2.0 * M_PI * (1.0 + end.rho_prime);
                    ++rep.caps;
                }
            }
        }
    }
    rep.int_K = rep.traced + rep.cap_term;
    return rep;
}

std::pair<double, double> geodesic_kappa(const LinkCurve& link,
                                         const ImplicitSurfaceSpec& spec) {
    if (!spec.metric.is_euclidean())
        throw CurvatureError("curvature requires the Euclidean ambient metric");
    if (link.points.size() < 32)
        throw CurvatureError("link resolution too coarse for curvature");
    const Eigen::Vector3d p = spec.point();
    const std::size_t N = link.points.size();
    double signed_sum = 0, abs_sum = 0;
    for (std::size_t i = 0; i < N; ++i) {
        const Eigen::Vector3d& x = link.points[i];
        Eigen::Vector3d t, dtds;
        link_frame(*spec.eval, p, x, t, dtds);
        Eigen::Vector3d n = spec.eval->grad(x).normalized();
        Eigen::Vector3d u = n.cross(t);
        if (u.dot(p - x) < 0) u = -u;  // in-surface normal toward p
        double kappa = dtds.dot(u);
        double w = 0.5 * ((link.points[(i + 1) % N] - x).norm() +
                          (x - link.points[(i + N - 1) % N]).norm());
        signed_sum += kappa * w;
        abs_sum += std::abs(kappa) * w;
    }
    return {signed_sum, abs_sum};
}

double classical_gb_residual(const ImplicitSurfaceSpec& spec, int component,
                             double eps, double eps0, int n_levels,
                             int theta_count) {
    double int_K = integrate_K(spec, component, eps, eps0, n_levels, theta_count);
    auto outer = trace_link(spec, eps0);
    auto inner = trace_link(spec, eps);
    std::size_t c = static_cast<std::size_t>(component);
    if (c >= outer.size() || c >= inner.size())
        throw CurvatureError("component missing at a boundary radius");
    double gk_outer = geodesic_kappa(outer[c], spec).first;
    double gk_inner = geodesic_kappa(inner[c], spec).first;
    // chi(annulus) = 0 = (1/2pi) int K + (1/2pi)(kappa_outer - kappa_inner),
    // with kappa per link measured toward p: at the outer boundary that is
    // the annulus-inward... (standard orientation bookkeeping; the cone gives
    // 0 = 0 + sqrt(2)pi/2pi - sqrt(2)pi/2pi).
    return std::abs(int_K / (2.0 * M_PI) +
                    (gk_outer - gk_inner) / (2.0 * M_PI));
}

double l2_euler(int N, double int_K, double l_sum) {
    return N + int_K / (2.0 * M_PI) - l_sum / (2.0 * M_PI);
}

GBReport singular_gb(const ImplicitSurfaceSpec& spec,
                     const std::vector<AsymptoticExpansion>& expansions,
                     const std::vector<double>& eps_list, double r_stop) {
    if (!spec.euler_char)
        throw CurvatureError("surface lacks euler_char metadata");
    if (expansions.empty() && spec.is_singular)
        throw CurvatureError("no fitted expansions");
    if (eps_list.empty()) throw CurvatureError("empty eps sequence");

    GBReport rep;
    rep.chi = *spec.euler_char;
    rep.R = spec.num_singular_points;
    rep.N = static_cast<int>(expansions.size());
    rep.table.eps = eps_list;
    std::sort(rep.table.eps.rbegin(), rep.table.eps.rend());
    for (double e : rep.table.eps)
        rep.table.value.push_back(
            integrate_K_profile(spec, spec.is_singular ? e : 0.0, r_stop).int_K);
    rep.table.extrapolated = aitken(rep.table.value);
    rep.int_K = rep.table.extrapolated;
    rep.eps = rep.table.eps.back();

    for (const auto& e : expansions)
        if (std::abs(e.gamma - 1.0) <= 0.05) rep.l_sum += e.lead_coeff;

    rep.chi_singular_residual =
        std::abs(rep.chi - rep.R - rep.int_K / (2.0 * M_PI) +
                 rep.l_sum / (2.0 * M_PI));
    rep.chi_l2 = l2_euler(rep.N, rep.int_K, rep.l_sum);
    rep.chi2_consistency = (rep.chi_l2 - rep.chi) - (rep.N - rep.R);

    if (spec.is_singular) {
        auto links = trace_link(spec, rep.eps);
        for (const auto& link : links) {
            auto [sk, ak] = geodesic_kappa(link, spec);
            rep.boundary_kappa.push_back(sk);
            rep.abs_kappa.push_back(ak);
        }
        rep.chi_classical_residual = classical_gb_residual(
            spec, 0, rep.eps, 0.75 * spec.eps0, 17, 48);
    } else {
        auto links = trace_link(spec, 0.5 * spec.eps0);
        for (const auto& link : links) {
            auto [sk, ak] = geodesic_kappa(link, spec);
            rep.boundary_kappa.push_back(sk);
            rep.abs_kappa.push_back(ak);
        }
        rep.chi_classical_residual = classical_gb_residual(
            spec, 0, 0.25 * spec.eps0, 0.75 * spec.eps0, 17, 48);
    }
    return rep;
}

void write_gb_text(std::ostream& os, const GBReport& rep) {
    os << "gauss-bonnet report\n";
    os << "  eps                  " << rep.eps << "\n";
    os << "  chi (catalog)        " << rep.chi << "\n";
    os << "  R                    " << rep.R << "\n";
    os << "  N                    " << rep.N << "\n";
    os << "  int K (extrapolated) " << rep.int_K << "\n";
    os << "  sum l_i (cone-like)  " << rep.l_sum << "\n";
    for (std::size_t i = 0; i < rep.boundary_kappa.size(); ++i)
        os << "  component " << i << ": int kappa = " << rep.boundary_kappa[i]
           << ", int |kappa| = " << rep.abs_kappa[i] << "\n";
    os << "  classical residual   " << rep.chi_classical_residual << "\n";
    os << "  singular residual    " << rep.chi_singular_residual << "\n";
    os << "  chi_(2)              " << rep.chi_l2 << "\n";
    os << "  chi_(2) consistency  " << rep.chi2_consistency << "\n";
}

void write_convergence_csv(std::ostream& os, const ConvergenceTable& t) {
    os << "eps,int_K\n";
    os.precision(17);
    for (std::size_t i = 0; i < t.eps.size(); ++i)
        os << t.eps[i] << ',' << t.value[i] << '\n';
}

}  // namespace singsurf
