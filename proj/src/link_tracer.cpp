#include "singsurf/link_tracer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace singsurf {

namespace {

struct Corrector {
    const SurfaceEval& eval;
    Eigen::Vector3d p;
    double r;
    double tol;

    // Gauss-Newton minimum-norm projection onto {f = 0} n {|x-p| = r}.
    // Returns false when the step iteration does not settle.
    bool project(Eigen::Vector3d& x) const {
        for (int it = 0; it < 60; ++it) {
            Eigen::Vector3d u = (x - p) / r;
            Eigen::Vector2d F(eval.f(x), 0.5 * r * (u.squaredNorm() - 1.0));
            Eigen::Matrix<double, 2, 3> J;
            J.row(0) = eval.grad(x);
            J.row(1) = u;
            Eigen::Matrix2d JJt = J * J.transpose();
            if (std::abs(JJt.determinant()) <
                1e-24 * std::max(1.0, JJt(0, 0) * JJt(1, 1)))
                return false;
            Eigen::Vector3d d = -J.transpose() * JJt.inverse() * F;
            if (!d.allFinite() || d.norm() > 0.5 * r) return false;
            x += d;
            if (d.norm() <= tol * r) return true;
        }
        return false;
    }

    // Relative on-curve defect at x.
    double residual(const Eigen::Vector3d& x) const {
        double g = eval.grad(x).norm();
        double rf = std::abs(eval.f(x)) / std::max(g, 1e-300);
        return (rf + std::abs((x - p).norm() - r)) / r;
    }
};

double max_segment(const LinkCurve& c) {
    double m = 0;
    for (std::size_t i = 0; i < c.points.size(); ++i)
        m = std::max(m, (c.points[(i + 1) % c.points.size()] - c.points[i]).norm());
    return m;
}

double min_distance(const LinkCurve& c, const Eigen::Vector3d& x) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& q : c.points) m = std::min(m, (q - x).norm());
    return m;
}

LinkCurve trace_component(const ImplicitSurfaceSpec& spec, double r,
                          const Eigen::Vector3d& start, const TraceOptions& opts) {
    const SurfaceEval& eval = *spec.eval;
    const Eigen::Vector3d p = spec.point();
    Corrector corr{eval, p, r, opts.corrector_tol};

    LinkCurve curve;
    curve.r = r;

    Eigen::Vector3d x = start;
    Eigen::Vector3d t0, t, dtds;
    link_frame(eval, p, x, t0, dtds);
    t = t0;

    double h = opts.angle_step / std::max(dtds.norm(), 1.0 / r);
    for (int step = 0; step < opts.max_steps; ++step) {
        curve.points.push_back(x);
        curve.tangents.push_back(t);
        curve.residual = std::max(curve.residual, corr.residual(x));

        bool advanced = false;
        for (int attempt = 0; attempt < 30 && !advanced; ++attempt) {
            Eigen::Vector3d xn = x + h * t;
            if (corr.project(xn) && (xn - x).norm() <= 2.0 * h &&
                (xn - x).norm() >= 0.1 * h) {
                Eigen::Vector3d tn, dn;
                link_frame(eval, p, xn, tn, dn);
                if (tn.dot(t) > 0.5) {
                    x = xn;
                    t = tn;
                    dtds = dn;
                    advanced = true;
                    break;
                }
            }
            h *= 0.5;
        }
        if (!advanced) throw TraceError("trace_link: continuation stalled");

        h = std::min(opts.angle_step / std::max(dtds.norm(), 1e-300), 0.2 * r);

        if (step >= 10 && (x - curve.points.front()).norm() < 1.5 * h &&
            t.dot(t0) > 0.9)
            break;  // closed up; the wrap segment finishes the loop
        if (step + 1 == opts.max_steps)
            throw TraceError("trace_link: loop did not close");
    }

    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const auto& q : curve.points) c += q;
    c = c / static_cast<double>(curve.points.size()) - p;
    curve.centroid_dir = c.norm() > 1e-12 * r ? c.normalized() : Eigen::Vector3d::Zero();
    curve.length = curve_length(curve, spec.metric);
    return curve;
}

}  // namespace

void link_frame(const SurfaceEval& eval, const Eigen::Vector3d& p,
                const Eigen::Vector3d& x, Eigen::Vector3d& t,
                Eigen::Vector3d& dtds) {
    Eigen::Vector3d g = eval.grad(x);
    Eigen::Vector3d w = g.cross(x - p);
    double wn = w.norm();
    if (wn <= 1e-300) throw TraceError("link_frame: tangent field degenerates");
    t = w / wn;
    // dw/ds = (H t) x (x - p) + g x t; project out the tangential part.
    Eigen::Vector3d dw = (eval.hess(x) * t).cross(x - p) + g.cross(t);
    dtds = (dw - t * t.dot(dw)) / wn;
}

double curve_length(const LinkCurve& curve, const AmbientMetric& metric) {
    const std::size_t n = curve.points.size();
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d& a = curve.points[i];
        const Eigen::Vector3d& b = curve.points[(i + 1) % n];
        Eigen::Vector3d d = b - a;
        double chord = std::sqrt(metric.norm2(0.5 * (a + b), d));
        double cosp = std::clamp(curve.tangents[i].dot(curve.tangents[(i + 1) % n]),
                                 -1.0, 1.0);
        double psi = std::acos(cosp);
        total += chord * (1.0 + psi * psi / 24.0);
    }
    return total;
}

std::vector<LinkCurve> trace_link(const ImplicitSurfaceSpec& spec, double r,
                                  const TraceOptions& opts) {
    if (!(r > 0)) throw TraceError("trace_link: radius must be positive");
    if (!spec.eval) throw TraceError("trace_link: surface has no compiled evaluator");
    const Eigen::Vector3d p = spec.point();
    Corrector corr{*spec.eval, p, r, opts.corrector_tol};

    std::vector<LinkCurve> components;
    const int n = opts.seed_grid;
    for (int i = 0; i < n; ++i) {
        // Offset latitudes avoid the poles, where the sphere grid degenerates.
        double theta = M_PI * (i + 0.5) / n;
        for (int j = 0; j < 2 * n; ++j) {
            double phi = M_PI * j / n;
            Eigen::Vector3d seed =
                p + r * Eigen::Vector3d(std::sin(theta) * std::cos(phi),
                                        std::sin(theta) * std::sin(phi),
                                        std::cos(theta));
            if (!corr.project(seed)) continue;
            if (corr.residual(seed) > 1e-8) continue;

            bool known = false;
            for (const auto& comp : components)
                if (min_distance(comp, seed) < 2.0 * max_segment(comp)) known = true;
            if (known) continue;

            components.push_back(trace_component(spec, r, seed, opts));
        }
    }

    std::sort(components.begin(), components.end(),
              [](const LinkCurve& a, const LinkCurve& b) {
                  if (a.centroid_dir.z() != b.centroid_dir.z())
                      return a.centroid_dir.z() > b.centroid_dir.z();
                  if (a.centroid_dir.y() != b.centroid_dir.y())
                      return a.centroid_dir.y() > b.centroid_dir.y();
                  return a.centroid_dir.x() > b.centroid_dir.x();
              });
    for (std::size_t k = 0; k < components.size(); ++k)
        components[k].component_id = static_cast<int>(k);
    return components;
}

LengthTable length_table(const ImplicitSurfaceSpec& spec, double r_lo,
                         double r_hi, int n, const TraceOptions& opts) {
    if (!(0 < r_lo && r_lo <= r_hi) || n < 1)
        throw TraceError("length_table: bad radius grid");
    LengthTable table;
    for (int i = 0; i < n; ++i) {
        double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        double r = r_hi * std::pow(r_lo / r_hi, t);  // descending geometric grid
        auto comps = trace_link(spec, r, opts);

        if (!table.rows.empty()) {
            // Keep ids stable: match each component to the previous row by
            // centroid direction.
            const auto& prev = table.rows.back();
            for (auto& c : comps) {
                double best = -2;
                int id = c.component_id + static_cast<int>(prev.size());
                for (const auto& q : prev) {
                    double d = c.centroid_dir.dot(q.centroid_dir);
                    if (d > best) {
                        best = d;
                        id = q.component_id;
                    }
                }
                if (best > 0.5) c.component_id = id;
            }
            std::sort(comps.begin(), comps.end(),
                      [](const LinkCurve& a, const LinkCurve& b) {
                          return a.component_id < b.component_id;
                      });
        }
        table.radii.push_back(r);
        table.rows.push_back(std::move(comps));
    }
    return table;
}

void write_length_csv(std::ostream& os, const LengthTable& table) {
    os << "r,component_id,length,residual\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        for (const auto& c : table.rows[i]) {
            os.precision(17);
            os << table.radii[i] << ',' << c.component_id << ',' << c.length << ','
               << c.residual << '\n';
        }
}

double estimate_eps0(const ImplicitSurfaceSpec& spec, double r_start) {
    double eps = r_start;
    for (int attempt = 0; attempt < 20; ++attempt, eps *= 0.5) {
        try {
            std::size_t n0 = trace_link(spec, eps).size();
            if (n0 == 0) continue;
            bool stable = true;
            for (double f : {0.5, 0.25, 0.125})
                if (trace_link(spec, eps * f).size() != n0) stable = false;
            if (stable) return eps;
        } catch (const TraceError&) {
        }
    }
    throw TraceError("estimate_eps0: no stable radius found");
}

}  // namespace singsurf
