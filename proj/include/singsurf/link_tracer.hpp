#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "singsurf/surface.hpp"

namespace singsurf {

// One connected component of the link {f = 0} intersected with the sphere
// of (Euclidean) radius r around the distinguished point. Points form a
// closed polyline; the wrap-around segment is implicit.
struct LinkCurve {
    int component_id = 0;
    double r = 0;
    std::vector<Eigen::Vector3d> points;
    std::vector<Eigen::Vector3d> tangents;  // unit tangents, same indexing
    double length = 0;                      // length in the ambient metric
    double residual = 0;                    // max on-curve defect, relative to r
    Eigen::Vector3d centroid_dir = Eigen::Vector3d::Zero();  // from center p
};

struct TraceOptions {
    double angle_step = 0.035;   // target tangent turning per step (radians)
    int max_steps = 200000;      // per component
    int seed_grid = 24;          // seeds per sphere direction
    double corrector_tol = 1e-13;
};

struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unit tangent t and its arclength derivative for the link curve through x;
// the tangent field is grad f x (x - p), normalized.
void link_frame(const SurfaceEval& eval, const Eigen::Vector3d& p,
                const Eigen::Vector3d& x, Eigen::Vector3d& t,
                Eigen::Vector3d& dtds);

// Traces every component of the link at radius r. Components are sorted by
// centroid direction (descending z, then y, then x) and numbered from 0.
std::vector<LinkCurve> trace_link(const ImplicitSurfaceSpec& spec, double r,
                                  const TraceOptions& opts = {});

// Length of the closed polyline in the ambient metric, with the circular-arc
// chord correction chord * (1 + psi^2 / 24).
double curve_length(const LinkCurve& curve, const AmbientMetric& metric);

// Link lengths over a geometric radius grid. Component ids are kept stable
// across rows by matching centroid directions to the previous row.
struct LengthTable {
    std::vector<double> radii;
    std::vector<std::vector<LinkCurve>> rows;  // rows[i]: components at radii[i]
};

LengthTable length_table(const ImplicitSurfaceSpec& spec, double r_lo,
                         double r_hi, int n, const TraceOptions& opts = {});

// Columns: r, component_id, length, residual.
void write_length_csv(std::ostream& os, const LengthTable& table);

// Largest radius <= r_start at which tracing succeeds with a component count
// that stays constant down to r/8.
double estimate_eps0(const ImplicitSurfaceSpec& spec, double r_start);

}  // namespace singsurf
