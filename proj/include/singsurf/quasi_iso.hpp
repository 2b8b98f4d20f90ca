#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "singsurf/link_tracer.hpp"
#include "singsurf/mellin.hpp"

namespace singsurf {

struct QiError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Normalized parametrization Phi(r, theta) of one link component: every grid
// point sits on the sphere of its level radius, and theta is arc length along
// the level normalized to [0, 2 pi).
struct QiGrid {
    struct Cell {
        double a = 1, b = 0, c = 1;  // pullback entries a dr^2 + 2b dr dth + c dth^2
        double r = 0;
    };

    int component_id = 0;
    std::vector<double> r_levels;  // decreasing
    int theta_count = 0;
    std::vector<std::vector<Eigen::Vector3d>> points;  // [level][theta]
    std::vector<std::vector<Cell>> metric_cells;       // [level][theta]
    std::vector<double> l_of_r;

    // Per-level measured speed |Phi_theta| (chord-corrected), for the
    // normalization invariant |Phi_theta| = l(r) / 2 pi.
    std::vector<double> speed_of_r;
};

QiGrid build_phi_grid(const ImplicitSurfaceSpec& spec, int component,
                      const std::vector<double>& r_levels, int theta_count,
                      const TraceOptions& opts = {});

// Smallest delta with (1+delta)^{-1} g~ <= g <= (1+delta) g~ over all cells
// with r <= eps, where g~ = dr^2 + (l(r)/2pi)^2 dtheta^2.
double qi_defect(const QiGrid& grid, double eps);

// Margins of the cellwise sandwich (1-T) diag(a,c) <= g <= (1+T) diag(a,c)
// with T = |b|/sqrt(ac); both are >= 0 up to roundoff by construction.
std::pair<double, double> sandwich_margins(const QiGrid::Cell& cell);

struct QiDefectCurve {
    std::vector<std::pair<double, double>> samples;  // (eps, delta)
    double C = 0;
    double alpha = 0;
    bool noise_floor = false;
    bool pass = false;
};

// Log-log regression of delta = C eps^alpha. Deltas at the numeric noise
// floor count as PASS with the floor reported.
QiDefectCurve fit_alpha(const std::vector<std::pair<double, double>>& samples);

// Per-level max |beta - pi/2| where cos(beta) = b / sqrt(ac).
std::vector<double> radial_angle_profile(const QiGrid& grid);

struct ComponentClass {
    int component_id = 0;
    bool is_cone = false;
    Rational gamma{1};
    double gamma_raw = 0;
    bool snapped = false;   // gamma_raw was within 0.05 of the lattice
    bool anomaly = false;   // gamma below 1 beyond tolerance
};

struct Decomposition {
    std::vector<ComponentClass> components;
    int N = 0;
};

// One expansion per link component; lattice_m from the resolver (or 1).
Decomposition classify(const std::vector<AsymptoticExpansion>& expansions,
                       int lattice_m);

std::string decomposition_to_text(const Decomposition& d);

struct LedgerCheck {
    double measured_delta = 0;
    double bound = 0;
    bool pass = false;
};

// Measured defect against the chart-count bound C0 (6 + 4 k (6 + 2 C1)).
LedgerCheck constant_ledger_check(const QiGrid& grid, double C0, double C1, int k);

// Columns: eps, delta, beta_max.
void write_defect_csv(std::ostream& os, const QiGrid& grid);

}  // namespace singsurf
