#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "singsurf/quasi_iso.hpp"

namespace singsurf {

struct CurvatureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Gauss curvature of the level set {f = 0} at a point with nonvanishing
// gradient, K = (grad f . adj(Hess f) . grad f) / |grad f|^4. Euclidean
// ambient metric only; analytic metrics are rejected.
double gauss_curvature(const ImplicitSurfaceSpec& spec, const Eigen::Vector3d& x);

// Integral of K over one link component's annulus {eps <= |x - p| <= eps0},
// by quadrature on the normalized grid parametrization (area element
// sqrt(ac - b^2) dr dtheta).
double integrate_K(const ImplicitSurfaceSpec& spec, int component, double eps,
                   double eps0, int n_levels, int theta_count);

struct ConvergenceTable {
    std::vector<double> eps;
    std::vector<double> value;
    double extrapolated = 0;
};

// Annulus integrals over a shrinking-eps sequence with Aitken extrapolation.
ConvergenceTable integrate_K_sequence(const ImplicitSurfaceSpec& spec,
                                      int component,
                                      const std::vector<double>& eps_list,
                                      double eps0, int n_levels, int theta_count);

// Full-surface integral of K for a surface of revolution, by tracing the
// profile in the half-plane {y = 0, x > 0} and integrating K 2 pi x ds.
// A disk of radius eps_excl around p is excluded when the surface is
// singular; profiles leaving |x - p| = r_stop are closed by a smooth virtual
// cap whose exact contribution 2 pi (1 + rho') is added to int_K.
struct ProfileKReport {
    double int_K = 0;    // traced + cap closures
    double traced = 0;   // quadrature over the traced profile only
    double cap_term = 0;
    int components = 0;
    int caps = 0;
};

ProfileKReport integrate_K_profile(const ImplicitSurfaceSpec& spec,
                                   double eps_excl, double r_stop);

// Signed and absolute geodesic curvature integrals (int kappa dsigma,
// int |kappa| dsigma) along a traced link, with kappa measured against the
// in-surface normal pointing toward p (so a planar circle gives +2 pi and a
// cone link gives its total turning sqrt(2) pi).
std::pair<double, double> geodesic_kappa(const LinkCurve& link,
                                         const ImplicitSurfaceSpec& spec);

// |chi(annulus)=0 minus (1/2pi) int K minus (1/2pi)(kappa_outer - kappa_inner)|
// on one component's annulus.
double classical_gb_residual(const ImplicitSurfaceSpec& spec, int component,
                             double eps, double eps0, int n_levels,
                             int theta_count);

// chi_(2) = N + (1/2pi) int_K - (1/2pi) l_sum.
double l2_euler(int N, double int_K, double l_sum);

struct GBReport {
    double eps = 0;                       // smallest eps of the sequence
    double int_K = 0;                     // full-surface integral over V_0
    std::vector<double> boundary_kappa;   // per component, at eps
    std::vector<double> abs_kappa;        // per component, at eps
    double chi_classical_residual = 0;
    double chi_singular_residual = 0;
    double chi_l2 = 0;
    int N = 0;                            // component (cone/horn) count
    int R = 0;                            // singular point count
    int chi = 0;
    double l_sum = 0;                     // sum of cone-like leading coeffs
    double chi2_consistency = 0;          // (chi_l2 - chi) - (N - R)
    ConvergenceTable table;               // int_K over the eps sequence
};

// Verifies chi(V) = R + (1/2pi) int K - (1/2pi) sum l_i on a catalog surface
// with euler_char metadata; l_i are leading coefficients of the cone-like
// (gamma = 1) components. int_K comes from the profile quadrature with the
// eps sequence extrapolated.
GBReport singular_gb(const ImplicitSurfaceSpec& spec,
                     const std::vector<AsymptoticExpansion>& expansions,
                     const std::vector<double>& eps_list, double r_stop = 40.0);

void write_gb_text(std::ostream& os, const GBReport& report);
void write_convergence_csv(std::ostream& os, const ConvergenceTable& table);

}  // namespace singsurf
