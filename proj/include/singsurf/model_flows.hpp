#pragma once

#include <optional>
#include <utility>

#include "singsurf/metric.hpp"
#include "singsurf/numerics.hpp"

namespace singsurf {

// The model family x^a y^b = r in the plane, with a semi-Riemannian metric
// and a cutoff; everything the hyperbola-flow analysis needs.
struct ModelFamily {
    int a = 1;
    int b = 1;
    SemiRiemannianMetric2D metric = SemiRiemannianMetric2D::euclidean();
    Bump cutoff{0.5, 1.0};
};

// Point on the first-quadrant branch with x - y = s, x^a y^b = r.
// Axis cases use the explicit branches (s, r^{1/b}) and (r^{1/a}, s).
std::pair<double, double> hyperbola_point(int a, int b, double r, double s);

// Common derivative x_r = y_r of the interior-family parametrization at
// (x, y); requires a, b >= 1 and x, y > 0.
double flow_derivative(int a, int b, double x, double y);

// Euclidean |Psi_r| at the family point with x - y = s, covering axis
// branches.
double model_psi_r_norm(int a, int b, double r, double s);

struct ModelBoundReport {
    double max_scaled = 0.0;  // sup of |Psi_r| * r^{1 - 1/(a+b)} on the grid
    bool pass = false;        // max_scaled <= 1 + 1e-9
};

// Sweeps an n_r x n_s grid with r log-spaced in [r_lo, r_hi] subset (0,1)
// and |x| + |y| < A, and checks the derivative bound.
ModelBoundReport verify_model_bound(int a, int b, int n_r, int n_s,
                                    double r_lo = 1e-6, double r_hi = 0.99,
                                    double A = 2.0);

// Cutoff-weighted length of the level curve x^a y^b = r (first-quadrant
// branch times `quadrants`), to relative accuracy ~1e-8.
double weighted_length(const ModelFamily& family, double r, int quadrants = 1);

// Compares the measure |psi_s|_h ds dr/r against |(bx,-ay)|_h dx/x dy/y over
// the (x, y) box [x1,x2] x [y1,y2]; returns the relative difference, or
// nullopt when an axis case (a = 0 or b = 0) makes the identity inapplicable.
std::optional<double> measure_identity_check(const ModelFamily& family,
                                             double x1, double x2,
                                             double y1, double y2);

}  // namespace singsurf
