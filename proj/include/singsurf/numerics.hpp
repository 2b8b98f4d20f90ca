#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace singsurf {

// C^2 cutoff profile: 1 on [0, inner], 0 on [outer, inf), quintic smoothstep
// transition in between.
class Bump {
public:
    Bump(double inner, double outer) : inner_(inner), outer_(outer) {
        if (!(inner > 0 && outer > inner))
            throw std::invalid_argument("bump: need 0 < inner < outer");
    }

    double inner() const { return inner_; }
    double outer() const { return outer_; }

    double operator()(double t) const {
        t = t < 0 ? -t : t;
        if (t <= inner_) return 1.0;
        if (t >= outer_) return 0.0;
        double u = (t - inner_) / (outer_ - inner_);
        return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
    }

    // Radial product form used for 2-D cutoffs.
    double radial(double x, double y) const;

private:
    double inner_, outer_;
};

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive Simpson quadrature with relative target accuracy.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, int max_depth = 50);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

double gauss_integrate(const std::function<double(double)>& f, double a, double b,
                       int n_nodes, int n_panels);

// Natural cubic spline through strictly increasing abscissae.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double operator()(double t) const;
    double derivative(double t) const;
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    std::size_t segment(double t) const;
    std::vector<double> x_, y_, m_;  // m_: second derivatives at knots
};

// Least-squares line through (x_i, y_i); returns {slope, intercept}.
std::pair<double, double> linear_fit(const std::vector<double>& x,
                                     const std::vector<double>& y);

}  // namespace singsurf
