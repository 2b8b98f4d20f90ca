#include "singsurf/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace singsurf {

double Bump::radial(double x, double y) const {
    return (*this)(std::hypot(x, y));
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa,
                     double b, double fb, double fm, double whole, double tol,
                     int depth, int min_depth, bool& converged) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(f, a, fa, m, fm, flm);
    double right = simpson(f, m, fm, b, fb, frm);
    double diff = left + right - whole;
    // A few levels are always forced, so that symmetric integrands cannot
    // fool the error estimate at the first sample points.
    if ((std::abs(diff) <= 15.0 * tol && min_depth <= 0) || depth <= 0) {
        if (depth <= 0 && std::abs(diff) > 15.0 * tol) converged = false;
        return left + right + diff / 15.0;
    }
    return adaptive_step(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1,
                         min_depth - 1, converged) +
           adaptive_step(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1,
                         min_depth - 1, converged);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, int max_depth) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = simpson(f, a, fa, b, fb, fm);
    // Two passes: the first estimates the magnitude that "relative" refers to.
    double scale = std::max(std::abs(whole), 1e-300);
    bool converged = true;
    double v = adaptive_step(f, a, fa, b, fb, fm, whole, rel_tol * scale, max_depth,
                             4, converged);
    if (!converged) throw QuadratureError("adaptive quadrature did not converge");
    return v;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
}

double gauss_integrate(const std::function<double(double)>& f, double a, double b,
                       int n_nodes, int n_panels) {
    std::vector<double> xs, ws;
    gauss_legendre(n_nodes, xs, ws);
    double total = 0.0;
    for (int p = 0; p < n_panels; ++p) {
        double pa = a + (b - a) * p / n_panels;
        double pb = a + (b - a) * (p + 1) / n_panels;
        double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
        for (std::size_t i = 0; i < xs.size(); ++i)
            total += ws[i] * half * f(mid + half * xs[i]);
    }
    return total;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    std::size_t n = x_.size();
    if (n < 3 || y_.size() != n)
        throw std::invalid_argument("spline: need >= 3 matching points");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1]))
            throw std::invalid_argument("spline: abscissae must increase");
    // Tridiagonal solve for natural boundary conditions.
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
    b[0] = b[n - 1] = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
        a[i] = h0;
        b[i] = 2.0 * (h0 + h1);
        c[i] = h1;
        d[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    m_.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    m_[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
}

std::size_t CubicSpline::segment(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
        0, std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(x_.size()) - 2,
                                    (it - x_.begin()) - 1)));
    return i;
}

double CubicSpline::operator()(double t) const {
    std::size_t i = segment(t);
    double h = x_[i + 1] - x_[i];
    double A = (x_[i + 1] - t) / h, B = (t - x_[i]) / h;
    return A * y_[i] + B * y_[i + 1] +
           ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double t) const {
    std::size_t i = segment(t);
    double h = x_[i + 1] - x_[i];
    double A = (x_[i + 1] - t) / h, B = (t - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h +
           ((3.0 * B * B - 1.0) * m_[i + 1] - (3.0 * A * A - 1.0) * m_[i]) * h / 6.0;
}

std::pair<double, double> linear_fit(const std::vector<double>& x,
                                     const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear_fit: need >= 2 matching samples");
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double intercept = (sy - slope * sx) / n;
    return {slope, intercept};
}

}  // namespace singsurf
