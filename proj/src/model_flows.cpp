#include "singsurf/model_flows.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace singsurf {

namespace {

// y on the branch as a function of x: y = (r / x^a)^{1/b}, b >= 1.
double branch_y(int a, int b, double r, double x) {
    return std::pow(r / std::pow(x, a), 1.0 / b);
}

}  // namespace

std::pair<double, double> hyperbola_point(int a, int b, double r, double s) {
    if (r <= 0) throw std::invalid_argument("hyperbola_point: r must be positive");
    if (a < 0 || b < 0 || a + b == 0)
        throw std::invalid_argument("hyperbola_point: need a,b >= 0, a+b > 0");
    if (a == 0) return {s, std::pow(r, 1.0 / b)};
    if (b == 0) return {std::pow(r, 1.0 / a), s};

    // Solve g(x) = x - (r/x^a)^{1/b} - s = 0 on x > max(0, s); g is strictly
    // increasing, -inf at 0+, +inf at infinity.
    auto g = [&](double x) { return x - branch_y(a, b, r, x) - s; };
    double lo = std::max(s, 0.0) + std::pow(r, 1.0 / (a + b));
    while (g(lo) > 0) lo *= 0.5;
    double hi = lo;
    while (g(hi) < 0) hi *= 2.0;

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double y = branch_y(a, b, r, x);
        double gx = x - y - s;
        if (gx > 0) hi = x; else lo = x;
        double dg = 1.0 + (static_cast<double>(a) / b) * y / x;
        double step = gx / dg;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);  // bisection safeguard
        if (std::abs(xn - x) <= 1e-14 * std::max(1.0, std::abs(x))) {
            x = xn;
            break;
        }
        x = xn;
    }
    return {x, branch_y(a, b, r, x)};
}

double flow_derivative(int a, int b, double x, double y) {
    if (a < 1 || b < 1)
        throw std::invalid_argument("flow_derivative: interior branch needs a,b >= 1");
    if (!(x > 0) || !(y > 0))
        throw std::invalid_argument("flow_derivative: need x, y > 0");
    double r = std::pow(x, a) * std::pow(y, b);
    return 1.0 / (r * (a / x + b / y));
}

double model_psi_r_norm(int a, int b, double r, double s) {
    if (a == 0 && b == 0)
        throw std::invalid_argument("model_psi_r_norm: a+b > 0 required");
    if (a == 0) return std::pow(r, 1.0 / b - 1.0) / b;  // Psi = (s, r^{1/b})
    if (b == 0) return std::pow(r, 1.0 / a - 1.0) / a;
    auto [x, y] = hyperbola_point(a, b, r, s);
    return std::sqrt(2.0) * flow_derivative(a, b, x, y);
}

ModelBoundReport verify_model_bound(int a, int b, int n_r, int n_s, double r_lo,
                                    double r_hi, double A) {
    ModelBoundReport rep;
    double expo = 1.0 - 1.0 / (a + b);
    for (int i = 0; i < n_r; ++i) {
        double t = n_r == 1 ? 0.0 : static_cast<double>(i) / (n_r - 1);
        double r = r_lo * std::pow(r_hi / r_lo, t);
        for (int j = 0; j < n_s; ++j) {
            double u = n_s == 1 ? 0.5 : static_cast<double>(j) / (n_s - 1);
            double s = -A + 2.0 * A * u;
            if (a > 0 && b > 0) {
                auto [x, y] = hyperbola_point(a, b, r, s);
                if (x + y >= A) continue;
            } else if (std::abs(s) >= A) {
                continue;
            }
            double v = model_psi_r_norm(a, b, r, s) * std::pow(r, expo);
            rep.max_scaled = std::max(rep.max_scaled, v);
        }
    }
    rep.pass = rep.max_scaled <= 1.0 + 1e-9;
    return rep;
}

double weighted_length(const ModelFamily& family, double r, int quadrants) {
    if (r <= 0) throw std::invalid_argument("weighted_length: r must be positive");
    const int a = family.a, b = family.b;
    const double outer = family.cutoff.outer();
    double one;
    if (a == 0) {
        // Horizontal lines y = r^{1/b}; integrate over x in the support.
        double y = std::pow(r, 1.0 / b);
        if (y >= outer) return 0.0;
        one = adaptive_simpson(
            [&](double x) {
                return family.metric.norm(x, y, 1.0, 0.0) * family.cutoff.radial(x, y);
            },
            0.0, outer, 1e-9);
    } else if (b == 0) {
        double x = std::pow(r, 1.0 / a);
        if (x >= outer) return 0.0;
        one = adaptive_simpson(
            [&](double y) {
                return family.metric.norm(x, y, 0.0, 1.0) * family.cutoff.radial(x, y);
            },
            0.0, outer, 1e-9);
    } else {
        // First-quadrant branch parametrized by x; the weighted measure is
        // |(1, y'(x))|_h dx. Integrate in u = log x to tame the endpoints.
        double x_low = std::pow(r / std::pow(outer, b), 1.0 / a);
        if (x_low >= outer) return 0.0;
        one = adaptive_simpson(
            [&](double u) {
                double x = std::exp(u);
                double y = branch_y(a, b, r, x);
                double yp = -(static_cast<double>(a) / b) * y / x;
                return family.metric.norm(x, y, 1.0, yp) * family.cutoff.radial(x, y) * x;
            },
            std::log(x_low), std::log(outer), 1e-9);
    }
    return one * quadrants;
}

std::optional<double> measure_identity_check(const ModelFamily& family, double x1,
                                             double x2, double y1, double y2) {
    const int a = family.a, b = family.b;
    if (a == 0 || b == 0) return std::nullopt;  // axis case: identity not applicable
    if (!(0 < x1 && x1 < x2 && 0 < y1 && y1 < y2))
        throw std::invalid_argument("measure_identity_check: bad box");

    // Right-hand side: direct 2-D quadrature over the box.
    auto rhs_inner = [&](double x) {
        return adaptive_simpson(
            [&](double y) {
                return family.metric.norm(x, y, b * x, -a * y) / (x * y);
            },
            y1, y2, 1e-9);
    };
    double rhs = adaptive_simpson(rhs_inner, x1, x2, 1e-9);

    // Left-hand side: integrate |psi_s|_h ds dr / r over the image of the box
    // in (r, s). For fixed r the branch meets the box for x in a closed
    // interval; psi_s = (bx, -ay)/(ay + bx) and ds = (ay + bx)/(bx) dx.
    auto lhs_at_r = [&](double r) {
        double xa = std::max(x1, std::pow(r / std::pow(y2, b), 1.0 / a));
        double xb = std::min(x2, std::pow(r / std::pow(y1, b), 1.0 / a));
        if (xa >= xb) return 0.0;
        double inner = adaptive_simpson(
            [&](double x) {
                double y = branch_y(a, b, r, x);
                return family.metric.norm(x, y, b * x, -a * y) / (b * x);
            },
            xa, xb, 1e-9);
        return inner / r;
    };
    // Split the outer integral at the corner r-values, where the x-interval
    // endpoints switch formulas.
    double corners[4] = {std::pow(x1, a) * std::pow(y1, b), std::pow(x1, a) * std::pow(y2, b),
                         std::pow(x2, a) * std::pow(y1, b), std::pow(x2, a) * std::pow(y2, b)};
    std::sort(std::begin(corners), std::end(corners));
    double lhs = 0.0;
    for (int k = 0; k + 1 < 4; ++k)
        if (corners[k + 1] > corners[k])
            lhs += adaptive_simpson(lhs_at_r, corners[k], corners[k + 1], 1e-9);

    return std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
}

}  // namespace singsurf
