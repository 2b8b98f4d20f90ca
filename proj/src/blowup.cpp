#include "singsurf/blowup.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace singsurf {

namespace {

const std::vector<std::string> kXY{"x", "y"};

Polynomial affine(std::size_t var, const Rational& shift) {
    Polynomial p = Polynomial::variable(kXY, var);
    p.add_term({0, 0}, shift);
    return p;
}

// Substitution polynomials for one blowup branch after translating the
// center to `c`: branch 0 maps (x, y) -> (c1 + x, c2 + x*y), branch 1 maps
// (x, y) -> (c1 + x*y, c2 + y).
std::vector<Polynomial> branch_substitution(int branch, const std::vector<Rational>& c) {
    Polynomial xv = Polynomial::variable(kXY, 0);
    Polynomial yv = Polynomial::variable(kXY, 1);
    Polynomial mixed = xv * yv;
    if (branch == 0) {
        Polynomial second = mixed;
        second.add_term({0, 0}, c[1]);
        return {affine(0, c[0]), second};
    }
    Polynomial first = mixed;
    first.add_term({0, 0}, c[0]);
    return {first, affine(1, c[1])};
}

// Splits p = x^a1 y^a2 * unit with the maximal monomial factor.
void factor_monomial(const Polynomial& p, std::pair<int, int>& mono, Polynomial& unit) {
    int a1 = std::numeric_limits<int>::max(), a2 = a1;
    for (const auto& [e, c] : p.terms()) {
        a1 = std::min(a1, e[0]);
        a2 = std::min(a2, e[1]);
    }
    mono = {a1, a2};
    unit = Polynomial(kXY);
    for (const auto& [e, c] : p.terms()) unit.add_term({e[0] - a1, e[1] - a2}, c);
}

// --- small dense univariate layer over the rationals -----------------------

using UniPoly = std::vector<Rational>;  // c[0] + c[1] t + ...

void trim(UniPoly& u) {
    while (!u.empty() && u.back() == 0) u.pop_back();
}

UniPoly restrict_to_axis(const Polynomial& p, int axis_var) {
    // axis_var is the variable that parametrizes the axis; the other is 0.
    UniPoly u;
    for (const auto& [e, c] : p.terms()) {
        if (e[1 - axis_var] != 0) continue;
        int d = e[axis_var];
        if (static_cast<int>(u.size()) <= d) u.resize(d + 1, Rational(0));
        u[d] += c;
    }
    trim(u);
    return u;
}

UniPoly uni_derivative(const UniPoly& u) {
    UniPoly d;
    for (std::size_t k = 1; k < u.size(); ++k) d.push_back(u[k] * Rational(static_cast<int>(k)));
    trim(d);
    return d;
}

UniPoly uni_mod(UniPoly a, const UniPoly& b) {
    while (a.size() >= b.size() && !b.empty()) {
        Rational q = a.back() / b.back();
        std::size_t shift = a.size() - b.size();
        for (std::size_t k = 0; k < b.size(); ++k) a[shift + k] -= q * b[k];
        a.pop_back();  // the leading term cancels exactly
        trim(a);
    }
    return a;
}

UniPoly uni_gcd(UniPoly a, UniPoly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        UniPoly r = uni_mod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        Rational lead = a.back();
        for (auto& c : a) c /= lead;
    }
    return a;
}

Rational uni_eval(const UniPoly& u, const Rational& t) {
    Rational v(0);
    for (auto it = u.rbegin(); it != u.rend(); ++it) v = v * t + *it;
    return v;
}

std::vector<long long> small_divisors(const boost::multiprecision::cpp_int& n_in) {
    boost::multiprecision::cpp_int n = abs(n_in);
    if (n == 0 || n > boost::multiprecision::cpp_int(1) << 62) return {};
    long long m = static_cast<long long>(n);
    std::vector<long long> out;
    for (long long d = 1; d * d <= m; ++d) {
        if (m % d) continue;
        out.push_back(d);
        if (d != m / d) out.push_back(m / d);
    }
    return out;
}

// Nonzero rational roots of u (used on gcd(u, u'), so every root found is a
// repeated root of the original restriction). Large integer data is skipped;
// the search is only a best effort to relocate strict-transform singular
// points with small rational coordinates.
std::vector<Rational> rational_roots_nonzero(UniPoly u) {
    trim(u);
    while (!u.empty() && u.front() == 0) u.erase(u.begin());  // drop root t = 0
    if (u.size() < 2) return {};

    boost::multiprecision::cpp_int den_lcm = 1;
    for (const auto& c : u) den_lcm = lcm(den_lcm, denominator(c));
    std::vector<boost::multiprecision::cpp_int> z;
    for (const auto& c : u) z.push_back(numerator(c * Rational(den_lcm)));

    std::vector<Rational> roots;
    for (long long p : small_divisors(z.front()))
        for (long long q : small_divisors(z.back()))
            for (int sign : {1, -1}) {
                Rational cand(sign * p, q);
                if (uni_eval(u, cand) == 0 &&
                    std::find(roots.begin(), roots.end(), cand) == roots.end())
                    roots.push_back(cand);
            }
    std::sort(roots.begin(), roots.end());
    return roots;
}

// --- the resolver ----------------------------------------------------------

struct Resolver {
    ResolutionReport report;
    int max_depth;
    bool truncated = false;

    // Returns the id of the chart created for germ q.
    int process(const Polynomial& q, std::optional<std::pair<int, int>> parent,
                const std::vector<Rational>& translation, const Polynomial& mx,
                const Polynomial& my, int depth) {
        BlowupChart chart;
        chart.id = static_cast<int>(report.charts.size());
        chart.parent = parent;
        chart.translation = translation;
        chart.transformed = q;
        factor_monomial(q, chart.monomial_part, chart.unit_part);
        chart.map_x = mx;
        chart.map_y = my;
        chart.depth = depth;
        report.depth = std::max(report.depth, depth);

        // Centers that still need a blowup: the origin if the strict
        // transform passes through it, plus repeated rational roots of the
        // strict transform on this chart's exceptional axis.
        std::vector<std::vector<Rational>> centers;
        const Polynomial& u = chart.unit_part;
        if (u.eval(std::vector<Rational>{0, 0}) == 0) centers.push_back({0, 0});
        if (parent) {
            // Branch 0 glued y = y_parent / x: exceptional axis x = 0, free
            // coordinate y; branch 1 the other way around.
            int axis_var = parent->second == 0 ? 1 : 0;
            UniPoly rest = restrict_to_axis(u, axis_var);
            for (const Rational& t : rational_roots_nonzero(uni_gcd(rest, uni_derivative(rest)))) {
                std::vector<Rational> c{0, 0};
                c[axis_var] = t;
                centers.push_back(c);
            }
        }

        chart.monomialized = centers.empty();
        int id = chart.id;
        report.charts.push_back(std::move(chart));

        if (centers.empty()) return id;
        if (depth >= max_depth) {
            truncated = true;
            return id;
        }
        for (const auto& c : centers)
            for (int branch : {0, 1}) {
                auto sub = branch_substitution(branch, c);
                process(q.compose(sub), std::make_pair(id, branch), c,
                        mx.compose(sub), my.compose(sub), depth + 1);
            }
        return id;
    }
};

long long lcm_ll(long long a, long long b) { return std::lcm(a, b); }

}  // namespace

std::pair<Polynomial, Polynomial> blowup_point(const Polynomial& p,
                                               const std::vector<Rational>& center) {
    if (p.var_count() != 2 || center.size() != 2)
        throw BlowupError("blowup_point: expected a bivariate germ and a 2-point center");
    return {p.compose(branch_substitution(0, center)),
            p.compose(branch_substitution(1, center))};
}

ResolutionReport monomialize(const Polynomial& p, int max_depth) {
    if (p.var_count() != 2) throw BlowupError("monomialize: germ must be bivariate");
    if (p.is_zero()) throw BlowupError("monomialize: germ is identically zero");

    Resolver res;
    res.max_depth = max_depth;
    res.report.germ = p;
    res.process(p, std::nullopt, {Rational(0), Rational(0)},
                Polynomial::variable(kXY, 0), Polynomial::variable(kXY, 1), 0);
    res.report.complete = !res.truncated;

    long long m = 1;
    for (const auto& c : res.report.charts) {
        if (!c.monomialized) continue;
        if (c.monomial_part.first > 0) m = lcm_ll(m, c.monomial_part.first);
        if (c.monomial_part.second > 0) m = lcm_ll(m, c.monomial_part.second);
    }
    res.report.lattice_m = static_cast<int>(m);
    return res.report;
}

Rational predict_alpha(const ResolutionReport& report) {
    std::optional<Rational> best;
    for (const auto& c : report.charts) {
        if (!c.monomialized) continue;
        int total = c.monomial_part.first + c.monomial_part.second;
        if (total < 1) continue;
        Rational a(1, total);
        if (!best || a < *best) best = a;
    }
    if (!best)
        throw BlowupError("predict_alpha: no monomialized chart meets the exceptional set");
    return *best;
}

std::string report_to_text(const ResolutionReport& report) {
    std::ostringstream os;
    os << "resolution of " << report.germ.str() << "\n";
    for (const auto& c : report.charts) {
        os << "  chart " << c.id << " (depth " << c.depth << ", ";
        if (c.parent)
            os << "parent " << c.parent->first << " branch " << c.parent->second
               << ", center (" << c.translation[0] << ", " << c.translation[1] << ")";
        else
            os << "root";
        os << "): x^" << c.monomial_part.first << " y^" << c.monomial_part.second
           << " * (" << c.unit_part.str() << ")"
           << (c.monomialized ? "" : "  [needs blowup]") << "\n";
    }
    os << "depth " << report.depth << ", lattice m = " << report.lattice_m;
    if (report.complete) {
        try {
            os << ", alpha = " << predict_alpha(report);
        } catch (const BlowupError&) {
        }
    } else {
        os << ", truncated at max depth";
    }
    os << "\n";
    return os.str();
}

}  // namespace singsurf
