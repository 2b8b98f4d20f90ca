#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <sstream>

#include "singsurf/mellin.hpp"

using namespace singsurf;

namespace {

std::vector<double> geometric_grid(double lo, double hi, int n) {
    std::vector<double> r(n);
    for (int k = 0; k < n; ++k)
        r[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
    return r;
}

std::vector<double> sample_law(const std::vector<double>& r, double (*f)(double)) {
    std::vector<double> l;
    for (double v : r) l.push_back(f(v));
    return l;
}

double cone_law(double r) { return std::sqrt(2.0) * M_PI * r; }
double log_law(double r) { return -std::sqrt(2.0) * r * std::log(r) + 3.0 * r; }
double horn_law(double r) {
    return 2.0 * M_PI * 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * r * r));
}
double identity_law(double r) { return r; }
double rlogr_law(double r) { return r * std::log(r); }
double smooth_law(double r) {
    return r <= 1 ? r * r * r * (1 - r) * (1 - r) * (1 - r) : 0.0;
}

}  // namespace

TEST_CASE("fit recovers the pure cone law") {
    auto r = geometric_grid(1e-4, 0.3, 60);
    auto e = fit_expansion(r, sample_law(r, cone_law), 1, 4, true);
    CHECK(e.gamma == doctest::Approx(1.0));
    CHECK(e.lead_coeff == doctest::Approx(std::sqrt(2.0) * M_PI).epsilon(1e-10));
    CHECK_FALSE(e.has_log);
    CHECK(e.fit_residual < 1e-10);
    REQUIRE(e.terms.size() == 1);
}

TEST_CASE("fit detects a leading logarithm") {
    auto r = geometric_grid(1e-5, 0.2, 80);
    auto e = fit_expansion(r, sample_law(r, log_law), 1, 4, true);
    CHECK(e.gamma == doctest::Approx(1.0));
    CHECK(e.has_log);
    CHECK(e.lead_coeff == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-8));
    CHECK(e.fit_residual < 1e-9);
}

TEST_CASE("fit of the horn closed form finds gamma = 2") {
    auto r = geometric_grid(1e-3, 0.05, 60);
    auto e = fit_expansion(r, sample_law(r, horn_law), 0, 6, true);
    CHECK(e.gamma == doctest::Approx(2.0));
    CHECK(e.lead_coeff == doctest::Approx(2.0 * M_PI).epsilon(1e-6));
    CHECK_FALSE(e.has_log);
}

TEST_CASE("lattice scan identifies half-integer exponents") {
    auto r = geometric_grid(1e-4, 0.5, 50);
    std::vector<double> l;
    for (double v : r) l.push_back(2.0 * std::pow(v, 1.5));
    auto e = fit_expansion(r, l, 0, 4, false);
    CHECK(e.lattice_m == 2);
    CHECK(e.gamma == doctest::Approx(1.5));
    CHECK(e.lead_coeff == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("fit preconditions") {
    auto r = geometric_grid(0.1, 0.3, 30);  // less than 1.5 decades
    CHECK_THROWS_AS(fit_expansion(r, sample_law(r, cone_law), 1, 3, false), FitError);
    auto r2 = geometric_grid(1e-4, 0.3, 5);  // too few samples
    CHECK_THROWS_AS(fit_expansion(r2, sample_law(r2, cone_law), 1, 4, false), FitError);
}

TEST_CASE("held-out prediction error stays near the fit residual") {
    auto r = geometric_grid(1e-3, 0.05, 80);
    auto l = sample_law(r, horn_law);
    std::vector<double> rf, lf;
    for (std::size_t k = 0; k < r.size(); ++k)
        if (k % 2 == 0) {
            rf.push_back(r[k]);
            lf.push_back(l[k]);
        }
    auto e = fit_expansion(rf, lf, 1, 6, true);
    for (std::size_t k = 1; k < r.size(); k += 2)
        CHECK(std::abs(e.eval(r[k]) - l[k]) / l[k] < 1e-6);
}

TEST_CASE("term-by-term differentiation") {
    auto rc = geometric_grid(1e-4, 0.3, 200);
    auto ec = fit_expansion(rc, sample_law(rc, cone_law), 1, 3, true);
    CHECK(differentiated_fit_check(rc, sample_law(rc, cone_law), ec) < 1e-4);

    auto rh = geometric_grid(1e-3, 0.05, 200);
    auto eh = fit_expansion(rh, sample_law(rh, horn_law), 1, 4, true);
    CHECK(differentiated_fit_check(rh, sample_law(rh, horn_law), eh) < 1e-3);

    auto rl = geometric_grid(1e-5, 0.2, 400);
    auto el = fit_expansion(rl, sample_law(rl, log_law), 1, 4, true);
    CHECK(differentiated_fit_check(rl, sample_law(rl, log_law), el) < 1e-2);
}

TEST_CASE("numeric Mellin transform of truncated monomials") {
    auto r = geometric_grid(1e-3, 1.0, 400);
    AsymptoticExpansion tail;
    tail.terms = {{Rational(1), 0, 1.0}};

    CHECK(mellin_numeric(r, sample_law(r, identity_law), tail, {2.0, 0.0}).value.real() ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    std::complex<double> z{1.0, 2.0};
    auto v = mellin_numeric(r, sample_law(r, identity_law), tail, z).value;
    CHECK(std::abs(v - 1.0 / (z + 1.0)) < 1e-6);

    AsymptoticExpansion tail_log;
    tail_log.terms = {{Rational(1), 1, 1.0}};
    CHECK(mellin_numeric(r, sample_law(r, rlogr_law), tail_log, {2.0, 0.0}).value.real() ==
          doctest::Approx(-1.0 / 9.0).epsilon(1e-6));
}

TEST_CASE("numeric Mellin transform of the cone table") {
    auto r = geometric_grid(1e-3, 0.3, 400);
    auto l = sample_law(r, cone_law);
    auto tail = fit_expansion(r, l, 1, 3, true);
    double expect = std::sqrt(2.0) * M_PI * std::pow(0.3, 2.0) / 2.0;
    CHECK(mellin_numeric(r, l, tail, {1.0, 0.0}).value.real() ==
          doctest::Approx(expect).epsilon(1e-4));
    CHECK_THROWS_AS(mellin_numeric(r, l, tail, {-0.5, 0.0}), MellinError);
}

TEST_CASE("monomial continuation: residue 2 at z = -1 on the full line") {
    Bump chi(0.5, 1.0);
    MonomialAxis ax;
    ax.both_signs = true;
    auto res = monomial_mellin_continuation({ax}, chi, {-1.0, 0.0});
    REQUIRE(res.at_pole);
    CHECK(res.pole.order == 1);
    CHECK(res.pole.z0 == doctest::Approx(-1.0));
    CHECK(res.pole.coeff == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("monomial continuation matches direct quadrature at regular points") {
    Bump chi(0.5, 1.0);
    MonomialAxis ax;  // one positive axis
    auto res = monomial_mellin_continuation({ax}, chi, {-0.5, 0.0});
    // int_0^1 y^{-1/2} chi dy with y = t^2: 2 int_0^1 chi(t^2) dt.
    double direct = adaptive_simpson([&](double t) { return 2.0 * chi(t * t); },
                                     0.0, 1.0, 1e-12);
    CHECK(res.value.real() == doctest::Approx(direct).epsilon(1e-8));
    CHECK(std::abs(res.value.imag()) < 1e-12);
}

TEST_CASE("two equal axes give a double pole; distinct axes set the lattice") {
    Bump chi(0.5, 1.0);
    MellinPoleSet ps;
    auto res = monomial_mellin_continuation({MonomialAxis{}, MonomialAxis{}}, chi,
                                            {-1.0, 0.0}, &ps);
    REQUIRE(res.at_pole);
    CHECK(res.pole.order == 2);
    CHECK(res.pole.coeff == doctest::Approx(1.0).epsilon(1e-9));
    auto skel = poles_to_terms(ps);
    REQUIRE(skel.terms.size() == 2);
    CHECK(skel.terms[0].i == Rational(1));
    CHECK(skel.terms[0].j == 0);
    CHECK(skel.terms[1].j == 1);
    CHECK(skel.has_log);

    MonomialAxis fast;
    fast.a = 2.0;
    MellinPoleSet ps2;
    monomial_mellin_continuation({MonomialAxis{}, fast}, chi, {2.0, 0.0}, &ps2);
    REQUIRE(ps2.poles.size() == 2);
    auto skel2 = poles_to_terms(ps2);
    CHECK(skel2.lattice_m == 2);
}

TEST_CASE("axis with a hole is entire and decays on vertical lines") {
    Bump chi(0.5, 1.0);
    MonomialAxis ax;
    ax.hole = 0.1;
    auto res = monomial_mellin_continuation({ax}, chi, {1.0, 0.0});
    CHECK(res.entire);
    std::vector<double> lx, ly;
    for (double im : {4.0, 8.0, 16.0, 32.0}) {
        auto v = monomial_mellin_continuation({ax}, chi, {1.0, im});
        lx.push_back(std::log(im));
        ly.push_back(std::log(std::abs(v.value)));
    }
    // The weight is C^2, so the guaranteed asymptotic order is finite; the
    // observed slope is already well below the simple-pole benchmark -1.
    CHECK(linear_fit(lx, ly).first < -1.5);
}

TEST_CASE("continuation input validation") {
    Bump chi(0.5, 1.0);
    CHECK_THROWS_AS(monomial_mellin_continuation({}, chi, {1.0, 0.0}), MellinError);
    MonomialAxis flat;
    flat.a = 0.0;
    flat.delta = -1.0;
    CHECK_THROWS_AS(monomial_mellin_continuation({flat}, chi, {1.0, 0.0}), MellinError);
    flat.delta = 0.0;
    auto res = monomial_mellin_continuation({flat}, chi, {1.0, 0.0});
    CHECK(res.entire);
    auto res2 = monomial_mellin_continuation({flat}, chi, {5.0, 3.0});
    CHECK(std::abs(res.value - res2.value) < 1e-12);
}

TEST_CASE("decay: smooth table beats slope -2, truncation is boundary-limited") {
    auto r = geometric_grid(1e-3, 1.0, 400);
    auto ls = sample_law(r, smooth_law);
    auto tail_s = fit_expansion(r, ls, 1, 6, false);
    auto rep = decay_check(r, ls, tail_s, 1.0, {2.0, 4.0, 8.0, 16.0}, false);
    CHECK(rep.slope <= -2.0);
    CHECK(rep.pass);

    auto li = sample_law(r, identity_law);
    AsymptoticExpansion tail_i;
    tail_i.terms = {{Rational(1), 0, 1.0}};
    auto rep2 = decay_check(r, li, tail_i, 1.0, {8.0, 16.0, 32.0, 64.0}, false);
    CHECK(rep2.slope == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("decay of the tapered cone table passes") {
    auto r = geometric_grid(1e-3, 0.3, 600);
    auto l = sample_law(r, cone_law);
    auto tail = fit_expansion(r, l, 1, 3, true);
    auto rep = decay_check(r, l, tail, 1.0, {2.0, 4.0, 8.0, 16.0});
    CHECK(rep.pass);
}

TEST_CASE("pole detection from the table alone recovers the exponents") {
    // l = 2r + r^2 on (0, 1]: Ml(z) = 2/(z+1) + 1/(z+2) exactly.
    auto r = geometric_grid(1e-3, 1.0, 500);
    std::vector<double> l;
    for (double v : r) l.push_back(2.0 * v + v * v);
    AsymptoticExpansion tail;
    tail.terms = {{Rational(1), 0, 2.0}, {Rational(2), 0, 1.0}};

    auto M = [&](double z) {
        return mellin_numeric(r, l, tail, {z, 0.0}, true).value.real();
    };
    auto p1 = detect_simple_pole(M, -0.99, 0.005);
    CHECK(p1.z0 == doctest::Approx(-1.0).epsilon(1e-4));
    CHECK(p1.coeff == doctest::Approx(2.0).epsilon(1e-2));

    auto M2 = [&](double z) { return M(z) - p1.coeff / (z - p1.z0); };
    auto p2 = detect_simple_pole(M2, -1.99, 0.005);
    CHECK(p2.z0 == doctest::Approx(-2.0).epsilon(5e-3));
}

TEST_CASE("rational snapping and exports") {
    CHECK(*snap_rational(0.5, 12, 1e-6) == Rational(1, 2));
    CHECK(*snap_rational(-1.3333333333, 12, 1e-6) == Rational(-4, 3));
    CHECK_FALSE(snap_rational(0.123456, 12, 1e-6).has_value());

    auto r = geometric_grid(1e-4, 0.3, 60);
    auto e = fit_expansion(r, sample_law(r, cone_law), 1, 4, true);
    std::ostringstream text, json;
    write_expansion_text(text, e);
    write_expansion_json(json, e);
    CHECK(text.str().find("gamma = 1") != std::string::npos);
    CHECK(json.str().find("\"lattice_m\": 1") != std::string::npos);
    CHECK(json.str().find("\"has_log\": false") != std::string::npos);
}
