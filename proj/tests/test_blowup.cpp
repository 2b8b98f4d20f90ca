#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "singsurf/blowup.hpp"
#include "singsurf/surface.hpp"

using namespace singsurf;

namespace {

const std::vector<std::string> xy{"x", "y"};

Polynomial P(const std::string& s) { return parse_polynomial(s, xy); }

// Checks exactly that germ(map_x, map_y) == transformed in every chart, and
// spot-checks the same identity at a rational point.
void check_chart_consistency(const ResolutionReport& rep) {
    for (const auto& c : rep.charts) {
        Polynomial pulled = rep.germ.compose({c.map_x, c.map_y});
        CHECK(pulled == c.transformed);

        std::vector<Rational> pt{Rational(3, 7), Rational(-2, 5)};
        Rational orig = rep.germ.eval(
            std::vector<Rational>{c.map_x.eval(pt), c.map_y.eval(pt)});
        CHECK(orig == c.transformed.eval(pt));

        // The factorization x^a1 y^a2 * unit reassembles the transform.
        Polynomial mono(xy);
        mono.add_term({c.monomial_part.first, c.monomial_part.second}, 1);
        CHECK(mono * c.unit_part == c.transformed);
    }
}

}  // namespace

TEST_CASE("point blowup charts of x^2 + y^2") {
    auto [c0, c1] = blowup_point(P("x^2+y^2"), {Rational(0), Rational(0)});
    CHECK(c0 == P("x^2*(1+y^2)"));
    CHECK(c1 == P("y^2*(1+x^2)"));
}

TEST_CASE("point blowup of xy and off-origin centers") {
    auto [c0, c1] = blowup_point(P("x*y"), {Rational(0), Rational(0)});
    CHECK(c0 == P("x^2*y"));
    CHECK(c1 == P("x*y^2"));

    auto [d0, d1] = blowup_point(P("x^2+y^2-2*x-2*y+2"), {Rational(1), Rational(1)});
    // Centered at (1,1) the germ is x^2 + y^2 again.
    CHECK(d0 == P("x^2*(1+y^2)"));
    CHECK(d1 == P("y^2*(1+x^2)"));
}

TEST_CASE("monomials need no blowup") {
    for (const char* s : {"x", "y^3", "x^2*y^5", "7*x*y"}) {
        auto rep = monomialize(P(s));
        CHECK(rep.depth == 0);
        CHECK(rep.charts.size() == 1);
        CHECK(rep.charts[0].monomialized);
        CHECK(rep.complete);
    }
    auto rep = monomialize(P("x^2*y^5"));
    CHECK(rep.charts[0].monomial_part == std::make_pair(2, 5));
    CHECK(rep.lattice_m == 10);
}

TEST_CASE("x^2 + y^2 resolves in one step") {
    auto rep = monomialize(P("x^2+y^2"));
    CHECK(rep.complete);
    CHECK(rep.depth == 1);
    REQUIRE(rep.charts.size() == 3);
    CHECK_FALSE(rep.charts[0].monomialized);
    CHECK(rep.charts[1].monomial_part == std::make_pair(2, 0));
    CHECK(rep.charts[1].unit_part == P("1+y^2"));
    CHECK(rep.charts[2].monomial_part == std::make_pair(0, 2));
    CHECK(predict_alpha(rep) == Rational(1, 2));
    CHECK(rep.lattice_m == 2);
    check_chart_consistency(rep);
}

TEST_CASE("cusp x^2 - y^3 resolves at depth 3") {
    auto rep = monomialize(P("x^2-y^3"));
    CHECK(rep.complete);
    CHECK(rep.depth == 3);
    check_chart_consistency(rep);

    // Hand-computed trace: chart (x, xy) gives x^2(1 - x y^3) immediately;
    // the chain through (xy, y) needs two more steps and ends in the
    // monomials x^6 y^2 (1 - y) and x^3 y^6 (x - 1).
    std::multiset<std::pair<int, int>> leaves;
    for (const auto& c : rep.charts)
        if (c.monomialized) leaves.insert(c.monomial_part);
    CHECK(leaves.count({2, 0}) == 1);
    CHECK(leaves.count({6, 2}) == 1);
    CHECK(leaves.count({3, 6}) == 1);
    CHECK(leaves.count({0, 3}) == 1);
}

TEST_CASE("(x^2+y^2)^2 has exponent 4 charts") {
    auto rep = monomialize(P("(x^2+y^2)^2"));
    CHECK(rep.complete);
    CHECK(rep.depth == 1);
    for (const auto& c : rep.charts)
        if (c.monomialized)
            CHECK(c.monomial_part.first + c.monomial_part.second == 4);
    CHECK(predict_alpha(rep) == Rational(1, 4));
    check_chart_consistency(rep);
}

TEST_CASE("tangential branches x^2 - y^4 separate after two blowups") {
    auto rep = monomialize(P("x^2-y^4"));
    CHECK(rep.complete);
    check_chart_consistency(rep);
    CHECK(rep.depth == 2);
    // Leaves (2,0), (4,2), (0,4): the minimum of 1/(a1+a2) is 1/6.
    CHECK(predict_alpha(rep) == Rational(1, 6));
}

TEST_CASE("translated centers appear when the strict transform is singular off-origin") {
    // First chart of (x^2 - y^2)^2 is x^4 (1 - y^2)^2, with double roots of
    // the strict transform at y = +-1 on the exceptional axis x = 0; the
    // resolver must relocate and finish there.
    auto rep = monomialize(P("(x^2-y^2)^2"));
    CHECK(rep.complete);
    check_chart_consistency(rep);
    bool saw_translation = false;
    for (const auto& c : rep.charts)
        if (c.translation[0] != 0 || c.translation[1] != 0) saw_translation = true;
    CHECK(saw_translation);
}

TEST_CASE("alpha prediction for the catalog germs") {
    // Germs model r^2, so the surface exponent is twice the chart value.
    auto cone = monomialize(catalog_get("cone").r2_germ.value());
    CHECK(Rational(2) * predict_alpha(cone) == Rational(1));

    auto horn = monomialize(catalog_get("horn-1-2").r2_germ.value());
    CHECK(Rational(2) * predict_alpha(horn) == Rational(1));
    CHECK(horn.depth == 0);
    CHECK(horn.charts[0].monomial_part == std::make_pair(0, 2));

    auto ds = monomialize(catalog_get("double-sphere").r2_germ.value());
    CHECK(Rational(2) * predict_alpha(ds) == Rational(1));
}

TEST_CASE("all catalog r^2 germs monomialize with even total exponents") {
    for (const auto& name : catalog_names()) {
        auto spec = catalog_get(name);
        if (!spec.r2_germ) continue;
        auto rep = monomialize(*spec.r2_germ);
        CHECK(rep.complete);
        CHECK(rep.depth <= 5);
        for (const auto& c : rep.charts)
            if (c.monomialized)
                CHECK((c.monomial_part.first + c.monomial_part.second) % 2 == 0);
    }
}

TEST_CASE("max depth truncation is reported") {
    auto rep = monomialize(P("x^2-y^3"), 1);
    CHECK_FALSE(rep.complete);
}

TEST_CASE("report text mentions every chart") {
    auto rep = monomialize(P("x^2+y^2"));
    std::string txt = report_to_text(rep);
    CHECK(txt.find("chart 0") != std::string::npos);
    CHECK(txt.find("chart 2") != std::string::npos);
    CHECK(txt.find("alpha = 1/2") != std::string::npos);
}

TEST_CASE("bad inputs throw") {
    CHECK_THROWS_AS(monomialize(Polynomial(xy)), BlowupError);
    CHECK_THROWS_AS(monomialize(parse_polynomial("x+y+z", {"x", "y", "z"})), BlowupError);
    CHECK_THROWS_AS(blowup_point(P("x"), {Rational(0)}), BlowupError);
}
