#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "singsurf/blowup.hpp"
#include "singsurf/quasi_iso.hpp"

using namespace singsurf;

namespace {

std::vector<double> geometric_levels(double r0, double ratio, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(r0 * std::pow(ratio, i));
    return out;
}

// Synthetic grid with a planted cross term b = q * r^p * sqrt(ac) on an
// otherwise exact model, one cell per level.
QiGrid planted_grid(double q, double p, int n_levels) {
    QiGrid g;
    g.r_levels = geometric_levels(0.2, std::pow(2.0, -0.5), n_levels);
    g.theta_count = 1;
    g.metric_cells.resize(g.r_levels.size());
    for (std::size_t lv = 0; lv < g.r_levels.size(); ++lv) {
        double r = g.r_levels[lv];
        g.l_of_r.push_back(2.0 * M_PI * r);
        if (lv == 0 || lv + 1 == g.r_levels.size()) continue;
        QiGrid::Cell cell;
        cell.r = r;
        cell.a = 1.0;
        cell.c = r * r;
        cell.b = q * std::pow(r, p) * std::sqrt(cell.a * cell.c);
        g.metric_cells[lv].push_back(cell);
    }
    return g;
}

}  // namespace

TEST_CASE("cone grid: uniform speed l(r)/2pi = r/sqrt(2) and tiny defect") {
    auto spec = catalog_get("cone");
    auto levels = geometric_levels(0.2, std::pow(2.0, -0.25), 8);
    auto grid = build_phi_grid(spec, 0, levels, 64);

    REQUIRE(grid.r_levels.size() == 8);
    REQUIRE(grid.points.size() == 8);
    for (std::size_t lv = 0; lv < 8; ++lv) {
        CHECK(grid.points[lv].size() == 64);
        // Sphere invariant and the closed-form speed r/sqrt(2).
        double target = levels[lv] / std::sqrt(2.0);
        CHECK(std::abs(grid.speed_of_r[lv] - target) / target < 1e-6);
        CHECK(std::abs(grid.l_of_r[lv] / (2.0 * M_PI) - target) / target < 1e-6);
    }
    CHECK(qi_defect(grid, levels.front()) < 1e-4);
    CHECK(radial_angle_profile(grid)[3] < 1e-4);

    // Interior levels only carry metric cells; all positive definite.
    CHECK(grid.metric_cells.front().empty());
    CHECK(grid.metric_cells[3].size() == 64);
    for (const auto& cell : grid.metric_cells[3]) {
        CHECK(cell.a == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(cell.a * cell.c - cell.b * cell.b > 0);
    }
}

TEST_CASE("plane grid is the exact polar model") {
    auto spec = catalog_get("plane");
    auto levels = geometric_levels(0.4, 0.5, 5);
    auto grid = build_phi_grid(spec, 0, levels, 32);
    CHECK(qi_defect(grid, levels.front()) < 1e-6);
    for (double beta : radial_angle_profile(grid)) CHECK(beta < 1e-6);
    for (std::size_t lv = 1; lv + 1 < grid.r_levels.size(); ++lv)
        for (const auto& cell : grid.metric_cells[lv]) {
            CHECK(cell.a == doctest::Approx(1.0).epsilon(1e-8));
            CHECK(std::abs(cell.b) < 1e-8);
            CHECK(cell.c ==
                  doctest::Approx(grid.r_levels[lv] * grid.r_levels[lv]).epsilon(1e-6));
        }
}

TEST_CASE("cellwise sandwich margins are nonnegative up to roundoff") {
    auto spec = catalog_get("double-sphere");
    auto grid = build_phi_grid(spec, 0, geometric_levels(0.3, std::pow(2.0, -0.25), 6), 32);
    for (const auto& row : grid.metric_cells)
        for (const auto& cell : row) {
            auto [lo, hi] = sandwich_margins(cell);
            CHECK(lo > -1e-10);
            CHECK(hi > -1e-10);
            double T = std::abs(cell.b) / std::sqrt(cell.a * cell.c);
            CHECK(lo <= T * (cell.a + cell.c) + 1e-15);
        }
}

TEST_CASE("horn defect decays; rate beats the resolver's lower bound") {
    auto spec = catalog_get("horn-1-2");
    auto levels = geometric_levels(0.2, std::pow(2.0, -0.5), 14);
    auto grid = build_phi_grid(spec, 0, levels, 32);

    std::vector<std::pair<double, double>> samples;
    double prev = 1e300;
    for (std::size_t lv = 1; lv + 1 < levels.size(); ++lv) {
        double d = qi_defect(grid, levels[lv]);
        samples.emplace_back(levels[lv], d);
        // delta(eps) shrinks with eps (up to numeric noise near the floor).
        CHECK(d <= prev + 1e-9);
        prev = d;
    }
    auto curve = fit_alpha(samples);
    CHECK(curve.pass);
    CHECK_FALSE(curve.noise_floor);
    CHECK(curve.alpha > 0);

    // Blowup prediction min 1/(a1+a2) on the r^2-germ, doubled for the r
    // scale, is a lower-bound construction: the measured rate must reach at
    // least half of it (and may exceed it).
    auto rep = monomialize(*spec.r2_germ);
    double predicted = 2.0 * static_cast<double>(predict_alpha(rep));
    CHECK(curve.alpha > 0.5 * predicted);
}

TEST_CASE("cone defect curve hits the noise floor and passes") {
    auto spec = catalog_get("cone");
    auto levels = geometric_levels(0.2, std::pow(2.0, -0.5), 10);
    auto grid = build_phi_grid(spec, 0, levels, 32);
    std::vector<std::pair<double, double>> samples;
    for (std::size_t lv = 1; lv + 1 < levels.size(); ++lv)
        samples.emplace_back(levels[lv], qi_defect(grid, levels[lv]));
    auto curve = fit_alpha(samples);
    CHECK(curve.pass);
    CHECK(curve.noise_floor);
}

TEST_CASE("planted cross term b = 0.1 r^0.5 sqrt(ac) fits alpha = 0.5") {
    auto grid = planted_grid(0.1, 0.5, 14);
    std::vector<std::pair<double, double>> samples;
    for (std::size_t lv = 1; lv + 1 < grid.r_levels.size(); ++lv)
        samples.emplace_back(grid.r_levels[lv], qi_defect(grid, grid.r_levels[lv]));
    auto curve = fit_alpha(samples);
    CHECK(curve.pass);
    CHECK(curve.alpha == doctest::Approx(0.5).epsilon(0.1));
    CHECK(curve.C == doctest::Approx(0.1).epsilon(0.25));
}

TEST_CASE("classification of catalog surfaces") {
    auto mk = [](double gamma_raw) {
        AsymptoticExpansion e;
        e.gamma = gamma_raw;
        return e;
    };

    auto cone = classify({mk(0.9995), mk(1.002)}, 1);
    CHECK(decomposition_to_text(cone) == "[cone, cone], N=2");
    CHECK(cone.components[0].is_cone);
    CHECK_FALSE(cone.components[0].anomaly);

    auto horn = classify({mk(1.99), mk(2.004)}, 1);
    CHECK(decomposition_to_text(horn) == "[horn(2), horn(2)], N=2");
    CHECK(horn.components[0].gamma == Rational(2));
    CHECK(horn.components[0].snapped);

    auto ds = classify({mk(1.001), mk(0.999)}, 2);
    CHECK(ds.N == 2);
    CHECK(ds.components[0].is_cone);
    CHECK(ds.components[1].is_cone);
}

TEST_CASE("classification edge cases: off-lattice and anomalous exponents") {
    AsymptoticExpansion e;
    e.gamma = 1.37;
    auto d = classify({e}, 2);
    CHECK_FALSE(d.components[0].snapped);
    CHECK_FALSE(d.components[0].anomaly);
    CHECK(decomposition_to_text(d).find("horn(~1.37") != std::string::npos);

    e.gamma = 0.8;
    auto bad = classify({e}, 1);
    CHECK(bad.components[0].anomaly);
    CHECK(decomposition_to_text(bad).find("anomaly") != std::string::npos);

    CHECK_THROWS_AS(classify({e}, 0), QiError);
}

TEST_CASE("constant ledger bound dominates the measured cone defect") {
    auto spec = catalog_get("cone");
    auto grid = build_phi_grid(spec, 0, geometric_levels(0.2, std::pow(2.0, -0.25), 6), 32);
    // C0 = sup r|psi_r| <= 1 for the (1,1) model chart; C1 = oscillation
    // budget sqrt(2) pi of the cone link; one chart.
    auto check = constant_ledger_check(grid, 1.0, std::sqrt(2.0) * M_PI, 1);
    CHECK(check.pass);
    CHECK(check.bound == doctest::Approx(6.0 + 4.0 * (6.0 + 2.0 * std::sqrt(2.0) * M_PI)));
    CHECK(check.measured_delta < 1e-4);
    CHECK_THROWS_AS(constant_ledger_check(grid, -1.0, 0.0, 1), QiError);
}

TEST_CASE("defect CSV export") {
    auto grid = planted_grid(0.05, 1.0, 6);
    std::ostringstream os;
    write_defect_csv(os, grid);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "eps,delta,beta_max");
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);  // interior levels only
}

TEST_CASE("input validation") {
    auto spec = catalog_get("cone");
    CHECK_THROWS_AS(build_phi_grid(spec, 0, {0.2, 0.1}, 32), QiError);
    CHECK_THROWS_AS(build_phi_grid(spec, 0, {0.1, 0.2, 0.3}, 32), QiError);
    CHECK_THROWS_AS(build_phi_grid(spec, 0, {0.3, 0.2, 0.1}, 4), QiError);
    CHECK_THROWS_AS(build_phi_grid(spec, 7, {0.3, 0.2, 0.1}, 32), QiError);

    auto grid = planted_grid(0.1, 0.5, 6);
    CHECK_THROWS_AS(qi_defect(grid, 1e-9), QiError);

    std::vector<std::pair<double, double>> few = {{1, 1}, {2, 1}, {4, 1}, {16, 1}};
    CHECK_THROWS_AS(fit_alpha(few), QiError);
    std::vector<std::pair<double, double>> narrow = {
        {1, 1}, {1.2, 1}, {1.4, 1}, {1.6, 1}, {1.8, 1}};
    CHECK_THROWS_AS(fit_alpha(narrow), QiError);
    std::vector<std::pair<double, double>> neg = {
        {1, 1}, {2, 1}, {4, 1}, {8, -1}, {16, 1}};
    CHECK_THROWS_AS(fit_alpha(neg), QiError);
}
