#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "singsurf/polynomial.hpp"

namespace singsurf {

// One chart of the blowup tree. Coordinates are always called x, y; the
// composed map (map_x, map_y) expresses the original germ coordinates in
// terms of this chart's coordinates, exactly.
struct BlowupChart {
    int id = 0;
    std::optional<std::pair<int, int>> parent;  // (parent id, branch 0|1)
    std::vector<Rational> translation;          // applied before the blowup
    Polynomial transformed;                     // pullback of the germ
    std::pair<int, int> monomial_part{0, 0};    // (alpha1, alpha2)
    Polynomial unit_part;                       // transformed / x^a1 y^a2
    bool monomialized = false;                  // unit_part(0,0) != 0
    Polynomial map_x, map_y;                    // composed chart -> original
    int depth = 0;
};

struct ResolutionReport {
    Polynomial germ;
    std::vector<BlowupChart> charts;  // tree order; leaves flagged monomialized
    int depth = 0;
    int lattice_m = 1;      // lcm of positive monomial exponents over leaves
    bool complete = false;  // all leaves monomialized within max_depth
};

struct BlowupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The two standard charts of the point blowup at `center`:
// chart0 = P(center + (x, x*y)), chart1 = P(center + (x*y, y)).
std::pair<Polynomial, Polynomial> blowup_point(const Polynomial& p,
                                               const std::vector<Rational>& center);

// Iterated origin blowups until every leaf chart is a monomial times a unit.
// Singular points of the strict transform on the exceptional axis with
// rational coordinates are translated to the origin before blowing up.
ResolutionReport monomialize(const Polynomial& p, int max_depth = 12);

// min over monomialized leaf charts meeting the exceptional set of
// 1/(alpha1 + alpha2). For a germ modeling r^2 rather than r, the caller
// doubles the result.
Rational predict_alpha(const ResolutionReport& report);

std::string report_to_text(const ResolutionReport& report);

}  // namespace singsurf
