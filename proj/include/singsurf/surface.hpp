#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "singsurf/compiled_poly.hpp"
#include "singsurf/metric.hpp"
#include "singsurf/polynomial.hpp"

namespace singsurf {

// A surface V = {defining = 0} in R^3 with the distinguished point p the
// links are traced around. Topology data (euler_char, singular point count)
// is catalog metadata, never computed here.
struct ImplicitSurfaceSpec {
    std::string name;
    Polynomial defining;                       // in variables x, y, z
    std::vector<Rational> point_exact;         // p, exact coordinates
    AmbientMetric metric = AmbientMetric::euclidean(3);
    bool is_singular = false;                  // gradient vanishes at p
    std::optional<int> euler_char;             // chi(V), catalog-supplied
    int num_singular_points = 0;               // R
    std::vector<double> expected_gamma;        // expected leading exponents
    bool revolution = false;                   // x,y only through x^2+y^2
    double eps0 = 0.5;                         // local radius for link work
    std::optional<Polynomial> r2_germ;         // 2-var model of the r^2 pullback

    std::shared_ptr<SurfaceEval> eval;         // compiled numeric view

    Eigen::Vector3d point() const {
        Eigen::Vector3d p;
        for (int i = 0; i < 3; ++i) p(i) = to_double(point_exact[static_cast<std::size_t>(i)]);
        return p;
    }

    // Checks defining(p) = 0 and, when flagged singular, grad(p) = 0 exactly.
    void verify() const;
};

// Builds a spec from an inline expression (Euclidean metric, no topology
// metadata, origin as center).
ImplicitSurfaceSpec make_inline_surface(const std::string& expression);

struct CatalogError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Loads an entry from the shipped catalog file. The search order for the
// catalog is: explicit path argument, SINGSURF_CATALOG env var, built-in
// install path.
ImplicitSurfaceSpec catalog_get(const std::string& name,
                                const std::string& catalog_path = "");

std::vector<std::string> catalog_names(const std::string& catalog_path = "");

}  // namespace singsurf
