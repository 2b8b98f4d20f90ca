#include "singsurf/surface.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace singsurf {

namespace {

const std::vector<std::string> kXYZ{"x", "y", "z"};

Rational parse_rational(const std::string& tok) {
    auto slash = tok.find('/');
    if (slash == std::string::npos) return Rational(BigInt(tok));
    return Rational(BigInt(tok.substr(0, slash)), BigInt(tok.substr(slash + 1)));
}

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string resolve_catalog_path(const std::string& explicit_path) {
    if (!explicit_path.empty()) return explicit_path;
    if (const char* env = std::getenv("SINGSURF_CATALOG")) return env;
#ifdef SINGSURF_DATA_DIR
    return std::string(SINGSURF_DATA_DIR) + "/catalog.txt";
#else
    return "data/catalog.txt";
#endif
}

struct RawEntry {
    std::string name;
    std::map<std::string, std::string> kv;
};

std::vector<RawEntry> read_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CatalogError("cannot open catalog file: " + path);
    std::vector<RawEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            auto close = line.find(']');
            if (close == std::string::npos || line.compare(1, 8, "surface ") != 0)
                throw CatalogError("malformed catalog header: " + line);
            entries.push_back({trim(line.substr(9, close - 9)), {}});
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos || entries.empty())
            throw CatalogError("malformed catalog line: " + line);
        entries.back().kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return entries;
}

ImplicitSurfaceSpec build_entry(const RawEntry& raw) {
    ImplicitSurfaceSpec spec;
    spec.name = raw.name;
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = raw.kv.find(key);
        if (it == raw.kv.end())
            throw CatalogError("catalog entry '" + raw.name + "' missing key: " + key);
        return it->second;
    };
    auto maybe = [&](const std::string& key) -> const std::string* {
        auto it = raw.kv.find(key);
        return it == raw.kv.end() ? nullptr : &it->second;
    };

    spec.defining = parse_polynomial(need("expression"), kXYZ);
    {
        std::istringstream ps(need("point"));
        std::string tok;
        while (ps >> tok) spec.point_exact.push_back(parse_rational(tok));
        if (spec.point_exact.size() != 3)
            throw CatalogError("catalog entry '" + raw.name + "': point needs 3 coordinates");
    }
    spec.is_singular = need("singular") == "true";
    if (const auto* v = maybe("euler_char")) spec.euler_char = std::stoi(*v);
    if (const auto* v = maybe("r_count")) spec.num_singular_points = std::stoi(*v);
    if (const auto* v = maybe("expected_gamma")) {
        std::istringstream gs(*v);
        double g;
        while (gs >> g) spec.expected_gamma.push_back(g);
    }
    if (const auto* v = maybe("revolution")) spec.revolution = (*v == "true");
    if (const auto* v = maybe("eps0")) spec.eps0 = std::stod(*v);
    if (const auto* v = maybe("r2_germ"))
        spec.r2_germ = parse_polynomial(*v, {"x", "y"});
    spec.eval = std::make_shared<SurfaceEval>(spec.defining);
    spec.verify();
    return spec;
}

}  // namespace

void ImplicitSurfaceSpec::verify() const {
    if (defining.eval(point_exact) != 0)
        throw CatalogError("surface '" + name + "': defining does not vanish at p");
    auto grad = defining.gradient(point_exact);
    bool grad_zero = true;
    for (const auto& g : grad)
        if (g != 0) grad_zero = false;
    if (is_singular && !grad_zero)
        throw CatalogError("surface '" + name + "': flagged singular but gradient nonzero at p");
    if (!is_singular && grad_zero)
        throw CatalogError("surface '" + name + "': gradient vanishes at p but not flagged singular");
}

ImplicitSurfaceSpec make_inline_surface(const std::string& expression) {
    ImplicitSurfaceSpec spec;
    spec.name = "inline";
    spec.defining = parse_polynomial(expression, kXYZ);
    spec.point_exact = {0, 0, 0};
    if (spec.defining.eval(spec.point_exact) != 0)
        throw CatalogError("inline surface does not pass through the origin");
    auto grad = spec.defining.gradient(spec.point_exact);
    spec.is_singular = true;
    for (const auto& g : grad)
        if (g != 0) spec.is_singular = false;
    spec.eval = std::make_shared<SurfaceEval>(spec.defining);
    return spec;
}

ImplicitSurfaceSpec catalog_get(const std::string& name,
                                const std::string& catalog_path) {
    auto entries = read_catalog(resolve_catalog_path(catalog_path));
    for (const auto& raw : entries)
        if (raw.name == name) return build_entry(raw);
    throw CatalogError("unknown catalog name: " + name);
}

std::vector<std::string> catalog_names(const std::string& catalog_path) {
    auto entries = read_catalog(resolve_catalog_path(catalog_path));
    std::vector<std::string> names;
    for (const auto& raw : entries) names.push_back(raw.name);
    return names;
}

}  // namespace singsurf
