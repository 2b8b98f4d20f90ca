#include "singsurf/mellin.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace singsurf {

namespace {

double term_value(const AsymptoticTerm& t, double r) {
    double v = t.C * std::pow(r, to_double(t.i));
    return t.j ? v * std::log(r) : v;
}

struct SortedTable {
    std::vector<double> r, l;
};

SortedTable sorted_table(const std::vector<double>& r, const std::vector<double>& l) {
    if (r.size() != l.size() || r.size() < 3)
        throw FitError("sample table too small or mismatched");
    std::vector<std::size_t> idx(r.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return r[a] < r[b]; });
    SortedTable t;
    for (auto k : idx) {
        if (!t.r.empty() && r[k] == t.r.back())
            throw FitError("duplicate r values in sample table");
        if (!(r[k] > 0)) throw FitError("r values must be positive");
        t.r.push_back(r[k]);
        t.l.push_back(l[k]);
    }
    return t;
}

struct Basis {
    std::vector<std::pair<int, int>> cols;  // (k, j): exponent k/m, log power j
};

// Least squares with the given subset of columns enabled; returns rms misfit
// and coefficients (in the unscaled r^{k/m} (log r)^j basis).
double solve_ls(const SortedTable& t, int m, const Basis& basis,
                const std::vector<bool>& enabled, std::vector<double>& coeffs) {
    const std::size_t n = t.r.size();
    std::vector<std::size_t> active;
    for (std::size_t c = 0; c < basis.cols.size(); ++c)
        if (enabled[c]) active.push_back(c);
    const std::size_t p = active.size();
    const double rmax = t.r.back();

    Eigen::MatrixXd A(n, p);
    Eigen::VectorXd b(n);
    for (std::size_t k = 0; k < n; ++k) {
        b(static_cast<Eigen::Index>(k)) = t.l[k];
        for (std::size_t c = 0; c < p; ++c) {
            auto [kk, j] = basis.cols[active[c]];
            double e = static_cast<double>(kk) / m;
            double v = std::pow(t.r[k] / rmax, e);
            if (j) v *= std::log(t.r[k]);
            A(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = v;
        }
    }
    Eigen::VectorXd scale(p);
    for (std::size_t c = 0; c < p; ++c) {
        double s = A.col(static_cast<Eigen::Index>(c)).cwiseAbs().maxCoeff();
        scale(static_cast<Eigen::Index>(c)) = s > 0 ? s : 1.0;
        A.col(static_cast<Eigen::Index>(c)) /= scale(static_cast<Eigen::Index>(c));
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::VectorXd rdiag = qr.matrixR()
                                .topLeftCorner(static_cast<Eigen::Index>(p),
                                               static_cast<Eigen::Index>(p))
                                .diagonal()
                                .cwiseAbs();
    if (rdiag.minCoeff() <= 1e-13 * rdiag.maxCoeff())
        throw FitError("ill-conditioned basis: reduce n_terms or widen the r range");
    Eigen::VectorXd x = qr.solve(b);
    double rms = std::sqrt((A * x - b).squaredNorm() / static_cast<double>(n));

    coeffs.assign(basis.cols.size(), 0.0);
    for (std::size_t c = 0; c < p; ++c) {
        auto [kk, j] = basis.cols[active[c]];
        double e = static_cast<double>(kk) / m;
        coeffs[active[c]] = x(static_cast<Eigen::Index>(c)) /
                            scale(static_cast<Eigen::Index>(c)) / std::pow(rmax, e);
    }
    return rms;
}

AsymptoticExpansion fit_for_m(const SortedTable& t, int m, int n_terms,
                              bool allow_log) {
    Basis basis;
    for (int k = 1; k <= n_terms; ++k) {
        basis.cols.push_back({k, 0});
        if (allow_log) basis.cols.push_back({k, 1});
    }
    std::vector<bool> enabled(basis.cols.size(), true);
    std::vector<double> coeffs;
    double rms = solve_ls(t, m, basis, enabled, coeffs);

    double l_scale = 0;
    for (double v : t.l) l_scale = std::max(l_scale, std::abs(v));
    const double floor = 1e-12 * std::max(l_scale, 1e-300);

    // Backward pruning: drop any column whose removal does not hurt the fit.
    // This removes the cancelling near-collinear coefficients a raw monomial
    // solve produces, so surviving terms are individually supported by data.
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t c = 0; c < basis.cols.size(); ++c) {
            if (!enabled[c]) continue;
            if (std::count(enabled.begin(), enabled.end(), true) == 1) break;
            enabled[c] = false;
            std::vector<double> trial_coeffs;
            double trial = solve_ls(t, m, basis, enabled, trial_coeffs);
            if (trial <= 2.0 * rms + floor) {
                rms = trial;
                coeffs = trial_coeffs;
                changed = true;
            } else {
                enabled[c] = true;
            }
        }
    }

    // Residual-based zeroing of what is left, measured by the term's rms
    // contribution over the sample grid.
    AsymptoticExpansion e;
    e.lattice_m = m;
    e.fit_residual = rms;
    const double thr = 10.0 * rms / std::sqrt(static_cast<double>(t.r.size())) + floor;
    for (std::size_t c = 0; c < basis.cols.size(); ++c) {
        if (!enabled[c] || coeffs[c] == 0.0) continue;
        auto [kk, j] = basis.cols[c];
        AsymptoticTerm term{Rational(kk, m), j, coeffs[c]};
        double contrib = 0;
        for (double rv : t.r) contrib += term_value(term, rv) * term_value(term, rv);
        contrib = std::sqrt(contrib / static_cast<double>(t.r.size()));
        if (contrib >= thr) e.terms.push_back(term);
    }
    std::sort(e.terms.begin(), e.terms.end(), [](const auto& a, const auto& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });

    if (!e.terms.empty()) {
        Rational gamma = e.terms.front().i;
        e.gamma = to_double(gamma);
        double c0 = 0, c1 = 0;
        for (const auto& term : e.terms)
            if (term.i == gamma) (term.j ? c1 : c0) = term.C;
        // A leading log must beat the coefficient noise by a wide margin.
        double noise = thr * std::pow(t.r.front(), -e.gamma) /
                       std::max(std::abs(std::log(t.r.front())), 1.0);
        e.has_log = std::abs(c1) > 20.0 * noise && c1 != 0.0;
        // A log is only real if powers alone demonstrably fail: a pure-power
        // refit accurate to several relative digits means the log column was
        // just absorbing basis truncation error.
        if (e.has_log) {
            std::vector<bool> powers_only(basis.cols.size());
            for (std::size_t c = 0; c < basis.cols.size(); ++c)
                powers_only[c] = basis.cols[c].second == 0;
            std::vector<double> unused;
            double rms_nolog = solve_ls(t, m, basis, powers_only, unused);
            if (rms_nolog <= 1e-4 * l_scale) return fit_for_m(t, m, n_terms, false);
        }
        e.lead_coeff = e.has_log ? c1 : c0;
    }
    return e;
}

// Complex Gauss-Legendre panel quadrature, sized to the oscillation count.
std::complex<double> oscillatory_integral(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double im_freq) {
    static const auto gl = [] {
        std::pair<std::vector<double>, std::vector<double>> nw;
        gauss_legendre(12, nw.first, nw.second);
        return nw;
    }();
    const auto& [nodes, weights] = gl;
    int panels = std::max(24, static_cast<int>(std::abs(im_freq) * (b - a)));
    std::complex<double> acc = 0;
    for (int p = 0; p < panels; ++p) {
        double lo = a + (b - a) * p / panels;
        double hi = a + (b - a) * (p + 1) / panels;
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (std::size_t k = 0; k < nodes.size(); ++k)
            acc += weights[k] * half * f(mid + half * nodes[k]);
    }
    return acc;
}

// Closed-form int_0^s r^{w-1} (log r)^j dr for Re w > 0.
std::complex<double> truncated_power_integral(std::complex<double> w, int j,
                                              double s) {
    std::complex<double> sw = std::pow(std::complex<double>(s, 0), w);
    if (j == 0) return sw / w;
    return sw * (std::log(s) / w - 1.0 / (w * w));
}

}  // namespace

double AsymptoticExpansion::eval(double r) const {
    double acc = 0;
    for (const auto& t : terms) acc += term_value(t, r);
    return acc;
}

double AsymptoticExpansion::eval_derivative(double r) const {
    double acc = 0;
    for (const auto& t : terms) {
        double e = to_double(t.i);
        double re = std::pow(r, e - 1.0);
        if (t.j == 0)
            acc += t.C * e * re;
        else
            acc += t.C * re * (e * std::log(r) + 1.0);
    }
    return acc;
}

AsymptoticExpansion fit_expansion(const std::vector<double>& r,
                                  const std::vector<double>& l, int m,
                                  int n_terms, bool allow_log) {
    SortedTable t = sorted_table(r, l);
    if (static_cast<int>(t.r.size()) < 3 * n_terms)
        throw FitError("need at least 3 samples per fitted term");
    if (t.r.back() / t.r.front() < std::pow(10.0, 1.5))
        throw FitError("samples must span at least 1.5 decades of r");

    if (m > 0) return fit_for_m(t, m, n_terms, allow_log);

    // Scan the lattice and keep the best penalized residual.
    AsymptoticExpansion best;
    double best_penalty = 0;
    bool have = false;
    std::string last_error = "lattice scan failed";
    for (int cand = 1; cand <= 6; ++cand) {
        try {
            AsymptoticExpansion e = fit_for_m(t, cand, n_terms, allow_log);
            double penalty =
                e.fit_residual * (1.0 + 0.1 * static_cast<double>(e.terms.size()));
            if (!have || penalty < best_penalty) {
                best = e;
                best_penalty = penalty;
                have = true;
            }
        } catch (const FitError& err) {
            last_error = err.what();
        }
    }
    if (!have) throw FitError(last_error);
    return best;
}

double differentiated_fit_check(const std::vector<double>& r,
                                const std::vector<double>& l,
                                const AsymptoticExpansion& expansion) {
    SortedTable t = sorted_table(r, l);
    double r_mid = std::sqrt(t.r.front() * t.r.back());
    double sup = 0;
    for (std::size_t k = 1; k + 1 < t.r.size(); ++k) {
        if (t.r[k] > r_mid) break;
        double x1 = t.r[k - 1], x2 = t.r[k], x3 = t.r[k + 1];
        double fd = t.l[k - 1] * (x2 - x3) / ((x1 - x2) * (x1 - x3)) +
                    t.l[k] * (2 * x2 - x1 - x3) / ((x2 - x1) * (x2 - x3)) +
                    t.l[k + 1] * (x2 - x1) / ((x3 - x1) * (x3 - x2));
        double an = expansion.eval_derivative(x2);
        sup = std::max(sup, std::abs(fd - an) / std::max(std::abs(an), 1e-300));
    }
    return sup;
}

MellinValue mellin_numeric(const std::vector<double>& r,
                           const std::vector<double>& l,
                           const AsymptoticExpansion& tail,
                           std::complex<double> z, bool allow_continuation) {
    if (!(z.real() > 0) && !allow_continuation)
        throw MellinError("mellin_numeric: needs Re z > 0; pass the continuation "
                          "flag for the left half plane");
    for (const auto& term : tail.terms)
        if (std::abs(z + std::complex<double>(to_double(term.i), 0)) < 1e-10)
            throw MellinError("mellin_numeric: z sits on a pole of the tail");
    SortedTable t = sorted_table(r, l);

    // Below the smallest sample the table is continued by the fitted
    // expansion, term by term in closed form.
    std::complex<double> acc = 0;
    for (const auto& term : tail.terms)
        acc += term.C * truncated_power_integral(z + to_double(term.i), term.j,
                                                 t.r.front());

    std::vector<double> u(t.r.size());
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = std::log(t.r[k]);
    CubicSpline spline(u, t.l);
    acc += oscillatory_integral(
        [&](double uu) { return std::exp(z * uu) * spline(uu); }, u.front(),
        u.back(), z.imag());

    MellinValue out;
    out.value = acc;
    out.error_est = 1e-9 * std::abs(acc) + 1e-12;
    return out;
}

ContinuationResult monomial_mellin_continuation(const std::vector<MonomialAxis>& axes,
                                                const Bump& chi,
                                                std::complex<double> z,
                                                MellinPoleSet* poles) {
    if (axes.empty() || axes.size() > 2)
        throw MellinError("monomial continuation supports 1 or 2 axes");

    auto axis_weight = [&](const MonomialAxis& ax, double y) {
        double w = chi(y);
        if (ax.hole > 0) w *= 1.0 - Bump(ax.hole, 2.0 * ax.hole)(y);
        return w;
    };
    auto axis_value = [&](const MonomialAxis& ax,
                          std::complex<double> zz) -> std::complex<double> {
        std::complex<double> w = ax.a * zz + ax.delta;
        double lo = ax.hole > 0 ? ax.hole : chi.inner();
        std::complex<double> v = oscillatory_integral(
            [&](double y) {
                return std::pow(std::complex<double>(y, 0), w) * axis_weight(ax, y);
            },
            lo, chi.outer(), 0.0);
        if (ax.hole == 0) v += std::pow(std::complex<double>(chi.inner(), 0), w + 1.0) /
                               (w + 1.0);
        return ax.both_signs ? 2.0 * v : v;
    };

    // Pole locations: each hole-free axis with a != 0 contributes the single
    // point where its flat closed-form part blows up.
    std::vector<std::pair<double, std::size_t>> locs;  // (z0, axis index)
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const auto& ax = axes[i];
        if (ax.hole > 0) continue;
        if (ax.a == 0) {
            if (std::abs(ax.delta + 1.0) < 1e-14)
                throw MellinError("axis with a = 0 sits exactly on its divergence");
            continue;
        }
        locs.push_back({-(1.0 + ax.delta) / ax.a, i});
    }

    ContinuationResult out;
    out.entire = locs.empty();

    auto pole_at = [&](double z0, const std::vector<std::size_t>& here) {
        MellinPole p;
        p.z0 = z0;
        p.order = static_cast<int>(here.size());
        double lead = 1.0;
        for (std::size_t i : here)
            lead *= (axes[i].both_signs ? 2.0 : 1.0) / axes[i].a;
        std::complex<double> rest = 1.0;
        for (std::size_t i = 0; i < axes.size(); ++i)
            if (std::find(here.begin(), here.end(), i) == here.end())
                rest *= axis_value(axes[i], std::complex<double>(z0, 0));
        p.coeff = lead * rest.real();
        return p;
    };

    if (poles) {
        poles->poles.clear();
        std::vector<bool> used(locs.size(), false);
        for (std::size_t i = 0; i < locs.size(); ++i) {
            if (used[i]) continue;
            std::vector<std::size_t> here{locs[i].second};
            for (std::size_t k = i + 1; k < locs.size(); ++k)
                if (!used[k] && std::abs(locs[k].first - locs[i].first) < 1e-12) {
                    here.push_back(locs[k].second);
                    used[k] = true;
                }
            poles->poles.push_back(pole_at(locs[i].first, here));
        }
        std::sort(poles->poles.begin(), poles->poles.end(),
                  [](const MellinPole& a, const MellinPole& b) { return a.z0 > b.z0; });
    }

    if (z.imag() == 0) {
        std::vector<std::size_t> here;
        double z0 = 0;
        for (const auto& [loc, i] : locs)
            if (std::abs(z.real() - loc) < 1e-12) {
                here.push_back(i);
                z0 = loc;
            }
        if (!here.empty()) {
            out.at_pole = true;
            out.pole = pole_at(z0, here);
            return out;
        }
    }

    out.value = 1.0;
    for (const auto& ax : axes) out.value *= axis_value(ax, z);
    return out;
}

DecayReport decay_check(const std::vector<double>& r, const std::vector<double>& l,
                        const AsymptoticExpansion& tail, double re_z,
                        const std::vector<double>& im_list, bool taper) {
    if (im_list.size() < 4) throw MellinError("decay_check: need >= 4 heights");
    SortedTable t = sorted_table(r, l);
    if (taper) {
        Bump w(0.55 * t.r.back(), 0.95 * t.r.back());
        for (std::size_t k = 0; k < t.r.size(); ++k) t.l[k] *= w(t.r[k]);
    }

    DecayReport rep;
    std::vector<double> lx, ly;
    for (double im : im_list) {
        if (!(im >= 1)) throw MellinError("decay_check: heights must be >= 1");
        double mag =
            std::abs(mellin_numeric(t.r, t.l, tail, {re_z, im}).value);
        rep.magnitudes.push_back(mag);
        lx.push_back(std::log(im));
        ly.push_back(std::log(std::max(mag, 1e-300)));
    }
    double peak = *std::max_element(rep.magnitudes.begin(), rep.magnitudes.end());
    for (double mag : rep.magnitudes)
        if (mag < 1e-12 * peak) rep.noise_floor = true;
    rep.slope = linear_fit(lx, ly).first;
    rep.pass = rep.slope <= -1.0;
    return rep;
}

AsymptoticExpansion poles_to_terms(const MellinPoleSet& poles) {
    if (poles.poles.empty()) throw MellinError("poles_to_terms: empty pole set");
    AsymptoticExpansion e;
    long long m = 1;
    for (const auto& p : poles.poles) {
        auto i = snap_rational(-p.z0, 12, 1e-6);
        if (!i) throw MellinError("pole location is not a small rational");
        m = std::lcm(m, denominator(*i).convert_to<long long>());
        e.terms.push_back({*i, p.order - 1, p.coeff});
        if (p.order == 2) e.terms.push_back({*i, 0, 0.0});
    }
    std::sort(e.terms.begin(), e.terms.end(), [](const auto& a, const auto& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    e.lattice_m = static_cast<int>(m);
    e.gamma = to_double(e.terms.front().i);
    for (const auto& t : e.terms)
        if (to_double(t.i) == e.gamma && t.j == 1 && t.C != 0) e.has_log = true;
    e.lead_coeff = e.terms.front().C;
    return e;
}

MellinPole detect_simple_pole(const std::function<double(double)>& f, double z1,
                              double h) {
    double z2 = z1 + h, z3 = z1 + 2 * h;
    double f1 = f(z1), f2 = f(z2), f3 = f(z3);
    double tq = (f1 - f2) / (f2 - f3);
    MellinPole p;
    p.z0 = (tq * z1 - z3) / (tq - 1.0);
    p.order = 1;
    p.coeff = (f1 - f2) * (z1 - p.z0) * (z2 - p.z0) / (z2 - z1);
    return p;
}

std::optional<Rational> snap_rational(double x, int max_den, double tol) {
    for (int q = 1; q <= max_den; ++q) {
        double pq = std::round(x * q);
        if (std::abs(x - pq / q) < tol)
            return Rational(static_cast<long long>(pq), q);
    }
    return std::nullopt;
}

void write_expansion_text(std::ostream& os, const AsymptoticExpansion& e) {
    os << "lattice m = " << e.lattice_m << "\n";
    os << "terms (i, j, C):\n";
    for (const auto& t : e.terms)
        os << "  " << t.i << "  " << t.j << "  " << t.C << "\n";
    os << "fit residual = " << e.fit_residual << "\n";
    os << "leading: gamma = " << e.gamma << ", C = " << e.lead_coeff
       << ", log = " << (e.has_log ? "yes" : "no") << "\n";
}

void write_expansion_json(std::ostream& os, const AsymptoticExpansion& e) {
    nlohmann::json j;
    j["lattice_m"] = e.lattice_m;
    j["fit_residual"] = e.fit_residual;
    j["leading"] = {{"gamma", e.gamma}, {"C", e.lead_coeff}, {"has_log", e.has_log}};
    j["terms"] = nlohmann::json::array();
    for (const auto& t : e.terms) {
        std::ostringstream is;
        is << t.i;
        j["terms"].push_back({{"i", is.str()}, {"j", t.j}, {"C", t.C}});
    }
    os << j.dump(2) << "\n";
}

}  // namespace singsurf
