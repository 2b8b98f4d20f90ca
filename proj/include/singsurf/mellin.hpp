#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "singsurf/numerics.hpp"
#include "singsurf/rational.hpp"

namespace singsurf {

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MellinError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AsymptoticTerm {
    Rational i;  // exponent, in (1/m) * naturals
    int j = 0;   // log power, 0 or 1
    double C = 0;
};

// l(r) ~ sum C_{i,j} r^i (log r)^j near r = 0.
struct AsymptoticExpansion {
    int lattice_m = 1;
    std::vector<AsymptoticTerm> terms;  // sorted by (i, j), zeros dropped
    double fit_residual = 0;            // rms misfit on the sample grid
    double gamma = 0;                   // min exponent over surviving terms
    double lead_coeff = 0;              // coefficient of the leading power
    bool has_log = false;               // log factor present at the lead

    double eval(double r) const;
    double eval_derivative(double r) const;
};

// Least-squares fit of samples (r_k, l_k) in the basis
// {r^{k/m} (log r)^j : k = 1..n_terms, j = 0 or allow_log}. Pass m = 0 to
// scan m in 1..6 and keep the best penalized residual.
AsymptoticExpansion fit_expansion(const std::vector<double>& r,
                                  const std::vector<double>& l, int m,
                                  int n_terms, bool allow_log);

// Sup relative deviation between finite-difference dl/dr and the term-by-term
// derivative of the expansion, over the lower half of the r range.
double differentiated_fit_check(const std::vector<double>& r,
                                const std::vector<double>& l,
                                const AsymptoticExpansion& expansion);

// Ml(z) = int_0^infty r^{z-1} l(r) dr for the sampled table, treated as 0
// beyond r_max and continued below r_min by the fitted expansion.
// Requires Re z > 0 unless allow_continuation is set; the continuation is
// exact because only the closed-form tail terms carry poles.
struct MellinValue {
    std::complex<double> value;
    double error_est = 0;
};

MellinValue mellin_numeric(const std::vector<double>& r,
                           const std::vector<double>& l,
                           const AsymptoticExpansion& tail,
                           std::complex<double> z,
                           bool allow_continuation = false);

struct MellinPole {
    double z0 = 0;
    int order = 1;       // 1 or 2
    double coeff = 0;    // lim (z - z0)^order * f(z)
};

struct MellinPoleSet {
    std::vector<MellinPole> poles;
};

// One axis of a monomial integral int_0^infty y^{a z + delta} chi(y) dy.
// both_signs doubles the axis (integration over the whole line); hole > 0
// replaces chi by a weight vanishing identically on [0, hole], which removes
// every pole of the axis.
struct MonomialAxis {
    double a = 1;
    double delta = 0;
    bool both_signs = false;
    double hole = 0;
};

struct ContinuationResult {
    bool at_pole = false;
    MellinPole pole;              // filled when at_pole
    std::complex<double> value;   // filled otherwise
    bool entire = false;          // no poles anywhere (all axes have holes)
};

// Meromorphic continuation of the product over axes, via the exact split
// int_0^c y^w dy = c^{w+1}/(w+1) on the flat part of the bump plus numeric
// quadrature on the rest. Reports the full pole set when asked.
ContinuationResult monomial_mellin_continuation(const std::vector<MonomialAxis>& axes,
                                                const Bump& chi,
                                                std::complex<double> z,
                                                MellinPoleSet* poles = nullptr);

// Log-log slope of |Ml(re_z + i I)| against I. Tapering smooths the table
// near r_max so the artificial truncation jump does not dominate the decay.
struct DecayReport {
    double slope = 0;
    bool pass = false;        // slope <= -1
    bool noise_floor = false; // values hit quadrature/interpolation noise
    std::vector<double> magnitudes;
};

DecayReport decay_check(const std::vector<double>& r, const std::vector<double>& l,
                        const AsymptoticExpansion& tail, double re_z,
                        const std::vector<double>& im_list, bool taper = true);

// Dictionary: pole of order mu at z0 <-> term r^{-z0} (log r)^{mu-1}.
// Exponents are snapped to small rationals; lattice_m is their lcm of
// denominators.
AsymptoticExpansion poles_to_terms(const MellinPoleSet& poles);

// Fits f(z) = a/(z - z0) + b through three samples z1, z1+h, z1+2h and
// returns the implied simple pole (location and residue a).
MellinPole detect_simple_pole(const std::function<double(double)>& f, double z1,
                              double h);

// Nearest rational with denominator <= max_den, if within tol.
std::optional<Rational> snap_rational(double x, int max_den, double tol);

// Structured exports: lattice m, term table, residual, leading descriptor.
void write_expansion_text(std::ostream& os, const AsymptoticExpansion& e);
void write_expansion_json(std::ostream& os, const AsymptoticExpansion& e);

}  // namespace singsurf
