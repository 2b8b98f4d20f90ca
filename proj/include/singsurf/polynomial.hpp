#pragma once

#include <map>
#include <string>
#include <vector>

#include "singsurf/rational.hpp"

namespace singsurf {

// Exact multivariate polynomial with rational coefficients.
// Terms map an exponent multi-index (length = variable count) to a nonzero
// coefficient; zero coefficients are never stored.
class Polynomial {
public:
    using Exponents = std::vector<int>;
    using TermMap = std::map<Exponents, Rational>;

    Polynomial() = default;
    explicit Polynomial(std::vector<std::string> vars) : vars_(std::move(vars)) {}

    static Polynomial constant(std::vector<std::string> vars, const Rational& c);
    static Polynomial variable(std::vector<std::string> vars, std::size_t index);

    const std::vector<std::string>& variables() const { return vars_; }
    std::size_t var_count() const { return vars_.size(); }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int total_degree() const;

    // Adds c * x^e, merging with an existing term and pruning zeros.
    void add_term(const Exponents& e, const Rational& c);

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator-() const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(const Rational& c) const;
    Polynomial pow(unsigned n) const;

    Polynomial derivative(std::size_t var) const;

    Rational eval(const std::vector<Rational>& x) const;
    double eval(const std::vector<double>& x) const;

    // Exact gradient evaluated at a rational point.
    std::vector<Rational> gradient(const std::vector<Rational>& x) const;

    // Substitutes sub[i] for variable i. All sub must share one variable list.
    Polynomial compose(const std::vector<Polynomial>& sub) const;

    // Canonical form: terms in graded-lex-ish map order, exact coefficients.
    std::string str() const;

    bool operator==(const Polynomial& o) const {
        return vars_ == o.vars_ && terms_ == o.terms_;
    }

private:
    void check_compatible(const Polynomial& o) const;

    std::vector<std::string> vars_;
    TermMap terms_;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t pos);
    std::size_t position;
};

// Parses +, -, *, /, ^, parentheses, integer literals and declared variable
// names into an exact Polynomial. '/' is only allowed with a constant divisor.
Polynomial parse_polynomial(const std::string& expr,
                            const std::vector<std::string>& vars);

}  // namespace singsurf
