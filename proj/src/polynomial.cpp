#include "singsurf/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace singsurf {

Polynomial Polynomial::constant(std::vector<std::string> vars, const Rational& c) {
    Polynomial p(std::move(vars));
    p.add_term(Exponents(p.var_count(), 0), c);
    return p;
}

Polynomial Polynomial::variable(std::vector<std::string> vars, std::size_t index) {
    Polynomial p(std::move(vars));
    Exponents e(p.var_count(), 0);
    e.at(index) = 1;
    p.add_term(e, 1);
    return p;
}

int Polynomial::total_degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) {
        int s = 0;
        for (int k : e) s += k;
        d = std::max(d, s);
    }
    return d;
}

void Polynomial::add_term(const Exponents& e, const Rational& c) {
    if (e.size() != vars_.size())
        throw std::invalid_argument("exponent index length != variable count");
    if (c == 0) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
        terms_.emplace(e, c);
    } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

void Polynomial::check_compatible(const Polynomial& o) const {
    if (vars_ != o.vars_)
        throw std::invalid_argument("polynomial variable lists differ");
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    check_compatible(o);
    Polynomial r = *this;
    for (const auto& [e, c] : o.terms_) r.add_term(e, c);
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
    check_compatible(o);
    Polynomial r = *this;
    for (const auto& [e, c] : o.terms_) r.add_term(e, -c);
    return r;
}

Polynomial Polynomial::operator-() const {
    Polynomial r(vars_);
    for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
    return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    check_compatible(o);
    Polynomial r(vars_);
    for (const auto& [ea, ca] : terms_) {
        for (const auto& [eb, cb] : o.terms_) {
            Exponents e(ea.size());
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
            r.add_term(e, ca * cb);
        }
    }
    return r;
}

Polynomial Polynomial::operator*(const Rational& c) const {
    Polynomial r(vars_);
    if (c == 0) return r;
    for (const auto& [e, k] : terms_) r.terms_.emplace(e, k * c);
    return r;
}

Polynomial Polynomial::pow(unsigned n) const {
    Polynomial r = Polynomial::constant(vars_, 1);
    Polynomial base = *this;
    while (n > 0) {
        if (n & 1u) r = r * base;
        base = base * base;
        n >>= 1u;
    }
    return r;
}

Polynomial Polynomial::derivative(std::size_t var) const {
    if (var >= vars_.size()) throw std::invalid_argument("derivative: bad variable");
    Polynomial r(vars_);
    for (const auto& [e, c] : terms_) {
        if (e[var] == 0) continue;
        Exponents d = e;
        d[var] -= 1;
        r.add_term(d, c * e[var]);
    }
    return r;
}

Rational Polynomial::eval(const std::vector<Rational>& x) const {
    if (x.size() != vars_.size())
        throw std::invalid_argument("eval: dimension mismatch");
    Rational acc = 0;
    for (const auto& [e, c] : terms_) {
        Rational t = c;
        for (std::size_t i = 0; i < e.size(); ++i)
            for (int k = 0; k < e[i]; ++k) t *= x[i];
        acc += t;
    }
    return acc;
}

double Polynomial::eval(const std::vector<double>& x) const {
    if (x.size() != vars_.size())
        throw std::invalid_argument("eval: dimension mismatch");
    double acc = 0;
    for (const auto& [e, c] : terms_) {
        double t = to_double(c);
        for (std::size_t i = 0; i < e.size(); ++i)
            for (int k = 0; k < e[i]; ++k) t *= x[i];
        acc += t;
    }
    return acc;
}

std::vector<Rational> Polynomial::gradient(const std::vector<Rational>& x) const {
    if (x.size() != vars_.size())
        throw std::invalid_argument("gradient: dimension mismatch");
    std::vector<Rational> g;
    g.reserve(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) g.push_back(derivative(i).eval(x));
    return g;
}

Polynomial Polynomial::compose(const std::vector<Polynomial>& sub) const {
    if (sub.size() != vars_.size())
        throw std::invalid_argument("compose: substitution count mismatch");
    for (std::size_t i = 1; i < sub.size(); ++i)
        if (sub[i].variables() != sub[0].variables())
            throw std::invalid_argument("compose: substitutions use different variables");
    const auto& new_vars = sub.empty() ? vars_ : sub[0].variables();
    Polynomial r(new_vars);
    for (const auto& [e, c] : terms_) {
        Polynomial t = Polynomial::constant(new_vars, c);
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i] > 0) t = t * sub[i].pow(static_cast<unsigned>(e[i]));
        r = r + t;
    }
    return r;
}

std::string Polynomial::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        Rational a = c;
        if (first) {
            if (a < 0) { os << "-"; a = -a; }
        } else {
            os << (a < 0 ? "-" : "+");
            if (a < 0) a = -a;
        }
        first = false;
        bool any_var = std::any_of(e.begin(), e.end(), [](int k) { return k > 0; });
        bool coeff_shown = (a != 1) || !any_var;
        if (coeff_shown) os << a;
        bool need_star = coeff_shown;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            if (need_star) os << "*";
            os << vars_[i];
            if (e[i] > 1) os << "^" << e[i];
            need_star = true;
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over
//   expr   := ['+' | '-'] term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := atom ['^' integer]
//   atom   := integer | name | '(' expr ')'

ParseError::ParseError(const std::string& msg, std::size_t pos)
    : std::runtime_error(msg + " at position " + std::to_string(pos)),
      position(pos) {}

namespace {

class Parser {
public:
    Parser(const std::string& s, const std::vector<std::string>& vars)
        : s_(s), vars_(vars) {}

    Polynomial parse() {
        Polynomial p = expr();
        skip_ws();
        if (pos_ != s_.size())
            throw ParseError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
        return p;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    Polynomial expr() {
        bool neg = false;
        if (eat('-')) neg = true; else eat('+');
        Polynomial p = term();
        if (neg) p = -p;
        for (;;) {
            if (eat('+')) p = p + term();
            else if (eat('-')) p = p - term();
            else return p;
        }
    }

    Polynomial term() {
        Polynomial p = factor();
        for (;;) {
            if (eat('*')) {
                p = p * factor();
            } else if (eat('/')) {
                std::size_t at = pos_;
                Polynomial d = factor();
                if (d.total_degree() != 0)
                    throw ParseError("division by a non-constant", at);
                if (d.is_zero()) throw ParseError("division by zero", at);
                Rational c = d.eval(std::vector<Rational>(vars_.size(), Rational(0)));
                p = p * (Rational(1) / c);
            } else {
                return p;
            }
        }
    }

    Polynomial factor() {
        Polynomial base = atom();
        if (eat('^')) {
            skip_ws();
            std::size_t at = pos_;
            if (eat('-')) throw ParseError("negative exponent", at);
            if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
                throw ParseError("expected integer exponent", pos_);
            unsigned long n = 0;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                n = n * 10 + static_cast<unsigned long>(s_[pos_] - '0');
                if (n > 1000) throw ParseError("exponent too large", at);
                ++pos_;
            }
            if (pos_ < s_.size() && s_[pos_] == '.')
                throw ParseError("fractional exponent", pos_);
            return base.pow(static_cast<unsigned>(n));
        }
        return base;
    }

    Polynomial atom() {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of expression", pos_);
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Polynomial p = expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return p;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t at = pos_;
            std::string digits;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                digits += s_[pos_];
                ++pos_;
            }
            if (pos_ < s_.size() && s_[pos_] == '.')
                throw ParseError("decimal literals not supported, use fractions", at);
            return Polynomial::constant(vars_, Rational(BigInt(digits)));
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t at = pos_;
            std::string name;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
                name += s_[pos_];
                ++pos_;
            }
            auto it = std::find(vars_.begin(), vars_.end(), name);
            if (it == vars_.end())
                throw ParseError("unknown variable '" + name + "'", at);
            return Polynomial::variable(vars_, static_cast<std::size_t>(it - vars_.begin()));
        }
        throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
    }

    const std::string& s_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(const std::string& expr,
                            const std::vector<std::string>& vars) {
    return Parser(expr, vars).parse();
}

}  // namespace singsurf
