#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "singsurf/polynomial.hpp"

namespace singsurf {

// Flattened double-coefficient view of a Polynomial for hot numeric loops.
class CompiledPoly {
public:
    CompiledPoly() = default;
    explicit CompiledPoly(const Polynomial& p) {
        nvars_ = static_cast<int>(p.var_count());
        for (const auto& [e, c] : p.terms()) {
            Term t;
            t.c = to_double(c);
            t.e.fill(0);
            for (std::size_t i = 0; i < e.size() && i < t.e.size(); ++i)
                t.e[i] = e[i];
            terms_.push_back(t);
        }
    }

    double eval(const double* x) const {
        double acc = 0;
        for (const Term& t : terms_) {
            double v = t.c;
            for (int i = 0; i < nvars_; ++i)
                for (int k = 0; k < t.e[static_cast<std::size_t>(i)]; ++k) v *= x[i];
            acc += v;
        }
        return acc;
    }

    double eval(const Eigen::Vector3d& x) const { return eval(x.data()); }
    double eval2(double x, double y) const {
        double p[2] = {x, y};
        return eval(p);
    }

private:
    struct Term {
        double c;
        std::array<int, 4> e;
    };
    int nvars_ = 0;
    std::vector<Term> terms_;
};

// Defining polynomial plus compiled gradient and Hessian, for tracing and
// curvature work on an implicit surface in R^3.
class SurfaceEval {
public:
    SurfaceEval() = default;
    explicit SurfaceEval(const Polynomial& f) : f_(f), cf_(f) {
        for (int i = 0; i < 3; ++i) {
            Polynomial di = f.derivative(static_cast<std::size_t>(i));
            cgrad_[static_cast<std::size_t>(i)] = CompiledPoly(di);
            for (int j = 0; j < 3; ++j)
                chess_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    CompiledPoly(di.derivative(static_cast<std::size_t>(j)));
        }
    }

    const Polynomial& poly() const { return f_; }
    double f(const Eigen::Vector3d& x) const { return cf_.eval(x); }

    Eigen::Vector3d grad(const Eigen::Vector3d& x) const {
        Eigen::Vector3d g;
        for (int i = 0; i < 3; ++i) g(i) = cgrad_[static_cast<std::size_t>(i)].eval(x);
        return g;
    }

    Eigen::Matrix3d hess(const Eigen::Vector3d& x) const {
        Eigen::Matrix3d h;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                h(i, j) = chess_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(x);
        return h;
    }

private:
    Polynomial f_;
    CompiledPoly cf_;
    std::array<CompiledPoly, 3> cgrad_;
    std::array<std::array<CompiledPoly, 3>, 3> chess_;
};

}  // namespace singsurf
