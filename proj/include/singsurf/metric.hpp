#pragma once

#include <Eigen/Dense>
#include <vector>

#include "singsurf/compiled_poly.hpp"
#include "singsurf/polynomial.hpp"

namespace singsurf {

// Ambient metric on R^dim. Either the Euclidean metric or a diagonal metric
// with polynomial coefficient functions.
class AmbientMetric {
public:
    enum class Kind { Euclidean, DiagonalAnalytic };

    static AmbientMetric euclidean(int dim) {
        AmbientMetric m;
        m.kind_ = Kind::Euclidean;
        m.dim_ = dim;
        return m;
    }

    static AmbientMetric diagonal(std::vector<Polynomial> entries) {
        AmbientMetric m;
        m.kind_ = Kind::DiagonalAnalytic;
        m.dim_ = static_cast<int>(entries.size());
        m.diag_ = std::move(entries);
        for (const auto& p : m.diag_) m.cdiag_.emplace_back(p);
        return m;
    }

    Kind kind() const { return kind_; }
    int dimension() const { return dim_; }
    bool is_euclidean() const { return kind_ == Kind::Euclidean; }

    Eigen::MatrixXd eval(const Eigen::VectorXd& x) const {
        Eigen::MatrixXd g = Eigen::MatrixXd::Identity(dim_, dim_);
        if (kind_ == Kind::DiagonalAnalytic)
            for (int i = 0; i < dim_; ++i) g(i, i) = cdiag_[static_cast<std::size_t>(i)].eval(x.data());
        return g;
    }

    // Squared length of v in the metric at x.
    double norm2(const Eigen::Vector3d& x, const Eigen::Vector3d& v) const {
        if (kind_ == Kind::Euclidean) return v.squaredNorm();
        double acc = 0;
        for (int i = 0; i < 3; ++i)
            acc += cdiag_[static_cast<std::size_t>(i)].eval(x.data()) * v(i) * v(i);
        return acc;
    }

private:
    Kind kind_ = Kind::Euclidean;
    int dim_ = 3;
    std::vector<Polynomial> diag_;
    std::vector<CompiledPoly> cdiag_;
};

// 2x2 form e dx^2 + 2 f dxdy + g dy^2, possibly degenerate on a subset.
class SemiRiemannianMetric2D {
public:
    SemiRiemannianMetric2D(Polynomial e, Polynomial f, Polynomial g)
        : e_(std::move(e)), f_(std::move(f)), g_(std::move(g)),
          ce_(e_), cf_(f_), cg_(g_) {}

    static SemiRiemannianMetric2D euclidean() {
        std::vector<std::string> v{"x", "y"};
        return SemiRiemannianMetric2D(Polynomial::constant(v, 1),
                                      Polynomial::constant(v, 0),
                                      Polynomial::constant(v, 1));
    }

    Eigen::Matrix2d eval(double x, double y) const {
        Eigen::Matrix2d m;
        double e = ce_.eval2(x, y), f = cf_.eval2(x, y), g = cg_.eval2(x, y);
        m << e, f, f, g;
        return m;
    }

    double norm(double x, double y, double vx, double vy) const {
        double e = ce_.eval2(x, y), f = cf_.eval2(x, y), g = cg_.eval2(x, y);
        double q = e * vx * vx + 2.0 * f * vx * vy + g * vy * vy;
        return q > 0 ? std::sqrt(q) : 0.0;
    }

    const Polynomial& e() const { return e_; }
    const Polynomial& f() const { return f_; }
    const Polynomial& g() const { return g_; }

private:
    Polynomial e_, f_, g_;
    CompiledPoly ce_, cf_, cg_;
};

}  // namespace singsurf
