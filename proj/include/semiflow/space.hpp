#pragma once

// Discretized Banach spaces: a grid, a norm descriptor and (for weighted
// p-norms) quadrature weights. Product spaces are represented by
// concatenating coordinates and weights; their grid coordinates are synthetic
// bookkeeping.

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "semiflow/errors.hpp"
#include "semiflow/numerics.hpp"

namespace semiflow {

enum class NormKind { SupNorm, WeightedPNorm };

class DiscreteSpace {
public:
    /// Sup-norm space on an explicit grid.
    static DiscreteSpace sup(RealVector grid) {
        DiscreteSpace s;
        s.grid_ = std::move(grid);
        s.kind_ = NormKind::SupNorm;
        s.check_grid();
        return s;
    }

    /// Weighted p-norm space; weights must be nonnegative and, for a physical
    /// 1-d grid, sum to the interval length.
    static DiscreteSpace weighted_p(RealVector grid, double p, RealVector weights,
                                    bool synthetic = false) {
        if (p < 1.0) throw DomainError("DiscreteSpace: p-norm needs p >= 1");
        DiscreteSpace s;
        s.grid_ = std::move(grid);
        s.kind_ = NormKind::WeightedPNorm;
        s.p_ = p;
        s.weights_ = std::move(weights);
        s.synthetic_ = synthetic;
        s.check_grid();
        if (s.weights_.size() != s.grid_.size())
            throw DimensionError("DiscreteSpace: weights/grid length mismatch");
        if ((s.weights_.array() < 0).any())
            throw DomainError("DiscreteSpace: negative quadrature weight");
        if (!synthetic) {
            const double len = s.grid_(s.grid_.size() - 1) - s.grid_(0);
            if (relative_diff(s.weights_.sum(), len) > 1e-12)
                throw DomainError("DiscreteSpace: weights do not sum to interval length");
        }
        return s;
    }

    /// Uniform grid on [a, b] with sup norm.
    static DiscreteSpace uniform_sup(double a, double b, int n) {
        return sup(RealVector::LinSpaced(n, a, b));
    }

    /// Uniform grid on [a, b] with L^p norm via trapezoid weights.
    static DiscreteSpace uniform_lp(double a, double b, int n, double p) {
        return weighted_p(RealVector::LinSpaced(n, a, b), p, trapezoid_weights(n, b - a));
    }

    /// k-dimensional coordinate space (boundary values) with sup norm.
    static DiscreteSpace coords_sup(int k) {
        DiscreteSpace s = sup(RealVector::LinSpaced(std::max(k, 2), 0.0, 1.0));
        if (k == 1) {
            s.grid_ = RealVector::Zero(1);
        }
        s.synthetic_ = true;
        return s;
    }

    /// k-dimensional coordinate space with plain p-norm (unit weights).
    static DiscreteSpace coords_p(int k, double p) {
        RealVector g;
        if (k == 1)
            g = RealVector::Zero(1);
        else
            g = RealVector::LinSpaced(k, 0.0, 1.0);
        return weighted_p(std::move(g), p, RealVector::Ones(k), /*synthetic=*/true);
    }

    /// Product of two spaces of the same norm family, realized by
    /// concatenation. For p-norms: |(x,y)|^p = |x|^p + |y|^p.
    static DiscreteSpace product(const DiscreteSpace& a, const DiscreteSpace& b) {
        if (a.kind_ != b.kind_)
            throw DomainError("DiscreteSpace::product: mixed norm families");
        const Eigen::Index na = a.dim(), nb = b.dim();
        RealVector grid(na + nb);
        // Synthetic coordinates: shift the second factor past the first.
        const double shift = a.grid_(na - 1) + 1.0 - b.grid_(0);
        grid.head(na) = a.grid_;
        grid.tail(nb) = b.grid_.array() + shift;
        if (a.kind_ == NormKind::SupNorm) {
            DiscreteSpace s = sup(std::move(grid));
            s.synthetic_ = true;
            return s;
        }
        if (std::abs(a.p_ - b.p_) > 1e-14)
            throw DomainError("DiscreteSpace::product: mismatched p");
        RealVector w(na + nb);
        w.head(na) = a.weights_;
        w.tail(nb) = b.weights_;
        return weighted_p(std::move(grid), a.p_, std::move(w), /*synthetic=*/true);
    }

    Eigen::Index dim() const { return grid_.size(); }
    const RealVector& grid() const { return grid_; }
    NormKind kind() const { return kind_; }
    double p() const { return p_; }
    const RealVector& weights() const { return weights_; }
    bool synthetic() const { return synthetic_; }

    double norm(const Vector& x) const {
        if (x.size() != dim())
            throw DimensionError("norm: vector length " + std::to_string(x.size()) +
                                 " != space dim " + std::to_string(dim()));
        if (kind_ == NormKind::SupNorm) return x.cwiseAbs().maxCoeff();
        if (std::isinf(p_)) return x.cwiseAbs().maxCoeff();
        return std::pow((weights_.array() * x.array().abs().pow(p_)).sum(), 1.0 / p_);
    }

    double norm(const RealVector& x) const { return norm(Vector(x.cast<Complex>())); }

    /// Diagonal scaling D with |x|_space = |Dx|_p (plain p-norm); identity for
    /// sup spaces.
    RealVector scaling() const {
        if (kind_ == NormKind::SupNorm) return RealVector::Ones(dim());
        return weights_.array().pow(1.0 / p_);
    }

    bool same_layout(const DiscreteSpace& o) const {
        return dim() == o.dim() && kind_ == o.kind_ && std::abs(p_ - o.p_) < 1e-14;
    }

private:
    void check_grid() const {
        if (grid_.size() < 1) throw DimensionError("DiscreteSpace: empty grid");
        for (Eigen::Index i = 0; i + 1 < grid_.size(); ++i)
            if (!(grid_(i) < grid_(i + 1)))
                throw DomainError("DiscreteSpace: grid not strictly increasing");
    }

    RealVector grid_;
    NormKind kind_ = NormKind::SupNorm;
    double p_ = 2.0;
    RealVector weights_;
    bool synthetic_ = false;
};

/// Dense operator between two discrete spaces.
struct OperatorBlock {
    DiscreteSpace domain;
    DiscreteSpace codomain;
    Matrix matrix;

    OperatorBlock(DiscreteSpace dom, DiscreteSpace cod, Matrix m)
        : domain(std::move(dom)), codomain(std::move(cod)), matrix(std::move(m)) {
        if (matrix.rows() != codomain.dim() || matrix.cols() != domain.dim())
            throw DimensionError("OperatorBlock: matrix shape inconsistent with spaces");
    }

    Vector apply(const Vector& x) const {
        if (x.size() != domain.dim()) throw DimensionError("OperatorBlock::apply: bad length");
        return matrix * x;
    }
};

} // namespace semiflow
