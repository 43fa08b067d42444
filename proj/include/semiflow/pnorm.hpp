#pragma once

// Induced operator norms between discrete L^p / sup spaces.
//
// Exact values are available when the domain carries a (weighted) 1-norm,
// when the codomain carries a sup norm, or when both sides are weighted
// 2-norms. For other exponents we return a certified bracket:
//   lower  — best ratio found by a dual power method (every iterate is a
//            feasible point, hence a valid lower bound),
//   upper  — Riesz-Thorin interpolation between the exact 1- and sup-norms.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "semiflow/numerics.hpp"
#include "semiflow/space.hpp"

namespace semiflow {

struct NormBracket {
    double lower = 0.0;
    double upper = 0.0;
    bool tight = false; // lower == upper up to roundoff

    double midpoint() const { return 0.5 * (lower + upper); }
};

namespace detail {

inline double plain_p_norm(const Vector& x, double p) {
    if (std::isinf(p)) return x.cwiseAbs().maxCoeff();
    return std::pow(x.array().abs().pow(p).sum(), 1.0 / p);
}

/// Duality vector: z with plain q-norm 1 and z^H x = |x|_p.
inline Vector dual_vector(const Vector& x, double p) {
    const double nx = plain_p_norm(x, p);
    Vector z = Vector::Zero(x.size());
    if (nx < 1e-300) return z;
    if (std::isinf(p)) {
        Eigen::Index i;
        x.cwiseAbs().maxCoeff(&i);
        z(i) = x(i) / std::abs(x(i));
        return z;
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double a = std::abs(x(i));
        if (a > 0) z(i) = std::pow(a / nx, p - 1.0) * (x(i) / a);
    }
    return z;
}

inline double spectral_norm(const Matrix& m) {
    const Eigen::Index k = std::min(m.rows(), m.cols());
    if (k <= 320) {
        return m.jacobiSvd().singularValues()(0);
    }
    // Power iteration on M^H M; adequate for norm estimates at this scale.
    Rng rng(0x5eed5eedull ^ static_cast<std::uint64_t>(m.rows() * 2654435761u + m.cols()));
    Vector v(m.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.next_complex_gaussian();
    v /= v.norm();
    double s = 0.0;
    for (int it = 0; it < 200; ++it) {
        Vector w = m * v;
        const double sn = w.norm();
        v = m.adjoint() * w;
        const double vn = v.norm();
        if (vn < 1e-300) return 0.0;
        v /= vn;
        if (it > 4 && std::abs(sn - s) <= 1e-11 * std::max(sn, 1e-300)) return sn;
        s = sn;
    }
    return s;
}

/// Dual power method of Boyd/Higham on a plainly-normed matrix. Every
/// iterate yields a valid lower bound; we keep the best over all starts.
inline double boyd_lower(const Matrix& m, double p, int starts, int iters, std::uint64_t seed) {
    const double q = (p == 1.0) ? std::numeric_limits<double>::infinity() : p / (p - 1.0);
    Rng rng(seed);
    double best = 0.0;
    for (int s = 0; s < starts; ++s) {
        Vector x(m.cols());
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.next_complex_gaussian();
        // Also seed with unit columns for the first few starts.
        if (s < std::min<Eigen::Index>(m.cols(), starts / 2)) {
            x.setZero();
            x(s % m.cols()) = 1.0;
        }
        double nx = plain_p_norm(x, p);
        if (nx < 1e-300) continue;
        x /= nx;
        for (int it = 0; it < iters; ++it) {
            Vector y = m * x;
            best = std::max(best, plain_p_norm(y, p));
            Vector z = m.adjoint() * dual_vector(y, p);
            const double nz = plain_p_norm(z, q);
            if (nz < 1e-300) break;
            x = dual_vector(z, q);
            const double nrm = plain_p_norm(x, p);
            if (nrm < 1e-300) break;
            x /= nrm;
        }
    }
    return best;
}

} // namespace detail

/// Induced norm of `m` as an operator (dom, |.|_dom) -> (cod, |.|_cod).
inline NormBracket induced_norm(const Matrix& m, const DiscreteSpace& dom,
                                const DiscreteSpace& cod, std::uint64_t seed = 1,
                                int starts = 20, int iters = 12) {
    if (m.cols() != dom.dim() || m.rows() != cod.dim())
        throw DimensionError("induced_norm: shape mismatch");
    NormBracket b;

    const bool dom_sup = dom.kind() == NormKind::SupNorm;
    const bool cod_sup = cod.kind() == NormKind::SupNorm;

    // Domain 1-norm: exact via columns (spikes are extremal).
    if (!dom_sup && std::abs(dom.p() - 1.0) < 1e-14) {
        double best = 0.0;
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            best = std::max(best, cod.norm(Vector(m.col(j))) / dom.weights()(j));
        b.lower = b.upper = best;
        b.tight = true;
        return b;
    }

    // Codomain sup: exact via row-wise dual norms.
    if (cod_sup) {
        double best = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            Vector row = m.row(i).transpose();
            double v;
            if (dom_sup) {
                v = row.cwiseAbs().sum();
            } else {
                const double p = dom.p();
                const double q = (p == 1.0) ? std::numeric_limits<double>::infinity()
                                            : p / (p - 1.0);
                Vector scaled = row.array() / dom.weights().array().pow(1.0 / p).cast<Complex>();
                v = detail::plain_p_norm(scaled, q);
            }
            best = std::max(best, v);
        }
        b.lower = b.upper = best;
        b.tight = true;
        return b;
    }

    // Weighted p domain and codomain with the same exponent.
    if (!dom_sup && !cod_sup && std::abs(dom.p() - cod.p()) < 1e-12) {
        const double p = dom.p();
        RealVector din = dom.scaling(), dout = cod.scaling();
        Matrix scaled = dout.cast<Complex>().asDiagonal() * m *
                        din.cwiseInverse().cast<Complex>().asDiagonal();
        if (std::abs(p - 2.0) < 1e-14) {
            b.lower = b.upper = detail::spectral_norm(scaled);
            b.tight = true;
            return b;
        }
        double n1 = 0.0;
        for (Eigen::Index j = 0; j < scaled.cols(); ++j)
            n1 = std::max(n1, scaled.col(j).cwiseAbs().sum());
        double ninf = 0.0;
        for (Eigen::Index i = 0; i < scaled.rows(); ++i)
            ninf = std::max(ninf, scaled.row(i).cwiseAbs().sum());
        b.upper = std::pow(n1, 1.0 / p) * std::pow(ninf, 1.0 - 1.0 / p);
        b.lower = detail::boyd_lower(scaled, p, starts, iters, seed);
        b.lower = std::min(b.lower, b.upper);
        b.tight = false;
        return b;
    }

    // Sup domain, p codomain: bracket via triangle inequality / sampling.
    if (dom_sup && !cod_sup) {
        Vector rowsum = m.cwiseAbs().rowwise().sum().cast<Complex>();
        b.upper = cod.norm(rowsum);
        double lo = 0.0;
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            lo = std::max(lo, cod.norm(Vector(m.col(j))));
        Rng rng(seed);
        for (int s = 0; s < starts; ++s) {
            Vector x(m.cols());
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                Complex g = rng.next_complex_gaussian();
                x(i) = (std::abs(g) > 0) ? g / std::abs(g) : 1.0;
            }
            lo = std::max(lo, cod.norm(Vector(m * x)));
        }
        // Phase refinement along the gradient direction.
        b.lower = std::min(lo, b.upper);
        b.tight = false;
        return b;
    }

    throw DomainError("induced_norm: unsupported norm combination");
}

/// Convenience: conservative (upper) value of the induced norm.
inline double induced_norm_ub(const Matrix& m, const DiscreteSpace& dom,
                              const DiscreteSpace& cod) {
    return induced_norm(m, dom, cod).upper;
}

} // namespace semiflow
