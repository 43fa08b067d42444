#pragma once

// Small numerical utilities shared across the library: deterministic random
// streams, finite-difference stencil generation, quadrature rules and
// least-squares fits.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "semiflow/errors.hpp"

namespace semiflow {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Deterministic random streams
// ---------------------------------------------------------------------------

/// Counter-based deterministic RNG (splitmix64 core). Identical output for
/// identical seeds on every platform, independent of call interleaving.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in (0, 1].
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Complex next_complex_gaussian() {
        return {next_gaussian(), next_gaussian()};
    }

    /// Derive an independent stream (for per-item seeding in parallel runs).
    Rng fork(std::uint64_t salt) {
        Rng r(state_ ^ (0xa0761d6478bd642full * (salt + 1)));
        r.next_u64();
        return r;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Stable 64-bit FNV-1a hash of a string, for salting per-item seeds.
inline std::uint64_t hash64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Finite-difference stencils
// ---------------------------------------------------------------------------

/// Fornberg weights: row d of the result holds the weights of the d-th
/// derivative at x0 on the given nodes. Nodes need not be uniform.
inline RealMatrix fd_weights(double x0, std::span<const double> nodes, int max_order) {
    const int n = static_cast<int>(nodes.size());
    if (n == 0 || max_order < 0 || max_order >= n)
        throw DimensionError("fd_weights: need more nodes than derivative order");
    RealMatrix c = RealMatrix::Zero(max_order + 1, n);
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, max_order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c(k, i) = c1 * (k * c(k - 1, i - 1) - c5 * c(k, i - 1)) / c2;
                c(0, i) = -c1 * c5 * c(0, i - 1) / c2;
            }
            for (int k = mn; k >= 1; --k)
                c(k, j) = (c4 * c(k, j) - k * c(k - 1, j)) / c3;
            c(0, j) = c4 * c(0, j) / c3;
        }
        c1 = c2;
    }
    return c;
}

/// Weights for approximating f''(x0) from values f(nodes) plus the known
/// first derivative f'(x0). Returns (value weights, weight of f'(x0)).
/// Used to fold Neumann data into a one-sided second-derivative row.
inline std::pair<RealVector, double>
fd_second_derivative_with_slope(double x0, std::span<const double> nodes) {
    const int n = static_cast<int>(nodes.size());
    if (n < 3) throw DimensionError("fd_second_derivative_with_slope: need >= 3 nodes");
    // Exactness on monomials (x-x0)^k, k = 0..n. Unknowns: n value weights + 1
    // slope weight.
    RealMatrix m = RealMatrix::Zero(n + 1, n + 1);
    RealVector rhs = RealVector::Zero(n + 1);
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j < n; ++j)
            m(k, j) = std::pow(nodes[j] - x0, k);
        m(k, n) = (k == 1) ? 1.0 : 0.0;
        rhs(k) = (k == 2) ? 2.0 : 0.0;
    }
    RealVector sol = m.fullPivLu().solve(rhs);
    return {sol.head(n), sol(n)};
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadNode {
    double x;
    double w;
};

/// 8-point Gauss-Legendre nodes/weights on [a, b].
inline std::vector<QuadNode> gauss8(double a, double b) {
    static const double xs[4] = {0.1834346424956498, 0.5255324099163290,
                                 0.7966664774136267, 0.9602898564975363};
    static const double ws[4] = {0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::vector<QuadNode> out;
    out.reserve(8);
    for (int i = 3; i >= 0; --i) out.push_back({mid - half * xs[i], half * ws[i]});
    for (int i = 0; i < 4; ++i) out.push_back({mid + half * xs[i], half * ws[i]});
    return out;
}

/// Geometrically graded Gauss panels on (eps, b] refining toward a = 0-side
/// endpoint `a`: panels [a + (b-a)2^{-l-1}, a + (b-a)2^{-l}] for l = 0..levels-1.
/// Handles integrable endpoint singularities without ever sampling `a`.
inline std::vector<QuadNode> graded_gauss(double a, double b, int levels) {
    std::vector<QuadNode> out;
    double hi = b;
    for (int l = 0; l < levels; ++l) {
        const double lo = a + (b - a) * std::pow(0.5, l + 1);
        auto panel = gauss8(lo, hi);
        out.insert(out.end(), panel.begin(), panel.end());
        hi = lo;
    }
    return out;
}

/// Composite trapezoid weights for n uniform nodes spanning length L.
inline RealVector trapezoid_weights(int n, double length) {
    if (n < 2) throw DimensionError("trapezoid_weights: need n >= 2");
    const double h = length / (n - 1);
    RealVector w = RealVector::Constant(n, h);
    w(0) = 0.5 * h;
    w(n - 1) = 0.5 * h;
    return w;
}

// ---------------------------------------------------------------------------
// Fits and misc
// ---------------------------------------------------------------------------

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least-squares line through (x_i, y_i).
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw DimensionError("fit_line: need matching arrays of length >= 2");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) throw NumericError("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

/// Log-spaced grid with `count` points on [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, int count) {
    if (lo <= 0 || hi <= lo || count < 2) throw DomainError("log_grid: need 0 < lo < hi");
    std::vector<double> g(count);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < count; ++i)
        g[i] = std::exp(llo + (lhi - llo) * i / (count - 1));
    return g;
}

inline double relative_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

} // namespace semiflow
