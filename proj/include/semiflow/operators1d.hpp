#pragma once

// Uniform-grid finite-difference operators: high-order derivative matrices
// with shifted near-boundary stencils, interpolation/trace rows, and the
// slope-constrained second-derivative row used to fold Neumann data.

#include "semiflow/numerics.hpp"

namespace semiflow {

/// Row window of `width` nodes around i, clipped to [0, n).
inline std::pair<int, int> stencil_window(int i, int n, int width) {
    int lo = i - width / 2;
    lo = std::max(0, std::min(lo, n - width));
    return {lo, lo + width};
}

/// Dense n x n matrix of the order-`deriv` derivative at every grid node,
/// using `width`-node stencils (order of accuracy ~ width - deriv).
inline RealMatrix derivative_matrix_uniform(int n, double h, int deriv, int width) {
    if (width > n) width = n;
    RealMatrix out = RealMatrix::Zero(n, n);
    std::vector<double> nodes(width);
    for (int i = 0; i < n; ++i) {
        auto [lo, hi] = stencil_window(i, n, width);
        for (int k = lo; k < hi; ++k) nodes[k - lo] = (k - i) * h;
        RealMatrix w = fd_weights(0.0, std::span<const double>(nodes.data(), width), deriv);
        for (int k = lo; k < hi; ++k) out(i, k) = w(deriv, k - lo);
    }
    return out;
}

/// Row evaluating the order-`deriv` derivative (0 = value) at an arbitrary
/// point x0 from the nearest `width` grid nodes.
inline RealVector functional_row(const RealVector& grid, double x0, int deriv, int width) {
    const int n = static_cast<int>(grid.size());
    if (width > n) width = n;
    int nearest = 0;
    for (int i = 1; i < n; ++i)
        if (std::abs(grid(i) - x0) < std::abs(grid(nearest) - x0)) nearest = i;
    auto [lo, hi] = stencil_window(nearest, n, width);
    std::vector<double> nodes(width);
    for (int k = lo; k < hi; ++k) nodes[k - lo] = grid(k);
    RealMatrix w = fd_weights(x0, std::span<const double>(nodes.data(), width), deriv);
    RealVector row = RealVector::Zero(n);
    for (int k = lo; k < hi; ++k) row(k) = w(deriv, k - lo);
    return row;
}

} // namespace semiflow
