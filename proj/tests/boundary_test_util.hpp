#pragma once

// Mixed-trace boundary system on [0, pi]: A_m = d^2/ds^2, L = (f'(0), f(pi)).
// The kernel realization folds the Neumann datum through a slope-constrained
// stencil at s = 0 and eliminates the node at pi, so the constrained solve is
// exactly (lambda - A) x = W d.

#include "semiflow/boundary.hpp"
#include "semiflow/operators1d.hpp"
#include "test_util.hpp"

namespace semiflow::testing {

inline BoundarySystem mixed_trace_system(int n, double p = 2.0) {
    const double h = kPi / n;
    // Extended grid includes the eliminated node at pi; the state keeps
    // nodes 0..n-1.
    RealMatrix d2_ext = derivative_matrix_uniform(n + 1, h, 2, 7);

    Matrix a_ker = Matrix::Zero(n, n);
    Matrix w = Matrix::Zero(n, 2);
    for (int i = 1; i < n; ++i) {
        for (int j = 0; j < n; ++j) a_ker(i, j) = d2_ext(i, j);
        w(i, 1) = d2_ext(i, n); // coefficient of the eliminated f(pi) = d_2
    }
    {
        // Slope-constrained second derivative at s = 0: D2 f(0) =
        // sum c_j f(s_j) + c_g f'(0).
        std::vector<double> nodes(6);
        for (int k = 0; k < 6; ++k) nodes[k] = k * h;
        auto [cvals, cslope] = fd_second_derivative_with_slope(0.0, nodes);
        for (int k = 0; k < 6; ++k) a_ker(0, k) = cvals(k);
        w(0, 0) = cslope;
    }

    RealVector grid = RealVector::LinSpaced(n, 0.0, (n - 1) * h);
    DiscreteSpace state = DiscreteSpace::weighted_p(
        grid, p, trapezoid_weights(n, grid(n - 1) - grid(0)));

    BoundarySystem sys{
        DiscreteSpace::coords_p(2, p),
        std::make_shared<GeneratorRep>(state, a_ker, kPi / 2.0),
        std::move(w),
        Matrix(derivative_matrix_uniform(n, h, 2, 7).cast<Complex>()),
        Matrix::Zero(2, n),
        Matrix::Zero(n, n),
        Matrix::Zero(2, n),
        /*mu=*/0.0,
        FullSpace{},
        std::nullopt};
    sys.l_rows.row(0) = functional_row(grid, 0.0, 1, 7).cast<Complex>().transpose();
    sys.l_rows.row(1) = functional_row(grid, kPi, 0, 7).cast<Complex>().transpose();
    return sys;
}

/// Closed-form kernel element of lambda - d^2/ds^2 with f'(0) = d1,
/// f(pi) = d2.
inline Vector mixed_trace_kernel(const RealVector& grid, double lambda, Complex d1, Complex d2) {
    const double r = std::sqrt(lambda);
    const double ch = std::cosh(r * kPi), sh = std::sinh(r * kPi);
    // f = a cosh(r s) + b sinh(r s); f'(0) = b r = d1; f(pi) = a ch + b sh = d2.
    const Complex b = d1 / r;
    const Complex a = (d2 - b * sh) / ch;
    Vector out(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        out(i) = a * std::cosh(r * grid(i)) + b * std::sinh(r * grid(i));
    return out;
}

} // namespace semiflow::testing
