#pragma once

// Discretized Volterra input-output maps
//   (F u)(r) = C int_0^r T(r-s) B u(s) ds
// on a uniform time grid, stored through their convolution kernel samples
// K_k = C T(k dt) B plus a graded-quadrature integral over the first panel.
// Blocks below use only u(s_j) with j < i, so the realization is strictly
// causal by construction. Dense storage is materialized for small maps and
// for the block algebra (composition, block assembly, Schur reductions).

#include <functional>
#include <memory>
#include <optional>
#include <variant>

#include "semiflow/generator.hpp"
#include "semiflow/pnorm.hpp"
#include "semiflow/scales.hpp"

namespace semiflow {

// ---------------------------------------------------------------------------
// Control/observation triples
// ---------------------------------------------------------------------------

struct FullSpace {};
struct FractionalDomain {
    double gamma;
};
struct GraphDomain {
    std::shared_ptr<const OperatorBlock> k;
};
using ZDescriptor = std::variant<FullSpace, FractionalDomain, GraphDomain>;

/// (A, B, C) with B: U -> X_{-1} coordinates and C: Z -> Y. The intermediate
/// space Z shares X's coordinates; its descriptor fixes the Z-norm.
struct ControlObsTriple {
    std::shared_ptr<const GeneratorRep> a;
    OperatorBlock b;
    OperatorBlock c;
    ZDescriptor z_descriptor = FullSpace{};

    ControlObsTriple(std::shared_ptr<const GeneratorRep> a_, OperatorBlock b_, OperatorBlock c_,
                     ZDescriptor z = FullSpace{})
        : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), z_descriptor(std::move(z)) {
        if (!a) throw DimensionError("ControlObsTriple: null generator");
        if (b.matrix.rows() != a->dim() || c.matrix.cols() != a->dim())
            throw DimensionError("ControlObsTriple: B/C shapes do not match A");
    }

    const DiscreteSpace& u_space() const { return b.domain; }
    const DiscreteSpace& y_space() const { return c.codomain; }
};

// ---------------------------------------------------------------------------
// Input-output maps
// ---------------------------------------------------------------------------

class InputOutputMap {
public:
    /// Build from a kernel sampler tau -> C T(tau) B. `singular_scale`
    /// controls the graded depth of the first-panel integral (resolve down to
    /// tau ~ 1e-3 / scale).
    static InputOutputMap from_kernel(DiscreteSpace u_space, DiscreteSpace y_space, double t,
                                      int m, double p, const std::function<Matrix(double)>& kernel,
                                      double singular_scale);

    static InputOutputMap from_triple(const ControlObsTriple& triple, double t, int m, double p);

    /// Wrap an explicit stacked block matrix ((m+1) blocks per side).
    static InputOutputMap from_dense(DiscreteSpace u_space, DiscreteSpace y_space, double t,
                                     int m, double p, Matrix dense);

    static InputOutputMap identity_map(const DiscreteSpace& space, double t, int m, double p);
    static InputOutputMap zero_map(const DiscreteSpace& u_space, const DiscreteSpace& y_space,
                                   double t, int m, double p);

    double t_final() const { return t_; }
    int steps() const { return m_; }
    double p() const { return p_; }
    const DiscreteSpace& input_space() const { return u_space_; }
    const DiscreteSpace& output_space() const { return y_space_; }
    Eigen::Index node_input_dim() const { return u_space_.dim(); }
    Eigen::Index node_output_dim() const { return y_space_.dim(); }
    Eigen::Index total_input_dim() const { return (m_ + 1) * u_space_.dim(); }
    Eigen::Index total_output_dim() const { return (m_ + 1) * y_space_.dim(); }

    /// Block coupling output node i to input node j.
    Matrix block(int i, int j) const;
    bool strictly_causal() const;

    Vector apply(const Vector& stacked) const;
    Vector apply_adjoint(const Vector& stacked) const;

    bool has_dense() const { return dense_.has_value(); }
    const Matrix& dense_matrix() const;
    InputOutputMap with_dense() const; // force materialization

    /// L^p([0, t], U) realized on the stacked coordinates: trapezoid time
    /// weights tensored with the node-space weights.
    DiscreteSpace stacked_input_space() const { return stacked(u_space_); }
    DiscreteSpace stacked_output_space() const { return stacked(y_space_); }
    RealVector time_weights() const { return trapezoid_weights(m_ + 1, t_); }

    // Dense-backed algebra.
    InputOutputMap compose(const InputOutputMap& inner) const;
    InputOutputMap plus(const InputOutputMap& other) const;
    InputOutputMap scaled(Complex factor) const;
    /// Assemble a block operator; null entries mean zero blocks. All entries
    /// must share the time grid and p.
    static InputOutputMap assemble_blocks(
        const std::vector<std::vector<const InputOutputMap*>>& blocks);

private:
    InputOutputMap(DiscreteSpace u, DiscreteSpace y, double t, int m, double p)
        : u_space_(std::move(u)), y_space_(std::move(y)), t_(t), m_(m), p_(p) {}

    DiscreteSpace stacked(const DiscreteSpace& node) const;

    DiscreteSpace u_space_;
    DiscreteSpace y_space_;
    double t_;
    int m_;
    double p_;

    // Toeplitz representation: K_k = kernel(k dt), k = 1..m, and the graded
    // first-panel integral G1.
    std::vector<Matrix> kernel_;
    Matrix g1_;
    bool toeplitz_ = false;

    std::optional<Matrix> dense_;
};

// ---------------------------------------------------------------------------
// Norms and feedback
// ---------------------------------------------------------------------------

/// Induced L^p -> L^p norm of the map on the stacked weighted spaces.
/// Exact for p in {1, 2} and sup; otherwise a certified bracket.
NormBracket io_norm(const InputOutputMap& f, std::uint64_t seed = 1);

struct FeedbackReport {
    Verdict verdict = Verdict::FAIL;
    double condition_number = std::numeric_limits<double>::infinity();
    double solve_residual = std::numeric_limits<double>::infinity();
    double inverse_norm = std::numeric_limits<double>::infinity();
};

/// Invertibility of (Id - F) on the stacked space. PASS needs a condition
/// number <= 1e8 and a random-solve residual <= 1e-6.
FeedbackReport feedback_check(const InputOutputMap& f, std::uint64_t seed = 7);

/// Solve (Id - F) x = b on the stacked coordinates.
Vector feedback_solve(const InputOutputMap& f, const Vector& b);

} // namespace semiflow
