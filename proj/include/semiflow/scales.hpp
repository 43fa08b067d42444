#pragma once

// Intermediate and extrapolated space machinery: graph norms, X_{-1} norms,
// fractional powers of shifted generators, Favard-norm estimators, embedding
// chain checks and rotated generators.

#include <variant>
#include <vector>

#include "semiflow/generator.hpp"

namespace semiflow {

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// |x| + |Ax| in the norm of A's space.
double graph_norm(const GeneratorRep& a, const Vector& x);

/// |R(lambda0, A) x|, the extrapolation-space norm at the base point.
double xminus1_norm(const GeneratorRep& a, const Vector& x);

// ---------------------------------------------------------------------------
// Fractional powers
// ---------------------------------------------------------------------------

/// Principal-branch (lambda - A)^gamma for gamma in (-1, 1] \ {0}.
struct FractionalPower {
    DiscreteSpace space;
    double lambda_shift = 0.0;
    double gamma = 0.0;
    Matrix matrix;
    bool via_quadrature = false; // Balakrishnan route instead of eigendata

    Vector apply(const Vector& x) const { return matrix * x; }
};

struct FractionalPowerOptions {
    bool force_quadrature = false; // use the Balakrishnan integral even when
                                   // spectral data is available
    double tolerance = 1e-10;
    int max_nodes = 8193;
};

FractionalPower fractional_power(const GeneratorRep& a, double lambda, double gamma,
                                 const FractionalPowerOptions& opts = {});

// ---------------------------------------------------------------------------
// Favard estimates
// ---------------------------------------------------------------------------

struct FavardEstimate {
    double alpha = 0.0;
    std::vector<double> lambda_grid;
    double value = 0.0;
    double argmax_lambda = 0.0;
    double last_decade_slope = 0.0;
    bool suspect_unbounded = false; // running max still rising in the top decade
};

/// Default 48-point grid over [max(1, 2 gb^+), 1e6].
std::vector<double> default_favard_grid(const GeneratorRep& a);

/// Sampled sup over the lambda grid of |lambda^alpha A R(lambda, A) x|.
FavardEstimate favard_norm(const GeneratorRep& a, double alpha, const Vector& x,
                           std::vector<double> lambda_grid = {});

/// Batched variant: one estimate per column of `targets`, sharing the
/// resolvent factorization across columns.
std::vector<FavardEstimate> favard_norm_batch(const GeneratorRep& a, double alpha,
                                              const Matrix& targets,
                                              std::vector<double> lambda_grid = {});

/// Columnwise variant for operator targets: the max over columns of the
/// vector estimate, with the worst column's diagnostics.
FavardEstimate favard_norm(const GeneratorRep& a, double alpha, const OperatorBlock& target,
                           std::vector<double> lambda_grid = {});

// ---------------------------------------------------------------------------
// Embedding chain  D((-A)^alpha) -> Fav_alpha -> D((-A)^delta)
// ---------------------------------------------------------------------------

enum class Verdict { PASS, SUSPECT, FAIL };

const char* to_string(Verdict v);

/// Drift diagnostic across a mesh family; PASS needs <= 20% drift between the
/// two finest meshes, FAIL marks >= 2x growth per refinement.
struct PlateauDiagnostic {
    std::vector<double> constants;
    double drift = 0.0; // relative change between the two finest meshes
    Verdict verdict = Verdict::FAIL;
};

PlateauDiagnostic plateau_verdict(std::vector<double> constants);

struct EmbeddingChainReport {
    double alpha = 0.0, delta = 0.0;
    PlateauDiagnostic upper; // Favard vs fractional graph norm
    PlateauDiagnostic lower; // delta-power vs Favard
    bool pass = false;
};

EmbeddingChainReport check_embedding_chain(std::span<const GeneratorRep> family, double alpha,
                                           double delta, int samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Rotations
// ---------------------------------------------------------------------------

/// e^{i phi} A; requires |phi| < the certified sector angle of A.
GeneratorRep rotate_generator(const GeneratorRep& a, double phi);

/// Decompose z = r_plus e^{i phi} + r_minus e^{-i phi} with r_pm >= 0 by
/// solving the 2x2 system of the oblique projections. Throws DomainError when
/// z lies outside the closed sector of half-angle phi.
std::pair<double, double> sector_split(double phi, Complex z);

/// exp(r_plus e^{i phi} A) * exp(r_minus e^{-i phi} A); equals exp(zA).
Matrix rotated_semigroup_product(const GeneratorRep& a, double phi, Complex z);

/// Relative residual of (-A_phi)^{-alpha} = e^{-i phi alpha} (-A)^{-alpha}.
double rotation_power_identity(const GeneratorRep& a, double phi, double alpha);

} // namespace semiflow
