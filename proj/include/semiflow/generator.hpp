#pragma once

// Dense realizations of semigroup generators: spectral data, resolvents,
// semigroup evaluation and sampled sectoriality certificates.

#include <optional>
#include <vector>

#include "semiflow/space.hpp"

namespace semiflow {

struct SectorCertificate {
    struct PhiRecord {
        double phi = 0.0;
        double growth_bound = 0.0; // of the rotated, shifted operator
        double max_constant = 0.0; // sup over sampled lambda of |lambda R(lambda, A_phi)|
        double argmax_lambda = 0.0;
        bool spectral_ok = false;
    };

    double theta = 0.0;
    double cap = 0.0;
    double constant = 0.0; // max over phi samples
    bool passed = false;
    std::vector<PhiRecord> records;
};

/// Dense operator realization of a generator A on a discrete space.
///
/// Eigendata is computed eagerly; all members are immutable afterwards, so
/// instances are safe to share across threads.
class GeneratorRep {
public:
    GeneratorRep(DiscreteSpace space, Matrix a,
                 std::optional<double> sector_angle = std::nullopt,
                 std::optional<double> base_lambda = std::nullopt);

    const DiscreteSpace& space() const { return space_; }
    const Matrix& matrix() const { return mat_; }
    Eigen::Index dim() const { return mat_.rows(); }

    double growth_bound() const { return growth_bound_; }
    double scale() const { return scale_; }
    double base_lambda() const { return base_lambda_; }
    std::optional<double> sector_angle() const { return sector_angle_; }

    const Vector& eigenvalues() const { return eigenvalues_; }
    const Matrix& eigenvectors() const { return eigvec_; }
    const Matrix& eigenvectors_inverse() const { return eigvec_inv_; }
    /// True when the eigendecomposition reconstructs A accurately enough to
    /// be used for semigroup/resolvent evaluation.
    bool spectral_route() const { return spectral_route_; }

    Vector apply(const Vector& x) const;

    /// (lambda - A)^{-1} as a dense block. Throws SpectralProximityError when
    /// lambda is within 1e-10 * scale of an eigenvalue.
    OperatorBlock resolvent(Complex lambda) const;

    /// exp(tA), t >= 0.
    Matrix semigroup_matrix(double t) const;
    Vector semigroup_apply(double t, const Vector& x) const;

    /// exp(zA) for complex z (used by rotated-semigroup products).
    Matrix semigroup_matrix_complex(Complex z) const;

    /// Sampled sectoriality certificate: for each phi strictly inside
    /// (-theta, theta), the shifted rotated operator e^{i phi}(A - lambda0)
    /// must keep its spectrum in the closed left half plane and satisfy
    /// sup_lambda |lambda R(lambda, A_phi)| <= cap over the sampled grid.
    SectorCertificate certify_sector(double theta, std::vector<double> lambda_samples = {},
                                     std::vector<double> phi_samples = {},
                                     double cap = 50.0) const;

    GeneratorRep with_sector_angle(double theta) const;
    GeneratorRep shifted(Complex mu) const; // A + mu * I

    double nearest_eigenvalue_distance(Complex lambda, Complex* which = nullptr) const;

private:
    DiscreteSpace space_;
    Matrix mat_;
    Vector eigenvalues_;
    Matrix eigvec_, eigvec_inv_;
    bool spectral_route_ = false;
    double growth_bound_ = 0.0;
    double scale_ = 1.0;
    double base_lambda_ = 1.0;
    std::optional<double> sector_angle_;
};

double growth_bound(const GeneratorRep& a);

} // namespace semiflow
