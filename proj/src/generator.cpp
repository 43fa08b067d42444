#include "semiflow/generator.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "semiflow/pnorm.hpp"

namespace semiflow {

GeneratorRep::GeneratorRep(DiscreteSpace space, Matrix a, std::optional<double> sector_angle,
                           std::optional<double> base_lambda)
    : space_(std::move(space)), mat_(std::move(a)), sector_angle_(sector_angle) {
    if (mat_.rows() != mat_.cols()) throw DimensionError("GeneratorRep: matrix not square");
    if (mat_.rows() != space_.dim())
        throw DimensionError("GeneratorRep: matrix size != space dim");

    Eigen::ComplexEigenSolver<Matrix> es(mat_, /*computeEigenvectors=*/true);
    if (es.info() != Eigen::Success) throw NumericError("GeneratorRep: eigensolver failed");
    eigenvalues_ = es.eigenvalues();
    eigvec_ = es.eigenvectors();

    growth_bound_ = eigenvalues_.real().maxCoeff();
    scale_ = std::max(1.0, eigenvalues_.cwiseAbs().maxCoeff());

    // Use the spectral route only when V D V^{-1} reproduces A to near
    // machine accuracy; otherwise semigroup values fall back to Pade.
    Eigen::PartialPivLU<Matrix> lu(eigvec_);
    eigvec_inv_ = lu.inverse();
    const double recon =
        (eigvec_ * eigenvalues_.asDiagonal() * eigvec_inv_ - mat_).norm();
    spectral_route_ = recon <= 1e-10 * std::max(1.0, mat_.norm());

    base_lambda_ = base_lambda.value_or(growth_bound_ + 1.0);
    if (base_lambda_ <= growth_bound_)
        throw PreconditionError("GeneratorRep: base_lambda must exceed the growth bound");
}

Vector GeneratorRep::apply(const Vector& x) const {
    if (x.size() != dim()) throw DimensionError("GeneratorRep::apply: bad length");
    return mat_ * x;
}

double GeneratorRep::nearest_eigenvalue_distance(Complex lambda, Complex* which) const {
    double best = std::numeric_limits<double>::infinity();
    Complex arg = 0;
    for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
        const double d = std::abs(lambda - eigenvalues_(i));
        if (d < best) {
            best = d;
            arg = eigenvalues_(i);
        }
    }
    if (which) *which = arg;
    return best;
}

OperatorBlock GeneratorRep::resolvent(Complex lambda) const {
    Complex nearest;
    const double dist = nearest_eigenvalue_distance(lambda, &nearest);
    if (dist <= 1e-10 * scale_)
        throw SpectralProximityError("resolvent: lambda within tolerance of spectrum",
                                     nearest);
    Matrix m = Matrix::Identity(dim(), dim()) * lambda - mat_;
    Matrix inv = m.partialPivLu().inverse();
    return OperatorBlock(space_, space_, std::move(inv));
}

Matrix GeneratorRep::semigroup_matrix(double t) const {
    if (t < 0) throw DomainError("semigroup_matrix: t must be >= 0");
    return semigroup_matrix_complex(Complex(t, 0.0));
}

Matrix GeneratorRep::semigroup_matrix_complex(Complex z) const {
    if (z == Complex(0.0, 0.0)) return Matrix::Identity(dim(), dim());
    if (spectral_route_) {
        Vector ez = (eigenvalues_.array() * z).exp();
        return eigvec_ * ez.asDiagonal() * eigvec_inv_;
    }
    Matrix m = z * mat_;
    return m.exp();
}

Vector GeneratorRep::semigroup_apply(double t, const Vector& x) const {
    if (t < 0) throw DomainError("semigroup_apply: t must be >= 0");
    if (x.size() != dim()) throw DimensionError("semigroup_apply: bad length");
    if (t == 0.0) return x;
    if (spectral_route_) {
        Vector c = eigvec_inv_ * x;
        c.array() *= (eigenvalues_.array() * t).exp();
        return eigvec_ * c;
    }
    return semigroup_matrix(t) * x;
}

SectorCertificate GeneratorRep::certify_sector(double theta, std::vector<double> lambda_samples,
                                               std::vector<double> phi_samples,
                                               double cap) const {
    if (!(theta > 0.0 && theta <= 1.5707963267948966 + 1e-12))
        throw DomainError("certify_sector: theta must lie in (0, pi/2]");

    const double margin = std::max(1e-2, 1e-3 * scale_);
    const double lambda0 = growth_bound_ + margin;
    Matrix shifted = mat_ - lambda0 * Matrix::Identity(dim(), dim());
    Vector shifted_eigs = eigenvalues_.array() - lambda0;

    if (lambda_samples.empty())
        lambda_samples = log_grid(1e-3 * margin, 1e6 * std::max(1.0, margin), 48);
    if (phi_samples.empty()) {
        const int k = 7;
        for (int i = 0; i < k; ++i) {
            const double phi = -theta + 1e-3 + (2 * (theta - 1e-3)) * i / (k - 1);
            phi_samples.push_back(phi);
        }
    }

    SectorCertificate cert;
    cert.theta = theta;
    cert.cap = cap;

    const Matrix id = Matrix::Identity(dim(), dim());
    for (double phi : phi_samples) {
        SectorCertificate::PhiRecord rec;
        rec.phi = phi;
        const Complex rot = std::exp(Complex(0.0, phi));
        rec.growth_bound = (shifted_eigs.array() * rot).real().maxCoeff();
        rec.spectral_ok = rec.growth_bound <= 1e-10 * scale_;
        if (!rec.spectral_ok) {
            rec.max_constant = std::numeric_limits<double>::infinity();
            cert.records.push_back(rec);
            continue;
        }
        Matrix a_phi = rot * shifted;
        for (double lam : lambda_samples) {
            // Skip lambda values essentially on top of the rotated spectrum.
            double dist = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < shifted_eigs.size(); ++i)
                dist = std::min(dist, std::abs(Complex(lam, 0.0) - rot * shifted_eigs(i)));
            if (dist <= 1e-12 * scale_) continue;
            Matrix r = (lam * id - a_phi).partialPivLu().inverse();
            const double c = lam * induced_norm_ub(r, space_, space_);
            if (c > rec.max_constant) {
                rec.max_constant = c;
                rec.argmax_lambda = lam;
            }
        }
        cert.records.push_back(rec);
    }

    cert.constant = 0.0;
    cert.passed = true;
    for (const auto& rec : cert.records) {
        cert.constant = std::max(cert.constant, rec.max_constant);
        if (!rec.spectral_ok || rec.max_constant > cap) cert.passed = false;
    }
    return cert;
}

GeneratorRep GeneratorRep::with_sector_angle(double theta) const {
    return GeneratorRep(space_, mat_, theta, base_lambda_);
}

GeneratorRep GeneratorRep::shifted(Complex mu) const {
    Matrix m = mat_ + mu * Matrix::Identity(dim(), dim());
    return GeneratorRep(space_, std::move(m), sector_angle_);
}

double growth_bound(const GeneratorRep& a) { return a.growth_bound(); }

} // namespace semiflow
