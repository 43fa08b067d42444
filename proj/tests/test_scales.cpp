#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "semiflow/pnorm.hpp"
#include "semiflow/probes.hpp"
#include "semiflow/scales.hpp"
#include "test_util.hpp"

using namespace semiflow;
using namespace semiflow::testing;

TEST_CASE("graph and extrapolation norms") {
    SUBCASE("zero vector") {
        auto a = dirichlet_laplacian(16);
        CHECK(graph_norm(a, Vector(Vector::Zero(16))) == 0.0);
    }
    SUBCASE("scalar sup-norm case") {
        auto s = DiscreteSpace::coords_sup(1);
        GeneratorRep a(s, Matrix(-2.0 * Matrix::Identity(1, 1)));
        CHECK(graph_norm(a, Vector(Vector::Ones(1))) == doctest::Approx(3.0));
    }
    SUBCASE("sine mode has graph norm ~ 2 |x|") {
        auto a = dirichlet_laplacian(128);
        Vector x = sine_mode(a, 1);
        const double nx = a.space().norm(x);
        CHECK(std::abs(graph_norm(a, x) - 2.0 * nx) < 1e-2 * nx);
    }
    SUBCASE("xminus1 norm, scalar with base point 0") {
        auto s = DiscreteSpace::coords_sup(1);
        GeneratorRep a(s, Matrix(-Matrix::Identity(1, 1)), std::nullopt, 0.0);
        CHECK(xminus1_norm(a, Vector(Vector::Ones(1))) == doctest::Approx(1.0));
    }
    SUBCASE("xminus1(A x) equals |A R(lambda0) x|") {
        auto a = dirichlet_laplacian(48);
        ProbeEnsemble probes(9);
        Vector x = probes.band_limited(a.space(), 0);
        const double lhs = xminus1_norm(a, a.apply(x));
        Matrix r = a.resolvent(a.base_lambda()).matrix;
        const double rhs = a.space().norm(Vector(a.matrix() * (r * x)));
        CHECK(relative_diff(lhs, rhs) < 1e-10);
    }
}

TEST_CASE("fractional powers") {
    SUBCASE("gamma = 1 is exact") {
        auto a = dirichlet_laplacian(16);
        auto fp = fractional_power(a, 2.0, 1.0);
        Matrix expected = 2.0 * Matrix::Identity(16, 16) - a.matrix();
        CHECK((fp.matrix - expected).norm() == 0.0);
    }
    SUBCASE("scalar square root") {
        auto a = diagonal_generator({-3.0});
        auto fp = fractional_power(a, 1.0, 0.5);
        CHECK(std::abs(fp.matrix(0, 0) - 2.0) < 1e-12);
    }
    SUBCASE("inverse identity") {
        auto a = dirichlet_laplacian(32);
        auto fp = fractional_power(a, 0.0, 0.6);
        auto fm = fractional_power(a, 0.0, -0.6);
        Matrix prod = fp.matrix * fm.matrix;
        CHECK((prod - Matrix::Identity(32, 32)).norm() < 1e-9 * prod.norm());
    }
    SUBCASE("additivity of exponents") {
        auto a = dirichlet_laplacian(32);
        Matrix lhs = fractional_power(a, 0.0, 0.3).matrix * fractional_power(a, 0.0, 0.4).matrix;
        Matrix rhs = fractional_power(a, 0.0, 0.7).matrix;
        CHECK((lhs - rhs).norm() / rhs.norm() < 1e-8);
    }
    SUBCASE("spectral route vs Balakrishnan quadrature, n = 128") {
        auto a = dirichlet_laplacian(128);
        auto eig = fractional_power(a, 0.0, 0.5);
        FractionalPowerOptions opts;
        opts.force_quadrature = true;
        auto quad = fractional_power(a, 0.0, 0.5, opts);
        CHECK(quad.via_quadrature);
        CHECK((eig.matrix - quad.matrix).norm() / eig.matrix.norm() < 1e-6);
    }
    SUBCASE("preconditions") {
        auto a = diagonal_generator({-1.0});
        CHECK_THROWS_AS(fractional_power(a, -2.0, 0.5), PreconditionError);
        CHECK_THROWS_AS(fractional_power(a, 1.0, 0.0), DomainError);
        CHECK_THROWS_AS(fractional_power(a, 1.0, 1.5), DomainError);
    }
}

TEST_CASE("favard norm estimates") {
    SUBCASE("scalar calculus oracle: argmax lambda = 1, value |x|/2") {
        auto a = diagonal_generator({-1.0, -2.0});
        Vector x = Vector::Zero(2);
        x(0) = 3.0; // eigenvector with eigenvalue -1, norm 3
        auto est = favard_norm(a, 0.5, x);
        // sup_l l^{1/2} / (l+1) attained at l = 1 with value 1/2.
        CHECK(est.argmax_lambda == doctest::Approx(1.0));
        CHECK(est.value == doctest::Approx(0.5 * a.space().norm(x)).epsilon(1e-6));
        CHECK_FALSE(est.suspect_unbounded);
    }
    SUBCASE("smooth element of D(A): flag clear") {
        auto a = dirichlet_laplacian(64);
        auto est = favard_norm(a, 1.0, Vector(sine_mode(a, 1)));
        CHECK_FALSE(est.suspect_unbounded);
        CHECK(est.value < 10.0);
    }
    SUBCASE("step vector on sup-norm Laplacian: slope criterion fires at n = 256") {
        auto a = dirichlet_laplacian(256, 2.0, /*sup_norm=*/true);
        Vector x(a.dim());
        for (Eigen::Index i = 0; i < a.dim(); ++i)
            x(i) = a.space().grid()(i) > kPi / 2.0 ? 1.0 : 0.0;
        // Grid spanning 6 decades, kept below the discrete saturation scale
        // 1/h^2 so the top decade still sees the continuum growth.
        auto est = favard_norm(a, 1.0, x, log_grid(5e-3, 5e3, 48));
        CHECK(est.suspect_unbounded);
        CHECK(est.last_decade_slope > 0.05);
    }
    SUBCASE("grid must lie above the growth bound") {
        auto a = diagonal_generator({3.0}); // gb = 3
        CHECK_THROWS_AS(favard_norm(a, 0.5, Vector(Vector::Ones(1)), {1.0, 10.0}),
                        PreconditionError);
    }
    SUBCASE("monotone in alpha on a grid with lambda >= 1") {
        auto a = dirichlet_laplacian(32);
        ProbeEnsemble probes(2);
        Vector x = probes.band_limited(a.space(), 3);
        auto grid = log_grid(1.0, 1e6, 48);
        double prev = 0.0;
        for (double alpha : {0.3, 0.5, 0.7, 0.9}) {
            auto est = favard_norm(a, alpha, x, grid);
            CHECK(est.value >= prev - 1e-12);
            prev = est.value;
        }
    }
}

TEST_CASE("embedding chain") {
    SUBCASE("Laplacian family passes for alpha = 0.8, delta = 0.2") {
        std::vector<GeneratorRep> family;
        for (int n : {32, 64, 128}) family.push_back(dirichlet_laplacian(n));
        auto rep = check_embedding_chain(family, 0.8, 0.2, 8, 42);
        CHECK(rep.pass);
    }
    SUBCASE("delta >= alpha rejected") {
        std::vector<GeneratorRep> family;
        for (int n : {16, 32}) family.push_back(dirichlet_laplacian(n));
        CHECK_THROWS_AS(check_embedding_chain(family, 0.3, 0.5, 4, 1), PreconditionError);
    }
    SUBCASE("A = -I: constants moderate and stable") {
        std::vector<GeneratorRep> family;
        for (int k = 0; k < 2; ++k)
            family.push_back(diagonal_generator({-1.0, -1.0, -1.0}));
        auto rep = check_embedding_chain(family, 0.8, 0.2, 6, 5);
        CHECK(rep.pass);
        CHECK(rep.upper.constants.back() > 0.1);
        CHECK(rep.upper.constants.back() < 2.0);
    }
}

TEST_CASE("rotations") {
    SUBCASE("phi = 0 returns A") {
        auto a = dirichlet_laplacian(16);
        auto r = rotate_generator(a, 0.0);
        CHECK((r.matrix() - a.matrix()).norm() == 0.0);
    }
    SUBCASE("scalar rotation") {
        auto a = diagonal_generator({-1.0});
        auto r = rotate_generator(a, kPi / 4.0);
        CHECK(std::abs(r.matrix()(0, 0) - (-std::exp(Complex(0, kPi / 4)))) < 1e-15);
    }
    SUBCASE("rotation resolvent identity") {
        auto a = dirichlet_laplacian(32);
        const double phi = kPi / 6.0;
        auto aphi = rotate_generator(a, phi);
        const Complex lam(2.0, 0.5);
        Matrix lhs = aphi.resolvent(lam).matrix;
        const Complex eim = std::exp(Complex(0.0, -phi));
        Matrix rhs = eim * a.resolvent(eim * lam).matrix;
        CHECK((lhs - rhs).norm() / rhs.norm() < 1e-10);
    }
    SUBCASE("rotation requires a sector angle") {
        DiscreteSpace s = DiscreteSpace::coords_p(1, 2.0);
        GeneratorRep a(s, Matrix(-Matrix::Identity(1, 1)));
        CHECK_THROWS_AS(rotate_generator(a, 0.3), DomainError);
    }
}

TEST_CASE("rotated semigroup product") {
    const double phi = kPi / 5.0;
    auto a = dirichlet_laplacian(32);
    SUBCASE("real z splits evenly") {
        auto [rp, rm] = sector_split(phi, Complex(0.8, 0.0));
        CHECK(rp == doctest::Approx(0.8 / (2.0 * std::cos(phi))));
        CHECK(rm == doctest::Approx(rp));
        Matrix prod = rotated_semigroup_product(a, phi, Complex(0.8, 0.0));
        Matrix direct = a.semigroup_matrix(0.8);
        CHECK((prod - direct).norm() / direct.norm() < 1e-9);
    }
    SUBCASE("boundary ray") {
        auto [rp, rm] = sector_split(phi, 0.6 * std::exp(Complex(0, phi)));
        CHECK(rp == doctest::Approx(0.6));
        CHECK(std::abs(rm) < 1e-12);
    }
    SUBCASE("z = 0 gives the identity") {
        Matrix prod = rotated_semigroup_product(a, phi, Complex(0.0, 0.0));
        CHECK((prod - Matrix::Identity(32, 32)).norm() < 1e-14);
    }
    SUBCASE("z outside the sector rejected") {
        CHECK_THROWS_AS(sector_split(phi, std::exp(Complex(0.0, phi + 0.1))), DomainError);
    }
    SUBCASE("product equals exp(zA) off the axis") {
        const Complex z = 0.5 * std::exp(Complex(0.0, 0.55 * phi));
        Matrix prod = rotated_semigroup_product(a, phi, z);
        Matrix direct = a.semigroup_matrix_complex(z);
        CHECK((prod - direct).norm() / direct.norm() < 1e-9);
    }
}

TEST_CASE("rotation power identity") {
    SUBCASE("scalar exactness") {
        auto a = diagonal_generator({-1.0});
        CHECK(rotation_power_identity(a, 0.7, 0.4) < 1e-12);
    }
    SUBCASE("Laplacian n = 64, phi = pi/6, alpha = 1/2") {
        auto a = dirichlet_laplacian(64);
        CHECK(rotation_power_identity(a, kPi / 6.0, 0.5) < 1e-8);
    }
    SUBCASE("phi = 0 residual vanishes") {
        auto a = dirichlet_laplacian(16);
        CHECK(rotation_power_identity(a, 0.0, 0.5) < 1e-14);
    }
}

TEST_CASE("smoothing decay of fractional powers") {
    // |(-A)^g T(t)| <= M t^{-g}: log-log slope >= -g - 0.1 and the envelope
    // constant reproduces the bound on every sample.
    auto a = dirichlet_laplacian(64);
    const double g = 0.5;
    Matrix pg = fractional_power(a, 0.0, g).matrix;
    std::vector<double> lt, ln;
    double env = 0.0;
    for (double t : log_grid(1e-4, 1.0, 13)) {
        Matrix m = pg * a.semigroup_matrix(t);
        const double nrm = induced_norm(m, a.space(), a.space()).upper;
        lt.push_back(std::log(t));
        ln.push_back(std::log(nrm));
        env = std::max(env, nrm * std::pow(t, g));
    }
    const double slope = fit_line(lt, ln).slope;
    CHECK(slope >= -g - 0.1);
    for (std::size_t i = 0; i < lt.size(); ++i)
        CHECK(std::exp(ln[i]) <= env * std::pow(std::exp(lt[i]), -g) * (1 + 1e-9));
}

TEST_CASE("Favard norms are rotation-stable") {
    std::vector<double> ratios;
    for (int n : {32, 64}) {
        auto a = dirichlet_laplacian(n);
        auto aphi = rotate_generator(a, kPi / 6.0);
        ProbeEnsemble probes(23);
        double worst = 0.0;
        for (int i = 0; i < 6; ++i) {
            Vector x = probes.band_limited(a.space(), i);
            const double fa = favard_norm(a, 0.5, x).value;
            const double fphi = favard_norm(aphi, 0.5, x).value;
            worst = std::max(worst, std::max(fa / fphi, fphi / fa));
        }
        CHECK(worst < 5.0);
        ratios.push_back(worst);
    }
    CHECK(plateau_verdict(ratios).verdict == Verdict::PASS);
}
