#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "semiflow/admissibility.hpp"
#include "test_util.hpp"

using namespace semiflow;
using namespace semiflow::testing;

namespace {

ControlObsTriple scalar_triple(Complex a_val) {
    auto space = DiscreteSpace::coords_p(1, 2.0);
    auto a = std::make_shared<GeneratorRep>(space, Matrix(a_val * Matrix::Identity(1, 1)));
    OperatorBlock b(space, space, Matrix::Identity(1, 1));
    OperatorBlock c(space, space, Matrix::Identity(1, 1));
    return ControlObsTriple(a, b, c);
}

ControlObsTriple laplacian_triple(int n, double p = 2.0) {
    auto a = std::make_shared<GeneratorRep>(dirichlet_laplacian(n, p));
    OperatorBlock b(a->space(), a->space(), Matrix::Identity(n, n));
    OperatorBlock c(a->space(), a->space(), Matrix::Identity(n, n));
    return ControlObsTriple(a, b, c);
}

} // namespace

TEST_CASE("integration operator blocks") {
    auto triple = scalar_triple(0.0);
    SUBCASE("constant input integrates exactly") {
        auto f = build_io_map(triple, 1.0, 64, 2.0);
        Vector u = Vector::Ones(f.total_input_dim());
        Vector y = f.apply(u);
        for (int i = 0; i <= 64; ++i)
            CHECK(std::abs(y(i) - double(i) / 64.0) < 1e-12);
    }
    SUBCASE("strict causality: late input gives no early output") {
        auto f = build_io_map(triple, 1.0, 32, 2.0);
        Vector u = Vector::Zero(f.total_input_dim());
        for (int j = 16; j <= 32; ++j) u(j) = 1.0; // supported on [t/2, t]
        Vector y = f.apply(u);
        for (int i = 0; i < 16; ++i) CHECK(std::abs(y(i)) == 0.0);
        CHECK(std::abs(y(32)) > 0.0);
        CHECK(f.strictly_causal());
    }
    SUBCASE("blocks vanish for j >= i") {
        auto f = build_io_map(triple, 1.0, 16, 2.0);
        for (int i = 0; i <= 16; ++i)
            for (int j = i; j <= 16; ++j) CHECK(f.block(i, j).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("closed-form kernel oracle") {
    // A = -a scalar: (F_t u)(r) = int_0^r e^{-a(r-s)} u(s) ds; for u = 1 this
    // is (1 - e^{-ar})/a.
    const double a_coef = 1.0;
    auto triple = scalar_triple(-a_coef);
    auto f = build_io_map(triple, 1.0, 512, 2.0);
    Vector u = Vector::Ones(f.total_input_dim());
    Vector y = f.apply(u);
    double worst = 0.0;
    for (int i = 0; i <= 512; ++i) {
        const double r = double(i) / 512.0;
        worst = std::max(worst, std::abs(y(i) - (1.0 - std::exp(-a_coef * r)) / a_coef));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("io norms") {
    SUBCASE("zero map") {
        auto s = DiscreteSpace::coords_p(1, 2.0);
        auto f = InputOutputMap::zero_map(s, s, 1.0, 16, 2.0);
        CHECK(io_norm(f).upper == 0.0);
    }
    SUBCASE("Volterra operator norm 2/pi at p = 2") {
        auto f = build_io_map(scalar_triple(0.0), 1.0, 512, 2.0);
        auto b = io_norm(f);
        CHECK(b.tight);
        CHECK(std::abs(b.lower - 2.0 / kPi) < 1e-3);
    }
    SUBCASE("bracket ordering for p = 1.5") {
        auto f = build_io_map(scalar_triple(-0.5), 1.0, 64, 1.5);
        auto b = io_norm(f);
        CHECK(b.lower <= b.upper * (1 + 1e-12));
        CHECK(b.lower > 0.0);
    }
    SUBCASE("refinement convergence of the norm") {
        auto triple = laplacian_triple(24);
        const double n1 = io_norm(build_io_map(triple, 0.5, 32, 2.0)).upper;
        const double n2 = io_norm(build_io_map(triple, 0.5, 64, 2.0)).upper;
        CHECK(relative_diff(n1, n2) < 0.02);
    }
}

TEST_CASE("feedback checks") {
    SUBCASE("small gain passes") {
        auto f = build_io_map(scalar_triple(-1.0), 0.5, 32, 2.0); // norm ~ t < 1
        CHECK(io_norm(f).upper < 0.5);
        auto rep = feedback_check(f);
        CHECK(rep.verdict == Verdict::PASS);
        CHECK(rep.condition_number < 10.0);
    }
    SUBCASE("identity map fails") {
        auto s = DiscreteSpace::coords_p(1, 2.0);
        auto f = InputOutputMap::identity_map(s, 1.0, 8, 2.0);
        auto rep = feedback_check(f);
        CHECK(rep.verdict == Verdict::FAIL);
    }
    SUBCASE("forward solve on a larger causal map matches dense") {
        auto triple = laplacian_triple(8);
        auto f = build_io_map(triple, 0.6, 24, 2.0);
        Rng rng(3);
        Vector b(f.total_input_dim());
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.next_complex_gaussian();
        Vector x = feedback_solve(f, b);
        Vector residual = x - f.apply(x) - b;
        CHECK(residual.norm() / b.norm() < 1e-12);
    }
}

TEST_CASE("block algebra") {
    auto t1 = scalar_triple(-1.0);
    auto t2 = scalar_triple(-2.0);
    auto f1 = build_io_map(t1, 1.0, 16, 2.0);
    auto f2 = build_io_map(t2, 1.0, 16, 2.0);
    SUBCASE("composition is strictly causal and dense") {
        auto g = f1.compose(f2);
        CHECK(g.strictly_causal());
        CHECK(g.has_dense());
    }
    SUBCASE("2x2 assembly keeps blocks in place") {
        std::vector<std::vector<const InputOutputMap*>> blocks = {{&f1, nullptr},
                                                                  {nullptr, &f2}};
        auto g = InputOutputMap::assemble_blocks(blocks);
        CHECK(g.node_input_dim() == 2);
        Matrix b54 = g.block(5, 4);
        CHECK(std::abs(b54(0, 0) - f1.block(5, 4)(0, 0)) < 1e-15);
        CHECK(std::abs(b54(1, 1) - f2.block(5, 4)(0, 0)) < 1e-15);
        CHECK(std::abs(b54(0, 1)) == 0.0);
    }
}
