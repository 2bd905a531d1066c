#include <catch2/catch_amalgamated.hpp>

#include <blaschke/bergman.hpp>

#include <cmath>
#include <vector>

using namespace blaschke;

namespace {

FiniteBlaschke power(int n) {
    return FiniteBlaschke(cplx(1.0, 0.0), {{DiskPoint(cplx(0.0, 0.0)), n}});
}

field_fn monomial(int n) {
    return [n](cplx z) { return std::pow(z, n); };
}

} // namespace

TEST_CASE("radial rule integrates polynomials exactly") {
    const auto rule = legendre_rule(6);
    double mass = 0.0, cubic = 0.0;
    for (const auto& [x, w] : rule) {
        mass += w;
        cubic += w * x * x * x;
    }
    CHECK(mass == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(cubic == Catch::Approx(0.25).epsilon(1e-13));
    CHECK_THROWS_AS(legendre_rule(0), spec_error);
}

TEST_CASE("disk quadrature reproduces the monomial inner products") {
    const DiskQuadrature quad = DiskQuadrature::build(8, 16);
    for (int m = 0; m <= 6; ++m)
        for (int n = 0; n <= 6; ++n) {
            const cplx got = quad_inner(quad, monomial(m), monomial(n));
            const cplx want = m == n ? cplx(1.0 / (n + 1.0), 0.0) : cplx(0.0, 0.0);
            CHECK(std::abs(got - want) < 1e-14);
        }
}

TEST_CASE("bergman kernel reproduces point evaluation under the quadrature") {
    const DiskQuadrature quad = DiskQuadrature::build(24, 48);
    const cplx lam(0.3, -0.2);
    const field_fn f = [](cplx z) { return z * z + 0.5 * z; };
    const cplx got = quad_inner(quad, f, [lam](cplx z) { return bergman_kernel(lam, z); });
    CHECK(std::abs(got - f(lam)) < 1e-12);
}

TEST_CASE("branch atlas of the squaring map") {
    BranchAtlas atlas(power(2));
    CHECK(atlas.report().q == 2);
    REQUIRE(atlas.obstacles().size() == 1);
    CHECK(std::abs(atlas.obstacles()[0]) < 1e-5);
    CHECK_FALSE(atlas.usable(cplx(1e-4, 0.0)));
    CHECK(atlas.usable(cplx(0.3, 0.2)));
    CHECK_FALSE(atlas.usable(cplx(0.999999, 0.0)));

    const cplx z(0.3, 0.2);
    const std::vector<cplx>& b = atlas.branches(z);
    REQUIRE(b.size() == 2);
    CHECK(b[0] == z);
    CHECK(std::abs(b[1] + z) < 1e-9);
}

TEST_CASE("class operators of the squaring map have closed forms") {
    BranchAtlas atlas(power(2));
    const cplx z(0.25, -0.35);
    // diagonal class reproduces the argument
    CHECK(std::abs(atlas.apply(0, monomial(3), z) - std::pow(z, 3)) < 1e-10);
    // swap class: sigma(z) = -z with sigma' = -1, so constants go to their negative
    CHECK(std::abs(atlas.apply(1, monomial(0), z) + 1.0) < 1e-9);
    CHECK(std::abs(atlas.apply(1, monomial(1), z) - z) < 1e-9);
    CHECK(atlas.inverse_class(0) == 0);
    CHECK(atlas.inverse_class(1) == 1);
}

TEST_CASE("adjoint identity holds between paired classes") {
    BranchAtlas atlas(power(2));
    const DiskQuadrature quad = DiskQuadrature::build(16, 48);
    for (int cls = 0; cls < 2; ++cls) {
        const AdjointCheck ck = adjoint_residual(atlas, cls, monomial(1), monomial(3), quad);
        CHECK(ck.residual < 1e-8);
        CHECK(ck.forfeited_weight == 0.0);
        CHECK(ck.used_nodes == 16 * 48);
    }
    // E_1 z = z and <z, z^3> = 0; both sides must vanish
    const AdjointCheck zero = adjoint_residual(atlas, 1, monomial(1), monomial(3), quad);
    CHECK(std::abs(zero.lhs) < 1e-10);
}

TEST_CASE("kernel transformation law for the squaring map") {
    BranchAtlas atlas(power(2));
    const cplx lam(0.3, 0.1), z(0.2, -0.3);
    for (int cls = 0; cls < 2; ++cls)
        CHECK(kernel_identity_residual(atlas, cls, lam, z).residual < 1e-9);
    // closed form of the swap class on K_lambda: both sides are -1/(1 + conj(lam) z)^2
    const KernelIdentityCheck ck = kernel_identity_residual(atlas, 1, lam, z);
    const cplx den = 1.0 + std::conj(lam) * z;
    CHECK(std::abs(ck.lhs + 1.0 / (den * den)) < 1e-9);
}

TEST_CASE("branch derivatives match finite differences") {
    BranchAtlas atlas(power(2));
    CHECK(derivative_identity_residual(atlas, 1, cplx(0.3, 0.15)) < 1e-9);
    FiniteBlaschke mixed(cplx(1.0, 0.0), {{DiskPoint(cplx(0.0, 0.0)), 2},
                                          {DiskPoint(cplx(0.4, 0.0)), 1}});
    BranchAtlas atlas2(mixed);
    for (int cls = 0; cls < atlas2.report().q; ++cls)
        CHECK(derivative_identity_residual(atlas2, cls, cplx(-0.22, 0.27)) < 1e-7);
}

TEST_CASE("quadrature forfeits are capped") {
    Tolerances tol = Tolerances::defaults();
    tol.quad_clearance = 0.45;  // blocks a large share of the disk
    tol.forfeit_cap = 1e-4;
    BranchAtlas blocked(power(2), tol);
    const DiskQuadrature quad = DiskQuadrature::build(8, 16);
    CHECK_THROWS_AS(adjoint_residual(blocked, 1, monomial(0), monomial(0), quad, tol),
                    numeric_error);
}

TEST_CASE("unitary symmetry of the squaring map under negation") {
    const DiskQuadrature quad = DiskQuadrature::build(12, 24);
    const auto_map neg = [](cplx z) { return MoebiusEval{-z, cplx(-1.0, 0.0)}; };
    const SymmetryCheck sc = symmetry_unitary_check(power(2), neg, monomial(1), monomial(1), quad);
    CHECK(sc.precondition_residual < 1e-14);
    CHECK(std::abs(sc.inner_fg - cplx(0.5, 0.0)) < 1e-13);
    CHECK(sc.residual < 1e-13);
    // the cube is not fixed by negation
    CHECK_THROWS_AS(symmetry_unitary_check(power(3), neg, monomial(1), monomial(1), quad),
                    numeric_error);
}
