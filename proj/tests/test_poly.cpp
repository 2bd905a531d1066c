#include <catch2/catch_amalgamated.hpp>

#include <blaschke/poly.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

using namespace blaschke;

namespace {

poly_t from_roots(const std::vector<cplx>& roots) {
    poly_t p{cplx(1.0, 0.0)};
    for (const cplx& r : roots) p = poly_mul(p, poly_t{-r, cplx(1.0, 0.0)});
    return p;
}

// match each expected root to the nearest computed one, greedily
double root_mismatch(std::vector<cplx> got, const std::vector<cplx>& want) {
    double worst = 0.0;
    for (const cplx& w : want) {
        std::size_t best = 0;
        double bd = 1e300;
        for (std::size_t i = 0; i < got.size(); ++i) {
            const double d = std::abs(got[i] - w);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        worst = std::max(worst, bd);
        got.erase(got.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return worst;
}

} // namespace

TEST_CASE("polynomial product and evaluation") {
    const poly_t a{cplx(1.0, 0.0), cplx(2.0, 0.0)};       // 1 + 2z
    const poly_t b{cplx(0.0, 1.0), cplx(-1.0, 0.0), cplx(3.0, 0.0)};
    const poly_t ab = poly_mul(a, b);
    const cplx z(0.3, -0.7);
    CHECK(std::abs(poly_eval(ab, z) - poly_eval(a, z) * poly_eval(b, z)) < 1e-14);
    CHECK(ab.size() == a.size() + b.size() - 1);
}

TEST_CASE("compensated product matches long double accumulation") {
    // sizes past the compensation threshold
    std::vector<cplx> ra, rb;
    for (int k = 0; k < 12; ++k) {
        ra.push_back(cplx(0.3 * std::cos(0.7 * k), 0.3 * std::sin(0.7 * k)));
        rb.push_back(cplx(0.5 * std::cos(1.3 * k + 0.4), 0.5 * std::sin(1.3 * k + 0.4)));
    }
    const poly_t a = from_roots(ra), b = from_roots(rb);
    const poly_t ab = poly_mul(a, b);
    REQUIRE(ab.size() == 25);
    for (std::size_t k = 0; k < ab.size(); ++k) {
        std::complex<long double> acc(0.0L, 0.0L);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (k < i || k - i >= b.size()) continue;
            acc += std::complex<long double>(a[i]) * std::complex<long double>(b[k - i]);
        }
        CHECK(std::abs(ab[k] - cplx(static_cast<double>(acc.real()),
                                    static_cast<double>(acc.imag()))) < 1e-13);
    }
}

TEST_CASE("derivative and evaluation with derivative agree") {
    const poly_t p{cplx(2.0, 0.0), cplx(-1.0, 0.5), cplx(0.0, 0.0), cplx(4.0, -2.0)};
    const poly_t dp = poly_derivative(p);
    const cplx z(0.2, 0.6);
    const auto [v, d] = poly_eval_d(p, z);
    CHECK(std::abs(v - poly_eval(p, z)) < 1e-14);
    CHECK(std::abs(d - poly_eval(dp, z)) < 1e-14);
}

TEST_CASE("planted simple roots are recovered") {
    const std::vector<cplx> want = {{0.5, 0.0},  {-0.3, 0.4}, {0.1, -0.8},
                                    {-0.6, -0.2}, {0.9, 0.3},  {0.0, 0.7}};
    const poly_t p = from_roots(want);
    const std::vector<cplx> got = poly_roots(p, Tolerances::defaults());
    REQUIRE(got.size() == want.size());
    CHECK(root_mismatch(got, want) < 1e-10);
}

TEST_CASE("roots come back sorted by argument then modulus") {
    const poly_t p = from_roots({{0.5, 0.5}, {-0.5, 0.5}, {0.25, 0.25}});
    const std::vector<cplx> got = poly_roots(p, Tolerances::defaults());
    REQUIRE(got.size() == 3);
    for (std::size_t i = 0; i + 1 < got.size(); ++i) {
        const double a1 = std::arg(got[i]), a2 = std::arg(got[i + 1]);
        CHECK((a1 < a2 + 1e-12 ||
               (std::abs(a1 - a2) < 1e-12 && std::abs(got[i]) <= std::abs(got[i + 1]) + 1e-12)));
    }
}

TEST_CASE("double root splits into a close pair with small residual") {
    const poly_t p = from_roots({{0.3, 0.0}, {0.3, 0.0}, {-0.4, 0.0}});
    const std::vector<cplx> got = poly_roots(p, Tolerances::defaults());
    REQUIRE(got.size() == 3);
    CHECK(root_mismatch(got, {{0.3, 0.0}, {0.3, 0.0}, {-0.4, 0.0}}) < 1e-5);
    for (const cplx& r : got) CHECK(std::abs(poly_eval(p, r)) < 1e-11);
}

TEST_CASE("origin roots are peeled exactly") {
    // z^2 (z - 0.5)
    const poly_t p{cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(-0.5, 0.0), cplx(1.0, 0.0)};
    const std::vector<cplx> got = poly_roots(p, Tolerances::defaults());
    REQUIRE(got.size() == 3);
    int zeros = 0;
    for (const cplx& r : got)
        if (r == cplx(0.0, 0.0)) ++zeros;
    CHECK(zeros == 2);
    CHECK(root_mismatch(got, {{0.0, 0.0}, {0.0, 0.0}, {0.5, 0.0}}) < 1e-12);
}

TEST_CASE("degenerate inputs") {
    CHECK_THROWS_AS(poly_roots(poly_t{}, Tolerances::defaults()), spec_error);
    CHECK_THROWS_AS(poly_roots(poly_t{cplx(0.0, 0.0)}, Tolerances::defaults()), spec_error);
    CHECK(poly_roots(poly_t{cplx(3.0, 0.0)}, Tolerances::defaults()).empty());
}

TEST_CASE("residual gate rejects when tightened past rounding") {
    Tolerances tol = Tolerances::defaults();
    tol.poly_residual = 1e-30;
    // roots (3.16 +- sqrt(7.4256)) / 1.6 are irrational, so the evaluated
    // residual cannot round to an exact zero
    const poly_t p{cplx(0.8, 0.0), cplx(-3.16, 0.0), cplx(0.8, 0.0)};
    CHECK_THROWS_AS(poly_roots(p, tol), numeric_error);
    try {
        poly_roots(p, tol);
    } catch (const numeric_error& e) {
        CHECK(e.gate() == "poly_residual");
    }
}

TEST_CASE("max coefficient modulus") {
    CHECK(poly_max_abs(poly_t{cplx(1.0, 0.0), cplx(0.0, -3.0), cplx(2.0, 0.0)}) ==
          Catch::Approx(3.0));
}
