#include <catch2/catch_amalgamated.hpp>

#include <blaschke/monodromy.hpp>

#include <cmath>
#include <vector>

using namespace blaschke;

namespace {

FiniteBlaschke power(int n) {
    return FiniteBlaschke(cplx(1.0, 0.0), {{DiskPoint(cplx(0.0, 0.0)), n}});
}

FiniteBlaschke power_times_phi(int n, cplx lam) {
    return FiniteBlaschke(cplx(1.0, 0.0),
                          {{DiskPoint(cplx(0.0, 0.0)), n}, {DiskPoint(lam), 1}});
}

} // namespace

TEST_CASE("squaring map splits into diagonal and swap components") {
    const ComponentReport r = surface_components(power(2));
    CHECK(r.q == 2);
    REQUIRE(r.orbits.size() == 2);
    CHECK(r.orbits[0] == std::vector<int>{0});
    CHECK(r.orbits[1] == std::vector<int>{1});
    CHECK(r.multiplicities == std::vector<int>{1, 1});
    CHECK(r.inverse_pairing == std::vector<int>{0, 1});
    CHECK(r.group_order == 2);
    REQUIRE(r.generators.size() == 1);
    CHECK(r.generators[0].im == std::vector<int>{1, 0});
}

TEST_CASE("pure powers give the full cyclic count") {
    for (int n = 2; n <= 4; ++n) {
        const ComponentReport r = surface_components(power(n));
        CHECK(r.q == n);
        CHECK(static_cast<int>(r.orbits.size()) == n);
        for (const auto& o : r.orbits) CHECK(o.size() == 1);
        CHECK(r.group_order == n);
    }
}

TEST_CASE("cyclic pairing swaps the off diagonal classes of the cube") {
    const ComponentReport r = surface_components(power(3));
    REQUIRE(r.q == 3);
    CHECK(r.inverse_pairing[0] == 0);
    CHECK(r.inverse_pairing[1] == 2);
    CHECK(r.inverse_pairing[2] == 1);
}

TEST_CASE("attaching one extra factor makes the pair surface irreducible") {
    const ComponentReport r = surface_components(power_times_phi(2, cplx(0.4, 0.2)));
    CHECK(r.q == 2);
    CHECK(r.multiplicities == std::vector<int>{1, 2});
    const ComponentReport r2 = surface_components(power_times_phi(3, cplx(-0.35, 0.0)));
    CHECK(r2.q == 2);
    CHECK(r2.multiplicities == std::vector<int>{1, 3});
}

TEST_CASE("degree one is a single diagonal sheet") {
    const ComponentReport r = surface_components(
        FiniteBlaschke(cplx(1.0, 0.0), {{DiskPoint(cplx(0.3, -0.2)), 1}}));
    CHECK(r.q == 1);
    CHECK(r.orbits == std::vector<std::vector<int>>{{0}});
    CHECK(r.group_order == 1);
}

TEST_CASE("monodromy group of a generic product is transitive") {
    const MonodromyResult mr = monodromy_group(
        FiniteBlaschke(cplx(1.0, 0.0), {{DiskPoint(cplx(0.2, 0.5)), 1},
                                        {DiskPoint(cplx(-0.3, -0.1)), 1},
                                        {DiskPoint(cplx(0.5, -0.2)), 1}}));
    CHECK(mr.transitive);
    CHECK(mr.generators.size() >= 1);
    CHECK(mr.base.points.size() == 3);
    for (const Permutation& g : mr.generators) CHECK(g.size() == 3);
}

TEST_CASE("basepoint keeps clearance from every exceptional value") {
    const FiniteBlaschke B = power_times_phi(2, cplx(0.4, 0.0));
    const CriticalData cd = critical_data(B);
    const cplx w0 = pick_basepoint(B, cd);
    CHECK(std::abs(w0) < 1.0);
    const std::vector<double> radii = detail::petal_radii(cd.exceptional, Tolerances::defaults());
    for (std::size_t i = 0; i < cd.exceptional.size(); ++i)
        CHECK(std::abs(w0 - cd.exceptional[i]) >= 2.1 * radii[i] - 1e-12);
}

TEST_CASE("generator loops stay inside the disk and close up") {
    const FiniteBlaschke B = power_times_phi(2, cplx(0.4, 0.0));
    const CriticalData cd = critical_data(B);
    const cplx w0 = pick_basepoint(B, cd);
    const LoopSet ls = generator_loops(cd.exceptional, w0, Tolerances::defaults());
    REQUIRE(ls.loops.size() == cd.exceptional.size());
    for (const PlanePath& loop : ls.loops) {
        CHECK(loop.is_loop());
        CHECK(std::abs(loop.startpoint() - w0) < 1e-12);
        CHECK(loop.max_modulus() < 1.0);
    }
}

TEST_CASE("gluing graph of the squaring map") {
    const GluingGraph g = gluing_graph(power(2));
    CHECK(g.sheets == 2);
    CHECK(g.connected);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].i == 0);
    CHECK(g.edges[0].j == 1);
    CHECK(std::abs(g.edges[0].value) < 1e-9);
    CHECK(std::abs(g.edges[0].witness) < 1e-6);
}

TEST_CASE("gluing graph of a mixed product stays connected") {
    const GluingGraph g = gluing_graph(power_times_phi(2, cplx(0.4, 0.0)));
    CHECK(g.sheets == 3);
    CHECK(g.connected);
    CHECK(g.edges.size() >= 2);
}

TEST_CASE("degree one gluing is trivially connected") {
    const GluingGraph g = gluing_graph(
        FiniteBlaschke(cplx(1.0, 0.0), {{DiskPoint(cplx(0.2, 0.1)), 1}}));
    CHECK(g.sheets == 1);
    CHECK(g.connected);
    CHECK(g.edges.empty());
}

TEST_CASE("regularity conditions hold for simple separated critical data") {
    const Theorem41Report t = theorem41_conditions(power(2), {});
    CHECK(t.holds);
    CHECK(t.simple_margin > 1.0);  // B'' = 2 for the squaring map
    const Theorem41Report t2 = theorem41_conditions(power_times_phi(2, cplx(0.4, 0.0)), {});
    CHECK(t2.holds);
    CHECK(t2.injectivity_margin > 1e-3);
}

TEST_CASE("a higher order critical point violates simplicity") {
    const Theorem41Report t = theorem41_conditions(power(3), {});
    CHECK_FALSE(t.holds);
    CHECK(t.simple_margin < 1e-8);
}

TEST_CASE("exempting the degenerate point restores the conditions vacuously") {
    const Theorem41Report t = theorem41_conditions(power(3), {cplx(0.0, 0.0)});
    CHECK(t.holds);
    REQUIRE(t.exempt_matched.size() == 1);
    CHECK(std::abs(t.exempt_matched[0]) < 1e-9);
    CHECK_THROWS_AS(theorem41_conditions(power(3), {cplx(0.5, 0.0)}), spec_error);
}

TEST_CASE("group order enumeration caps out gracefully") {
    // S_3 from a transposition and a 3-cycle
    const std::vector<Permutation> gens = {Permutation({1, 0, 2}), Permutation({1, 2, 0})};
    CHECK(detail::enumerate_group_order(gens, 3, 1000) == 6);
    CHECK(detail::enumerate_group_order(gens, 3, 4) == -1);
}
