#include <catch2/catch_amalgamated.hpp>

#include <blaschke/continuation.hpp>

#include <cmath>
#include <vector>

using namespace blaschke;

namespace {

constexpr double tau = 6.283185307179586476925287;

FiniteBlaschke power(int n) {
    return FiniteBlaschke(cplx(1.0, 0.0), {{DiskPoint(cplx(0.0, 0.0)), n}});
}

PlanePath loop_around(cplx center, double radius, cplx anchor) {
    // anchor -> circle entry -> full turn -> back
    const cplx entry = center + radius * (anchor - center) / std::abs(anchor - center);
    PlanePath p = PlanePath::line(anchor, entry);
    const double th = std::arg(entry - center);
    p.append_arc(center, radius, th, th + tau);
    p.append_line(anchor);
    return p;
}

} // namespace

TEST_CASE("straight path lift follows the explicit branch") {
    const FiniteBlaschke B = power(2);
    const PlanePath path = PlanePath::line(cplx(0.25, 0.0), cplx(0.16, 0.0));
    const FiberTrack tr = lift_path(B, path, cplx(0.5, 0.0));
    CHECK(std::abs(tr.end - cplx(0.4, 0.0)) < 1e-10);
    CHECK(std::abs(tr.start - cplx(0.5, 0.0)) < 1e-12);
    CHECK(tr.min_derivative_seen > 0.5);
    // the square root branch at intermediate samples
    for (const TrackSample& s : tr.samples) {
        const cplx w = path.point(s.t);
        CHECK(std::abs(s.z * s.z - w) < 1e-9);
        CHECK(s.z.real() > 0.0);
    }
}

TEST_CASE("reversed path returns the lift to its start") {
    // critical values 0 and about 0.0106; the path keeps clear of both
    const FiniteBlaschke B(cplx(1.0, 0.0), {{DiskPoint(cplx(0.0, 0.0)), 2},
                                            {DiskPoint(cplx(0.4, 0.0)), 1}});
    PlanePath path = PlanePath::line(cplx(0.3, 0.1), cplx(-0.2, 0.3));
    path.append_line(cplx(0.1, -0.35));
    const Fiber f = fiber(B, path.startpoint());
    const FiberTrack out = lift_path(B, path, f.points[0]);
    const FiberTrack back = lift_path(B, path.reversed(), out.end);
    CHECK(std::abs(back.end - f.points[0]) < 1e-9);
}

TEST_CASE("loop around the branch value swaps the square root sheets") {
    const FiniteBlaschke B = power(2);
    const Fiber base = fiber(B, cplx(0.25, 0.0));
    const Permutation p = lift_loop_permutation(B, loop_around(cplx(0.0, 0.0), 0.25, cplx(0.25, 0.0)), base);
    CHECK_FALSE(p.is_identity());
    CHECK((p * p).is_identity());
}

TEST_CASE("loop with no enclosed critical value acts trivially") {
    const FiniteBlaschke B = power(2);
    const Fiber base = fiber(B, cplx(0.25, 0.0));
    const Permutation p = lift_loop_permutation(B, loop_around(cplx(0.35, 0.0), 0.05, cplx(0.25, 0.0)), base);
    CHECK(p.is_identity());
}

TEST_CASE("reversed loop gives the inverse permutation") {
    const FiniteBlaschke B = power(3);
    const Fiber base = fiber(B, cplx(0.216, 0.0));
    const PlanePath loop = loop_around(cplx(0.0, 0.0), 0.2, cplx(0.216, 0.0));
    const Permutation p = lift_loop_permutation(B, loop, base);
    const Permutation pr = lift_loop_permutation(B, loop.reversed(), base);
    CHECK((p * pr).is_identity());
    CHECK(pr == p.inverse());
    // a full turn around the only branch value of z^3 is a 3-cycle
    CHECK_FALSE(p.is_identity());
    CHECK_FALSE((p * p).is_identity());
    CHECK((p * p * p).is_identity());
}

TEST_CASE("homotopic loops of different shape agree") {
    const FiniteBlaschke B = power(2);
    const Fiber base = fiber(B, cplx(0.25, 0.0));
    const Permutation round =
        lift_loop_permutation(B, loop_around(cplx(0.0, 0.0), 0.25, cplx(0.25, 0.0)), base);
    // same class, polygonal shape
    PlanePath poly = PlanePath::line(cplx(0.25, 0.0), cplx(0.05, 0.22));
    poly.append_line(cplx(-0.22, 0.02));
    poly.append_line(cplx(-0.01, -0.24));
    poly.append_line(cplx(0.25, 0.0));
    const Permutation square = lift_loop_permutation(B, poly, base);
    CHECK(round == square);
}

TEST_CASE("tracking through a critical value fails loudly") {
    const FiniteBlaschke B = power(2);
    const Fiber base = fiber(B, cplx(0.25, 0.0));
    const PlanePath through = PlanePath::line(cplx(0.25, 0.0), cplx(-0.25, 0.0));
    bool threw = false;
    try {
        detail::track_bundle(B, through, base.points, Tolerances::defaults());
    } catch (const numeric_error&) {
        threw = true;
    }
    CHECK(threw);
}

TEST_CASE("open paths are rejected as loops") {
    const FiniteBlaschke B = power(2);
    const Fiber base = fiber(B, cplx(0.25, 0.0));
    const PlanePath open = PlanePath::line(cplx(0.25, 0.0), cplx(0.3, 0.0));
    CHECK_THROWS_AS(lift_loop_permutation(B, open, base), spec_error);
}

TEST_CASE("radial collision of the square root sheets") {
    const FiniteBlaschke B = power(2);
    const Fiber base = fiber(B, cplx(0.25, 0.0));
    const CollisionBlocks cb = radial_collision(B, base, cplx(0.0, 0.0));
    REQUIRE(cb.blocks.size() == 1);
    CHECK(cb.blocks[0] == std::vector<int>{0, 1});
    REQUIRE(cb.witnesses.size() == 1);
    CHECK(std::abs(cb.witnesses[0]) < 1e-6);
    CHECK(cb.epsilon > 0.0);
}

TEST_CASE("radial collision separates sheets that stay apart") {
    // z^2 phi_0.4: over the value 0 only the two sheets vanishing at 0 meet
    const FiniteBlaschke B(cplx(1.0, 0.0), {{DiskPoint(cplx(0.0, 0.0)), 2},
                                            {DiskPoint(cplx(0.4, 0.0)), 1}});
    const Fiber base = fiber(B, cplx(-0.2, 0.0));
    const CollisionBlocks cb = radial_collision(B, base, cplx(0.0, 0.0));
    std::size_t multi = 0, single = 0;
    for (const auto& blk : cb.blocks)
        (blk.size() > 1 ? multi : single) += 1;
    CHECK(multi == 1);
    CHECK(single == 1);
}
