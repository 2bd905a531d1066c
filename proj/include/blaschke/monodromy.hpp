#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "continuation.hpp"
#include "errors.hpp"
#include "fibers.hpp"
#include "path.hpp"
#include "permutation.hpp"
#include "product.hpp"
#include "tolerances.hpp"

namespace blaschke {

/// Radius of the small circle traversed around the value v: stays below the
/// cap, below half the gap to the nearest other value, and below half the gap
/// to the unit circle.
inline double loop_radius(cplx v, double d_min, const Tolerances& tol = Tolerances::defaults()) {
    double r = tol.loop_radius_cap;
    if (std::isfinite(d_min)) r = std::min(r, 0.5 * d_min);
    r = std::min(r, 0.5 * (1.0 - std::abs(v)));
    if (!(r > 0.0)) throw spec_error("loop radius degenerated to zero");
    return r;
}

namespace detail {

inline std::vector<double> petal_radii(const std::vector<cplx>& values, const Tolerances& tol) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j)
            dmin = std::min(dmin, std::abs(values[i] - values[j]));
    std::vector<double> rad(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        rad[i] = loop_radius(values[i], dmin, tol);
    return rad;
}

inline double segment_distance(cplx a, cplx b, cplx p) {
    PathPiece seg;
    seg.a = a;
    seg.b = b;
    return seg.distance_to(p);
}

/// A base point is admissible when it keeps its distance from every value,
/// every straight approach segment stays outside the circles of the other
/// values (so the petals form a star), and the fiber over it is simple and
/// separated.
inline bool basepoint_ok(const FiniteBlaschke& B, const std::vector<cplx>& E,
                         const std::vector<double>& rad, cplx w0, const Tolerances& tol) {
    if (!(std::abs(w0) < 1.0 - tol.interior_margin)) return false;
    for (std::size_t i = 0; i < E.size(); ++i)
        if (std::abs(w0 - E[i]) < 2.1 * rad[i]) return false;
    for (std::size_t i = 0; i < E.size(); ++i) {
        const cplx dir = (w0 - E[i]) / std::abs(w0 - E[i]);
        const cplx entry = E[i] + rad[i] * dir;
        for (std::size_t j = 0; j < E.size(); ++j) {
            if (j == i) continue;
            if (segment_distance(w0, entry, E[j]) < 1.05 * rad[j]) return false;
        }
    }
    try {
        const Fiber f = fiber(B, w0, tol);
        if (!f.simple() || f.min_separation < tol.fiber_separation) return false;
    } catch (const numeric_error&) {
        return false;
    }
    return true;
}

} // namespace detail

/// Deterministic spiral scan for an admissible base point: rings of radius
/// spiral_step * k, sixteen angles per ring, first hit wins. When the
/// critical values cluster, the admissible directions can be narrow arcs, so
/// failed sweeps repeat with doubled angular resolution before giving up.
inline cplx pick_basepoint(const FiniteBlaschke& B, const CriticalData& cd,
                           const Tolerances& tol = Tolerances::defaults()) {
    constexpr double tau = 6.283185307179586476925287;
    const std::vector<double> rad = detail::petal_radii(cd.exceptional, tol);
    for (int pass = 0; pass < 8; ++pass) {
        const int nang_full = 16 << pass;
        for (int k = 0;; ++k) {
            const double r = tol.spiral_step * static_cast<double>(k);
            if (r >= 1.0) break;
            const int nang = k == 0 ? 1 : nang_full;
            for (int a = 0; a < nang; ++a) {
                if (pass > 0 && nang > 1 && a % 2 == 0) continue;
                const cplx w0 = r * std::exp(cplx(0.0, tau * a / nang));
                if (detail::basepoint_ok(B, cd.exceptional, rad, w0, tol)) return w0;
            }
        }
    }
    throw numeric_error("basepoint", "no admissible base point found");
}

/// One loop per distinct critical value: straight segment to the circle
/// around the value, once around counterclockwise, straight back. Loops are
/// ordered by the angle of the value as seen from the base point.
struct LoopSet {
    cplx w0;
    std::vector<cplx> values;
    std::vector<double> radii;
    std::vector<PlanePath> loops;
};

inline LoopSet generator_loops(const std::vector<cplx>& E, cplx w0,
                               const Tolerances& tol = Tolerances::defaults()) {
    constexpr double tau = 6.283185307179586476925287;
    LoopSet out;
    out.w0 = w0;
    const std::vector<double> rad = detail::petal_radii(E, tol);
    std::vector<std::size_t> order(E.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double pa = std::arg(E[a] - w0), pb = std::arg(E[b] - w0);
        if (pa != pb) return pa < pb;
        return std::abs(E[a] - w0) < std::abs(E[b] - w0);
    });
    for (std::size_t idx : order) {
        const cplx v = E[idx];
        const double r = rad[idx];
        const cplx dir = (w0 - v) / std::abs(w0 - v);
        const cplx entry = v + r * dir;
        PlanePath p = PlanePath::line(w0, entry);
        const double th = std::arg(entry - v);
        p.append_arc(v, r, th, th + tau);
        p.append_line(w0);
        out.values.push_back(v);
        out.radii.push_back(r);
        out.loops.push_back(std::move(p));
    }
    return out;
}

namespace detail {

inline long enumerate_group_order(const std::vector<Permutation>& gens, std::size_t n,
                                  long cap) {
    std::unordered_set<Permutation, PermutationHash> seen;
    std::deque<Permutation> queue;
    Permutation id = Permutation::identity(n);
    seen.insert(id);
    queue.push_back(id);
    while (!queue.empty()) {
        const Permutation p = queue.front();
        queue.pop_front();
        for (const Permutation& g : gens) {
            Permutation t = g * p;
            if (seen.insert(t).second) {
                if (static_cast<long>(seen.size()) > cap) return -1;
                queue.push_back(std::move(t));
            }
        }
    }
    return static_cast<long>(seen.size());
}

} // namespace detail

struct MonodromyResult {
    cplx w0;
    Fiber base;
    LoopSet loops;
    std::vector<Permutation> generators;  // aligned with loops.values
    bool transitive = false;
    long group_order = 0;  // -1 when enumeration exceeds the cap
};

/// Permutation action of the loops on the base fiber. The covering away from
/// the critical values is connected, so an intransitive result can only be a
/// numerical failure.
inline MonodromyResult monodromy_group(const FiniteBlaschke& B,
                                       const Tolerances& tol = Tolerances::defaults()) {
    MonodromyResult out;
    if (B.degree() == 1) {
        out.w0 = cplx(0.0, 0.0);
        out.base = fiber(B, out.w0, tol);
        out.loops.w0 = out.w0;
        out.transitive = true;
        out.group_order = 1;
        return out;
    }
    const CriticalData cd = critical_data(B, tol);
    out.w0 = pick_basepoint(B, cd, tol);
    out.base = fiber(B, out.w0, tol);
    out.loops = generator_loops(cd.exceptional, out.w0, tol);
    for (const PlanePath& loop : out.loops.loops)
        out.generators.push_back(lift_loop_permutation(B, loop, out.base, tol));

    const std::size_t n = out.base.points.size();
    detail::DisjointSets ds(n);
    for (const Permutation& g : out.generators)
        for (std::size_t i = 0; i < n; ++i)
            ds.unite(i, static_cast<std::size_t>(g(static_cast<int>(i))));
    std::size_t comps = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (ds.find(i) == i) ++comps;
    if (comps != 1)
        throw numeric_error("monodromy_transitivity",
                            "monodromy action split into " + std::to_string(comps) +
                            " orbits");
    out.transitive = true;
    out.group_order = detail::enumerate_group_order(out.generators, n, tol.group_order_cap);
    return out;
}

namespace detail {

struct SchreierData {
    std::vector<int> orbit;                   // discovery order, starts at 0
    std::vector<Permutation> rep;             // rep[x](0) = x
    std::vector<Permutation> subgroup_gens;   // Stab(0) generators, deduplicated
};

inline SchreierData schreier_stabilizer(const std::vector<Permutation>& gens, std::size_t n) {
    SchreierData sd;
    std::vector<Permutation> all = gens;
    for (const Permutation& g : gens) all.push_back(g.inverse());
    sd.rep.assign(n, Permutation());
    std::vector<char> seen(n, 0);
    std::deque<int> queue;
    sd.rep[0] = Permutation::identity(n);
    seen[0] = 1;
    queue.push_back(0);
    sd.orbit.push_back(0);
    while (!queue.empty()) {
        const int x = queue.front();
        queue.pop_front();
        for (const Permutation& g : all) {
            const int y = g(x);
            if (!seen[static_cast<std::size_t>(y)]) {
                seen[static_cast<std::size_t>(y)] = 1;
                sd.rep[static_cast<std::size_t>(y)] = g * sd.rep[static_cast<std::size_t>(x)];
                sd.orbit.push_back(y);
                queue.push_back(y);
            }
        }
    }
    if (sd.orbit.size() != n)
        throw numeric_error("monodromy_transitivity",
                            "stabilizer walk reached only " +
                            std::to_string(sd.orbit.size()) + " sheets");
    std::set<Permutation> sg;
    for (int x : sd.orbit)
        for (const Permutation& g : gens) {
            const Permutation s = sd.rep[static_cast<std::size_t>(g(x))].inverse() * g *
                                  sd.rep[static_cast<std::size_t>(x)];
            if (!s.is_identity()) sg.insert(s);
        }
    sd.subgroup_gens.assign(sg.begin(), sg.end());
    return sd;
}

} // namespace detail

/// Orbit decomposition of the sheet set under the stabilizer of sheet 0,
/// together with the pairing that matches each orbit with the one carrying
/// the inverse branches.
struct ComponentReport {
    cplx w0;
    Fiber base;
    std::vector<Permutation> generators;
    std::vector<std::vector<int>> orbits;  // ordered by least element
    std::vector<int> multiplicities;       // orbit sizes
    std::vector<int> inverse_pairing;      // involution on orbit indices
    int q = 0;                             // orbit count
    long group_order = 0;
};

inline ComponentReport surface_components(const FiniteBlaschke& B,
                                          const Tolerances& tol = Tolerances::defaults()) {
    ComponentReport out;
    if (B.degree() == 1) {
        out.w0 = cplx(0.0, 0.0);
        out.base = fiber(B, out.w0, tol);
        out.orbits = {{0}};
        out.multiplicities = {1};
        out.inverse_pairing = {0};
        out.q = 1;
        out.group_order = 1;
        return out;
    }
    MonodromyResult mr = monodromy_group(B, tol);
    out.w0 = mr.w0;
    out.base = std::move(mr.base);
    out.generators = std::move(mr.generators);
    out.group_order = mr.group_order;

    const std::size_t n = out.base.points.size();
    const detail::SchreierData sd = detail::schreier_stabilizer(out.generators, n);

    detail::DisjointSets ds(n);
    for (const Permutation& s : sd.subgroup_gens)
        for (std::size_t i = 0; i < n; ++i)
            ds.unite(i, static_cast<std::size_t>(s(static_cast<int>(i))));
    std::vector<int> orbit_of(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = ds.find(i);
        if (orbit_of[r] < 0) {
            orbit_of[r] = static_cast<int>(out.orbits.size());
            out.orbits.emplace_back();
        }
        orbit_of[i] = orbit_of[r];
        out.orbits[static_cast<std::size_t>(orbit_of[i])].push_back(static_cast<int>(i));
    }
    out.q = static_cast<int>(out.orbits.size());
    for (const auto& o : out.orbits)
        out.multiplicities.push_back(static_cast<int>(o.size()));

    out.inverse_pairing.assign(out.orbits.size(), -1);
    for (std::size_t a = 0; a < out.orbits.size(); ++a) {
        const int x = out.orbits[a][0];
        const int j = sd.rep[static_cast<std::size_t>(x)].inverse()(0);
        out.inverse_pairing[a] = orbit_of[static_cast<std::size_t>(j)];
    }
    for (std::size_t a = 0; a < out.inverse_pairing.size(); ++a)
        if (out.inverse_pairing[static_cast<std::size_t>(out.inverse_pairing[a])] !=
            static_cast<int>(a))
            throw numeric_error("pairing_involution",
                                "orbit pairing failed to be an involution");
    return out;
}

/// Sheet gluing across critical values: one clique per collision block of
/// size two or more, edges labeled by the value and a witness critical point.
struct GlueEdge {
    int i = 0, j = 0;
    cplx value;
    cplx witness;
};

struct GluingGraph {
    cplx w0;
    int sheets = 0;
    std::vector<GlueEdge> edges;
    bool connected = false;
};

inline GluingGraph gluing_graph(const FiniteBlaschke& B,
                                const Tolerances& tol = Tolerances::defaults()) {
    GluingGraph out;
    if (B.degree() == 1) {
        out.w0 = cplx(0.0, 0.0);
        out.sheets = 1;
        out.connected = true;
        return out;
    }
    const CriticalData cd = critical_data(B, tol);
    out.w0 = pick_basepoint(B, cd, tol);
    const Fiber base = fiber(B, out.w0, tol);
    out.sheets = static_cast<int>(base.points.size());
    const LoopSet ls = generator_loops(cd.exceptional, out.w0, tol);
    for (std::size_t k = 0; k < ls.values.size(); ++k) {
        const CollisionBlocks cb = radial_collision(B, base, ls.values[k], tol);
        for (std::size_t b = 0; b < cb.blocks.size(); ++b) {
            if (cb.blocks[b].size() < 2) continue;
            for (std::size_t p = 0; p < cb.blocks[b].size(); ++p)
                for (std::size_t q2 = p + 1; q2 < cb.blocks[b].size(); ++q2)
                    out.edges.push_back({cb.blocks[b][p], cb.blocks[b][q2], ls.values[k],
                                         cb.witnesses[b]});
        }
    }
    detail::DisjointSets ds(base.points.size());
    for (const GlueEdge& e : out.edges)
        ds.unite(static_cast<std::size_t>(e.i), static_cast<std::size_t>(e.j));
    std::size_t comps = 0;
    for (std::size_t i = 0; i < base.points.size(); ++i)
        if (ds.find(i) == i) ++comps;
    if (comps != 1)
        throw numeric_error("glue_disconnected",
                            "gluing edges leave " + std::to_string(comps) +
                            " sheet components");
    out.connected = true;
    return out;
}

/// Regularity conditions behind the component count arguments: away from an
/// explicit exempt list, every critical point must be simple (second
/// derivative bounded away from zero) and the critical values pairwise
/// separated.
struct Theorem41Report {
    bool holds = false;
    double simple_margin = std::numeric_limits<double>::infinity();
    double injectivity_margin = std::numeric_limits<double>::infinity();
    std::vector<cplx> exempt_matched;
};

inline Theorem41Report theorem41_conditions(const FiniteBlaschke& B,
                                            const std::vector<cplx>& exempt,
                                            const Tolerances& tol = Tolerances::defaults()) {
    const CriticalData cd = critical_data(B, tol);
    std::vector<char> is_exempt(cd.points.size(), 0);
    Theorem41Report out;
    for (const cplx& e : exempt) {
        std::size_t best = cd.points.size();
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cd.points.size(); ++i) {
            const double d = std::abs(cd.points[i].z - e);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        if (best == cd.points.size() || bd > 1e-6)
            throw spec_error("exempt point does not match any critical point");
        is_exempt[best] = 1;
        out.exempt_matched.push_back(cd.points[best].z);
    }
    for (std::size_t i = 0; i < cd.points.size(); ++i) {
        if (is_exempt[i]) continue;
        out.simple_margin = std::min(out.simple_margin,
                                     std::abs(B.derivative_at(cd.points[i].z, 2, tol)));
        for (std::size_t j = i + 1; j < cd.points.size(); ++j) {
            if (is_exempt[j]) continue;
            out.injectivity_margin = std::min(out.injectivity_margin,
                                              std::abs(cd.points[i].value - cd.points[j].value));
        }
    }
    out.holds = out.simple_margin > tol.thm_margin && out.injectivity_margin > tol.thm_margin;
    return out;
}

} // namespace blaschke
