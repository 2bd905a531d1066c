#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "mobius.hpp"
#include "poly.hpp"
#include "product.hpp"
#include "tolerances.hpp"

namespace blaschke {

namespace detail {

inline bool arg_abs_less(const cplx& a, const cplx& b) {
    const double aa = std::arg(a), ab = std::arg(b);
    if (aa != ab) return aa < ab;
    return std::abs(a) < std::abs(b);
}

/// Union-find over indices 0..n-1.
struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

/// Cluster ids in order of first occurrence; points closer than radius join.
inline std::vector<int> cluster_by_distance(const std::vector<cplx>& pts, double radius) {
    DisjointSets ds(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (std::abs(pts[i] - pts[j]) < radius) ds.unite(i, j);
    std::vector<int> id(pts.size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::size_t r = ds.find(i);
        if (id[r] < 0) id[r] = next++;
        id[i] = id[r];
    }
    return id;
}

} // namespace detail

/// Preimage set B^{-1}(w) inside the disk, with repeated-point clustering.
struct Fiber {
    cplx w;
    std::vector<cplx> points;      // sorted by (arg, abs)
    std::vector<int> cluster;      // parallel to points
    double min_separation = std::numeric_limits<double>::infinity();

    bool simple() const {
        if (points.empty()) return false;
        int mx = 0;
        for (int c : cluster) mx = std::max(mx, c);
        return static_cast<std::size_t>(mx) + 1 == points.size();
    }
};

/// Solve B(z) = w. Always returns exactly deg(B) points, all strictly inside
/// the disk; the leading coefficient of the combined polynomial cannot vanish
/// for |w| < 1. Each root is Newton-polished on the product form and must meet
///   |B(z) - w| <= fiber_residual * max(1, |B'(z)|).
inline Fiber fiber(const FiniteBlaschke& B, cplx w,
                   const Tolerances& tol = Tolerances::defaults()) {
    if (!(std::abs(w) < 1.0))
        throw spec_error("fiber target must lie in the open disk (|w| = " +
                         std::to_string(std::abs(w)) + ")");
    const RationalForm rf = B.to_rational();
    poly_t comb(std::max(rf.p.size(), rf.q.size()), cplx(0.0, 0.0));
    for (std::size_t k = 0; k < rf.p.size(); ++k) comb[k] += rf.p[k];
    for (std::size_t k = 0; k < rf.q.size(); ++k) comb[k] -= w * rf.q[k];

    std::vector<cplx> roots = poly_roots(comb, tol);
    if (roots.size() != static_cast<std::size_t>(B.degree()))
        throw numeric_error("fiber_count",
                            "expected " + std::to_string(B.degree()) + " fiber points, got " +
                            std::to_string(roots.size()));

    for (cplx& z : roots) {
        for (int it = 0; it < 4; ++it) {
            const MoebiusEval e = B.eval_with_derivative(z, tol);
            if (std::abs(e.derivative) < tol.min_derivative) break;
            const cplx step = (e.value - w) / e.derivative;
            if (!(std::abs(step) < 0.5)) break;
            z -= step;
            if (std::abs(step) < 1e-16) break;
        }
        if (!(std::abs(z) < 1.0))
            throw numeric_error("fiber_interior",
                                "fiber point escaped the disk (|z| = " +
                                std::to_string(std::abs(z)) + ")");
        const MoebiusEval e = B.eval_with_derivative(z, tol);
        const double res = std::abs(e.value - w);
        if (!(res <= tol.fiber_residual * std::max(1.0, std::abs(e.derivative))))
            throw numeric_error("fiber_residual",
                                "fiber residual " + std::to_string(res));
    }
    std::sort(roots.begin(), roots.end(), detail::arg_abs_less);

    Fiber f;
    f.w = w;
    f.points = std::move(roots);
    f.cluster = detail::cluster_by_distance(f.points, tol.fiber_cluster);
    for (std::size_t i = 0; i < f.points.size(); ++i)
        for (std::size_t j = i + 1; j < f.points.size(); ++j)
            f.min_separation = std::min(f.min_separation,
                                        std::abs(f.points[i] - f.points[j]));
    return f;
}

struct CriticalPoint {
    cplx z;
    int multiplicity = 1;  // order of the zero of B' at z
    cplx value;            // B(z)
};

struct CriticalData {
    std::vector<CriticalPoint> points;  // interior critical points, deduplicated
    std::vector<cplx> exceptional;      // distinct critical values, sorted
    bool conditioning_warning = false;
};

namespace detail {

struct CriticalCacheEntry {
    Tolerances tol;
    CriticalData data;
};

} // namespace detail

/// Critical points as interior roots of p'q - pq'. The top coefficient of
/// that combination cancels exactly, leaving degree 2n - 2; the interior root
/// count (with multiplicity) must equal n - 1. Results are cached on the
/// product, keyed by the tolerance record.
inline CriticalData critical_data(const FiniteBlaschke& B,
                                  const Tolerances& tol = Tolerances::defaults()) {
    detail::SlotHolder& slot = B.cache_slot();
    {
        std::lock_guard<std::mutex> lk(slot.m);
        if (slot.data) {
            auto e = std::static_pointer_cast<const detail::CriticalCacheEntry>(slot.data);
            if (e->tol == tol) return e->data;
        }
    }

    CriticalData out;
    out.conditioning_warning = B.conditioning_warning();
    if (B.degree() >= 2) {
        const RationalForm rf = B.to_rational();
        const poly_t cpoly = [&] {
            const poly_t a = poly_mul(poly_derivative(rf.p), rf.q);
            const poly_t b = poly_mul(rf.p, poly_derivative(rf.q));
            poly_t r(std::max(a.size(), b.size()), cplx(0.0, 0.0));
            for (std::size_t k = 0; k < a.size(); ++k) r[k] += a[k];
            for (std::size_t k = 0; k < b.size(); ++k) r[k] -= b[k];
            return r;
        }();
        std::vector<cplx> roots = poly_roots(cpoly, tol);
        std::vector<cplx> interior;
        for (const cplx& r : roots)
            if (std::abs(r) < 1.0) interior.push_back(r);

        const std::vector<int> cl = detail::cluster_by_distance(interior, tol.dedup_critical);
        int nclusters = 0;
        for (int c : cl) nclusters = std::max(nclusters, c + 1);
        long total = 0;
        for (int c = 0; c < nclusters; ++c) {
            cplx centroid(0.0, 0.0);
            int m = 0;
            for (std::size_t i = 0; i < interior.size(); ++i)
                if (cl[i] == c) {
                    centroid += interior[i];
                    ++m;
                }
            centroid /= static_cast<double>(m);
            // polish the zero of B' (order m) with the multiplicity-scaled step
            for (int it = 0; it < 6; ++it) {
                const cplx d1 = B.derivative_at(centroid, 1, tol);
                const cplx d2 = B.derivative_at(centroid, 2, tol);
                if (d2 == cplx(0.0, 0.0)) break;
                const cplx step = static_cast<double>(m) * d1 / d2;
                if (!(std::abs(step) < 0.1)) break;
                centroid -= step;
                if (std::abs(step) < 1e-16) break;
            }
            if (!(std::abs(centroid) < 1.0))
                throw numeric_error("bochner_count",
                                    "critical point drifted out of the disk");
            out.points.push_back({centroid, m, B.eval(centroid, tol)});
            total += m;
        }
        if (total != B.degree() - 1)
            throw numeric_error("bochner_count",
                                "interior critical count " + std::to_string(total) +
                                ", expected " + std::to_string(B.degree() - 1));
        std::sort(out.points.begin(), out.points.end(),
                  [](const CriticalPoint& a, const CriticalPoint& b) {
                      return detail::arg_abs_less(a.z, b.z);
                  });

        std::vector<cplx> vals;
        for (const CriticalPoint& p : out.points) vals.push_back(p.value);
        const std::vector<int> vcl = detail::cluster_by_distance(vals, tol.dedup_exceptional);
        int nv = 0;
        for (int c : vcl) nv = std::max(nv, c + 1);
        for (int c = 0; c < nv; ++c) {
            cplx rep(0.0, 0.0);
            int m = 0;
            for (std::size_t i = 0; i < vals.size(); ++i)
                if (vcl[i] == c) {
                    rep += vals[i];
                    ++m;
                }
            out.exceptional.push_back(rep / static_cast<double>(m));
        }
        std::sort(out.exceptional.begin(), out.exceptional.end(), detail::arg_abs_less);
    }

    {
        std::lock_guard<std::mutex> lk(slot.m);
        slot.data = std::make_shared<const detail::CriticalCacheEntry>(
            detail::CriticalCacheEntry{tol, out});
    }
    return out;
}

/// Distance from z to the nearest distinct critical value; +inf when the
/// product has none (degree 1).
inline double exceptional_distance(const CriticalData& cd, cplx z) {
    double d = std::numeric_limits<double>::infinity();
    for (const cplx& e : cd.exceptional) d = std::min(d, std::abs(z - e));
    return d;
}

/// Composition phi(B(.)) expressed again as a finite product. The zeros are
/// the fiber over phi's own zero, collapsed by cluster into multiplicities;
/// the constant is matched at a sample point and the result is checked
/// against direct evaluation on a circle of samples.
inline FiniteBlaschke compose(const MoebiusMap& phi, const FiniteBlaschke& B,
                              const Tolerances& tol = Tolerances::defaults()) {
    const Fiber f = fiber(B, phi.lambda.value(), tol);
    int nclusters = 0;
    for (int c : f.cluster) nclusters = std::max(nclusters, c + 1);
    std::vector<ZeroFactor> zeros;
    for (int c = 0; c < nclusters; ++c) {
        cplx centroid(0.0, 0.0);
        int m = 0;
        for (std::size_t i = 0; i < f.points.size(); ++i)
            if (f.cluster[i] == c) {
                centroid += f.points[i];
                ++m;
            }
        centroid /= static_cast<double>(m);
        zeros.push_back({DiskPoint(centroid, tol), m});
    }

    cplx num(1.0, 0.0), den(1.0, 0.0);
    const cplx z0(0.137, -0.211);  // fixed probe, nothing special about it
    num = phi.apply(B.eval(z0, tol), tol).value;
    for (const ZeroFactor& zf : zeros) {
        const cplx fv = moebius_apply(zf.z.value(), z0, tol).value;
        for (int m = 0; m < zf.multiplicity; ++m) den *= fv;
    }
    if (std::abs(den) < tol.singular_denom)
        throw numeric_error("compose_probe", "probe point lands on a zero");
    cplx c = num / den;
    if (std::abs(std::abs(c) - 1.0) > 1e-6)
        throw numeric_error("compose_constant",
                            "matched constant drifted off the circle: |c| = " +
                            std::to_string(std::abs(c)));
    c /= std::abs(c);

    FiniteBlaschke out(c, std::move(zeros), tol);
    constexpr double tau = 6.283185307179586476925287;
    for (int k = 0; k < 32; ++k) {
        const cplx z = 0.7 * std::exp(cplx(0.0, tau * k / 32.0));
        const cplx lhs = out.eval(z, tol);
        const cplx rhs = phi.apply(B.eval(z, tol), tol).value;
        if (!(std::abs(lhs - rhs) <= tol.compose_eval))
            throw numeric_error("compose_eval",
                                "composition mismatch " + std::to_string(std::abs(lhs - rhs)));
    }
    return out;
}

} // namespace blaschke
