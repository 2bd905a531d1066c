#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fibers.hpp"
#include "path.hpp"
#include "permutation.hpp"
#include "product.hpp"
#include "tolerances.hpp"

namespace blaschke {

struct TrackSample {
    double t;
    cplx z;
    double dmod;  // |B'(z)|
};

struct FiberTrack {
    cplx start;
    cplx end;
    std::vector<TrackSample> samples;
    double min_derivative_seen = std::numeric_limits<double>::infinity();
};

namespace detail {

/// Advance a whole fiber together along the path. Every point must accept a
/// step before any does: the Newton correction stays below correction_ratio of
/// that point's current separation and the total move below sample_ratio of
/// it, so sheets cannot swap between samples. Rejected steps halve the
/// parameter step; a run of easy accepts doubles it again.
inline std::vector<FiberTrack> track_bundle(const FiniteBlaschke& B, const PlanePath& path,
                                            const std::vector<cplx>& starts,
                                            const Tolerances& tol) {
    const std::size_t n = starts.size();
    if (n == 0) throw spec_error("cannot track an empty fiber");
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<cplx> z = starts;
    std::vector<FiberTrack> tracks(n);
    cplx w_curr = path.point(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        tracks[i].start = starts[i];
        const MoebiusEval e = B.eval_with_derivative(z[i], tol);
        if (std::abs(e.value - w_curr) > tol.fiber_residual * std::max(1.0, std::abs(e.derivative)))
            throw spec_error("start point " + std::to_string(i) +
                             " does not lie over the path start");
        tracks[i].samples.push_back({0.0, z[i], std::abs(e.derivative)});
        tracks[i].min_derivative_seen = std::abs(e.derivative);
    }

    double t = 0.0;
    double h = tol.initial_step;
    const double h_cap = 5.0 * tol.initial_step;
    int streak = 0;
    std::vector<double> sep(n, inf);
    std::vector<cplx> cand(n), pred(n);

    while (t < 1.0) {
        const double t_next = std::min({1.0, t + std::min(h, path.resolution_step(t)),
                                        path.next_breakpoint(t)});
        const cplx w_next = path.point(t_next);

        std::fill(sep.begin(), sep.end(), inf);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = std::abs(z[i] - z[j]);
                sep[i] = std::min(sep[i], d);
                sep[j] = std::min(sep[j], d);
            }

        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            const MoebiusEval e0 = B.eval_with_derivative(z[i], tol);
            cplx zz = z[i];
            if (std::abs(e0.derivative) >= tol.min_derivative)
                zz += (w_next - w_curr) / e0.derivative;
            pred[i] = zz;
            bool conv = false;
            double best_corr = inf;
            cplx best_z = zz;
            for (int it = 0; it < tol.newton_iterations; ++it) {
                const MoebiusEval e = B.eval_with_derivative(zz, tol);
                if (std::abs(e.derivative) < tol.min_derivative) break;
                const cplx corr = (e.value - w_next) / e.derivative;
                zz -= corr;
                if (std::abs(corr) < best_corr) {
                    best_corr = std::abs(corr);
                    best_z = zz;
                }
                if (std::abs(corr) <= 1e-13) {
                    conv = true;
                    break;
                }
            }
            // near the circle the evaluation noise can hold the correction a
            // shade above the exact cutoff no matter how many iterations run;
            // a step that bottomed out far below every acceptance gate is done
            if (!conv && best_corr <= 1e-10) {
                zz = best_z;
                conv = true;
            }
            if (!conv ||
                !(std::abs(zz - pred[i]) <= tol.correction_ratio * sep[i] ||
                  std::isinf(sep[i])) ||
                !(std::abs(zz - z[i]) <= tol.sample_ratio * sep[i] || std::isinf(sep[i])))
                ok = false;
            cand[i] = zz;
        }

        if (!ok) {
            h *= 0.5;
            streak = 0;
            if (h < tol.step_underflow)
                throw numeric_error("track_step",
                                    "step underflow at t = " + std::to_string(t));
            continue;
        }

        z = cand;
        t = t_next;
        w_curr = w_next;
        for (std::size_t i = 0; i < n; ++i) {
            const MoebiusEval e = B.eval_with_derivative(z[i], tol);
            const double dmod = std::abs(e.derivative);
            if (dmod < tol.min_derivative)
                throw numeric_error("track_critical",
                                    "derivative collapsed at t = " + std::to_string(t));
            if (std::abs(e.value - w_curr) > tol.track_residual * std::max(1.0, dmod))
                throw numeric_error("track_residual",
                                    "sample residual breached at t = " + std::to_string(t));
            tracks[i].min_derivative_seen = std::min(tracks[i].min_derivative_seen, dmod);
            tracks[i].samples.push_back({t, z[i], dmod});
        }
        ++streak;
        if (streak >= tol.easy_accepts) {
            h = std::min(2.0 * h, h_cap);
            streak = 0;
        }
    }

    for (std::size_t i = 0; i < n; ++i) tracks[i].end = z[i];
    return tracks;
}

} // namespace detail

/// Lockstep transport of a full list of fiber points along the path. The
/// starts must be the fiber over the path start, in any order.
inline std::vector<FiberTrack> lift_fiber(const FiniteBlaschke& B, const PlanePath& path,
                                          const std::vector<cplx>& starts,
                                          const Tolerances& tol = Tolerances::defaults()) {
    return detail::track_bundle(B, path, starts, tol);
}

/// Analytic continuation of the branch of B^{-1} through `start` along the
/// path. The whole fiber over the start point is tracked in lockstep, and the
/// track belonging to `start` is returned.
inline FiberTrack lift_path(const FiniteBlaschke& B, const PlanePath& path, cplx start,
                            const Tolerances& tol = Tolerances::defaults()) {
    const Fiber f = fiber(B, path.startpoint(), tol);
    if (!f.simple())
        throw spec_error("path lift needs a simple fiber over the start point");
    std::size_t idx = f.points.size();
    for (std::size_t i = 0; i < f.points.size(); ++i)
        if (std::abs(f.points[i] - start) <= 1e-8) {
            idx = i;
            break;
        }
    if (idx == f.points.size())
        throw spec_error("start point does not lie on the fiber over the path start");
    std::vector<FiberTrack> tracks = detail::track_bundle(B, path, f.points, tol);
    return tracks[idx];
}

/// Monodromy permutation of one loop on the given base fiber: entry i is the
/// index of the fiber point where the lift started at point i ends.
inline Permutation lift_loop_permutation(const FiniteBlaschke& B, const PlanePath& loop,
                                         const Fiber& base,
                                         const Tolerances& tol = Tolerances::defaults()) {
    if (!loop.is_loop())
        throw spec_error("loop does not close");
    if (std::abs(base.w - loop.startpoint()) > 1e-12)
        throw spec_error("base fiber does not sit over the loop start");
    if (!base.simple() || base.min_separation < tol.fiber_separation)
        throw spec_error("base fiber must be simple and separated");

    const std::vector<FiberTrack> tracks = detail::track_bundle(B, loop, base.points, tol);
    const std::size_t n = base.points.size();
    std::vector<int> im(n, -1);
    std::vector<char> used(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
        std::size_t best = n;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = std::abs(tracks[i].end - base.points[j]);
            if (d < d1) {
                d2 = d1;
                d1 = d;
                best = j;
            } else if (d < d2) {
                d2 = d;
            }
        }
        if (!(d1 <= 0.25 * base.min_separation) ||
            (n > 1 && !(d2 >= tol.match_guard * d1)))
            throw numeric_error("endpoint_match",
                                "ambiguous endpoint for lift " + std::to_string(i));
        if (used[best])
            throw numeric_error("endpoint_match", "two lifts share an endpoint");
        used[best] = 1;
        im[i] = static_cast<int>(best);
    }
    return Permutation(std::move(im));
}

/// Which sheets fall together over a critical value, found by tracking the
/// base fiber radially toward it and watching pairwise gaps contract between
/// two stopping radii.
struct CollisionBlocks {
    cplx value;
    double epsilon = 0.0;                  // outer stopping distance finally used
    std::vector<std::vector<int>> blocks;  // indices into the base fiber, sorted
    std::vector<cplx> witnesses;           // per block: critical point, or limit point
};

inline CollisionBlocks radial_collision(const FiniteBlaschke& B, const Fiber& base, cplx v,
                                        const Tolerances& tol = Tolerances::defaults()) {
    if (!base.simple() || base.min_separation < tol.fiber_separation)
        throw spec_error("collision probe needs a simple separated base fiber");
    const cplx w0 = base.w;
    const double dist = std::abs(w0 - v);
    if (dist == 0.0)
        throw spec_error("base point coincides with the target value");
    const cplx dir = (w0 - v) / dist;
    const std::size_t n = base.points.size();
    const CriticalData cd = critical_data(B, tol);

    double eps = std::min(tol.collision_stop, dist / 4.0);
    for (int attempt = 0; attempt <= tol.collision_retries; ++attempt, eps /= 10.0) {
        const cplx w1 = v + eps * dir;
        const cplx w2 = v + 0.25 * eps * dir;

        std::vector<FiberTrack> leg1 =
            detail::track_bundle(B, PlanePath::line(w0, w1), base.points, tol);
        std::vector<cplx> z1(n);
        for (std::size_t i = 0; i < n; ++i) z1[i] = leg1[i].end;
        std::vector<FiberTrack> leg2 =
            detail::track_bundle(B, PlanePath::line(w1, w2), z1, tol);
        std::vector<cplx> z2(n);
        for (std::size_t i = 0; i < n; ++i) z2[i] = leg2[i].end;

        detail::DisjointSets ds(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (std::abs(z2[i] - z2[j]) <= tol.collision_shrink * std::abs(z1[i] - z1[j]))
                    ds.unite(i, j);

        std::vector<std::vector<int>> blocks;
        {
            std::vector<int> head(n, -1);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t r = ds.find(i);
                if (head[r] < 0) {
                    head[r] = static_cast<int>(blocks.size());
                    blocks.emplace_back();
                }
                blocks[static_cast<std::size_t>(head[r])].push_back(static_cast<int>(i));
            }
        }

        double intra = 0.0;
        double inter = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < blocks.size(); ++a) {
            for (std::size_t p = 0; p < blocks[a].size(); ++p)
                for (std::size_t q = p + 1; q < blocks[a].size(); ++q)
                    intra = std::max(intra, std::abs(z2[static_cast<std::size_t>(blocks[a][p])] -
                                                     z2[static_cast<std::size_t>(blocks[a][q])]));
            for (std::size_t b = a + 1; b < blocks.size(); ++b)
                for (int p : blocks[a])
                    for (int q : blocks[b])
                        inter = std::min(inter, std::abs(z2[static_cast<std::size_t>(p)] -
                                                         z2[static_cast<std::size_t>(q)]));
        }
        bool any_multi = false;
        for (const auto& blk : blocks)
            if (blk.size() >= 2) any_multi = true;
        if (!any_multi || inter < tol.cluster_gap * intra) continue;

        CollisionBlocks out;
        out.value = v;
        out.epsilon = eps;
        out.blocks = std::move(blocks);
        for (const auto& blk : out.blocks) {
            cplx centroid(0.0, 0.0);
            for (int p : blk) centroid += z2[static_cast<std::size_t>(p)];
            centroid /= static_cast<double>(blk.size());
            if (blk.size() >= 2) {
                double bd = std::numeric_limits<double>::infinity();
                cplx wz = centroid;
                for (const CriticalPoint& cp : cd.points) {
                    if (std::abs(cp.value - v) > 100.0 * tol.dedup_exceptional) continue;
                    const double d = std::abs(cp.z - centroid);
                    if (d < bd) {
                        bd = d;
                        wz = cp.z;
                    }
                }
                out.witnesses.push_back(wz);
            } else {
                out.witnesses.push_back(centroid);
            }
        }
        return out;
    }
    throw numeric_error("collision_separation",
                        "collision blocks failed to separate near the target value");
}

} // namespace blaschke
