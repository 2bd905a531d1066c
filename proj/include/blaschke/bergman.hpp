#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "continuation.hpp"
#include "errors.hpp"
#include "fibers.hpp"
#include "monodromy.hpp"
#include "path.hpp"
#include "product.hpp"
#include "tolerances.hpp"

namespace blaschke {

/// Gauss-Legendre nodes and weights on [0, 1], found by Newton iteration on
/// the Legendre recurrence.
inline std::vector<std::pair<double, double>> legendre_rule(int n) {
    if (n < 1) throw spec_error("quadrature needs at least one radial node");
    std::vector<std::pair<double, double>> out;
    constexpr double pi = 3.141592653589793238462643;
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push_back({0.5 * (x + 1.0), 0.5 * w});
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Nodes and weights for the normalized area measure on the disk, exact for
/// monomial inner products <z^m, z^n> = delta_mn / (n+1) whenever the radial
/// order covers (m+n)/2 and the angular count exceeds m+n.
struct DiskQuadrature {
    std::vector<cplx> nodes;
    std::vector<double> weights;

    static DiskQuadrature build(int radial, int angular) {
        if (angular < 1) throw spec_error("quadrature needs at least one angle");
        constexpr double tau = 6.283185307179586476925287;
        const auto rad = legendre_rule(radial);
        DiskQuadrature q;
        q.nodes.reserve(static_cast<std::size_t>(radial) * static_cast<std::size_t>(angular));
        q.weights.reserve(q.nodes.capacity());
        for (const auto& [s, u] : rad) {
            const double r = std::sqrt(s);
            for (int j = 0; j < angular; ++j) {
                const double th = tau * j / static_cast<double>(angular);
                q.nodes.push_back(r * std::exp(cplx(0.0, th)));
                q.weights.push_back(u / static_cast<double>(angular));
            }
        }
        return q;
    }
};

inline cplx bergman_kernel(cplx lambda, cplx z) {
    const cplx den = 1.0 - std::conj(lambda) * z;
    return 1.0 / (den * den);
}

using field_fn = std::function<cplx(cplx)>;

inline cplx quad_inner(const DiskQuadrature& q, const field_fn& f, const field_fn& g) {
    cplx acc(0.0, 0.0);
    for (std::size_t k = 0; k < q.nodes.size(); ++k)
        acc += q.weights[k] * f(q.nodes[k]) * std::conj(g(q.nodes[k]));
    return acc;
}

/// Branch values of the n sheets of w -> B^{-1}(B(z)), continued from the
/// base fiber along a canonical route per evaluation point. Routes leave the
/// first base fiber point, run straight, and take the short way around any
/// preimage of a critical value they would otherwise graze; the whole fiber
/// is transported in lockstep so the arriving values carry consistent sheet
/// labels. Endpoints are cached per point and Newton polished.
class BranchAtlas {
public:
    explicit BranchAtlas(const FiniteBlaschke& B,
                         const Tolerances& tol = Tolerances::defaults())
        : B_(B), tol_(tol), rep_(surface_components(B, tol)) {
        const CriticalData cd = critical_data(B_, tol_);
        for (const cplx& v : cd.exceptional) {
            const Fiber f = fiber(B_, v, tol_);
            int nclusters = 0;
            for (int c : f.cluster) nclusters = std::max(nclusters, c + 1);
            for (int c = 0; c < nclusters; ++c) {
                cplx centroid(0.0, 0.0);
                int m = 0;
                for (std::size_t i = 0; i < f.points.size(); ++i)
                    if (f.cluster[i] == c) {
                        centroid += f.points[i];
                        ++m;
                    }
                obstacles_.push_back(centroid / static_cast<double>(m));
            }
        }
    }

    const ComponentReport& report() const { return rep_; }
    const FiniteBlaschke& product() const { return B_; }
    const std::vector<cplx>& obstacles() const { return obstacles_; }

    /// Whether the point keeps quad_clearance from every preimage of a
    /// critical value and boundary_clearance from the unit circle.
    bool usable(cplx z) const {
        if (!(std::abs(z) < 1.0 - tol_.boundary_clearance)) return false;
        for (const cplx& o : obstacles_)
            if (std::abs(z - o) < tol_.quad_clearance) return false;
        return true;
    }

    /// All sheet values over z, indexed like the base fiber. Sheet 0 is z
    /// itself.
    const std::vector<cplx>& branches(cplx z) {
        const std::pair<double, double> key{z.real(), z.imag()};
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;

        const cplx z0 = rep_.base.points[0];
        std::vector<cplx> ends;
        if (std::abs(z - z0) < 1e-14) {
            ends = rep_.base.points;
        } else {
            const PlanePath zroute = build_route(z0, z);
            const PlanePath wroute = image_polyline(zroute);
            std::vector<FiberTrack> tracks =
                detail::track_bundle(B_, wroute, rep_.base.points, tol_);
            const cplx w = B_.eval(z, tol_);
            ends.resize(tracks.size());
            for (std::size_t i = 0; i < tracks.size(); ++i) {
                cplx e = tracks[i].end;
                for (int it2 = 0; it2 < 4; ++it2) {
                    const MoebiusEval ev = B_.eval_with_derivative(e, tol_);
                    if (std::abs(ev.derivative) < tol_.min_derivative) break;
                    const cplx step = (ev.value - w) / ev.derivative;
                    if (!(std::abs(step) < 0.1)) break;
                    e -= step;
                    if (std::abs(step) < 1e-16) break;
                }
                ends[i] = e;
            }
            if (std::abs(ends[0] - z) > 1e-8)
                throw numeric_error("branch_base",
                                    "sheet zero did not return to the evaluation point");
            ends[0] = z;
        }
        return cache_.emplace(key, std::move(ends)).first->second;
    }

    /// Class operator: sum of h(sigma(z)) sigma'(z) over the sheets in the
    /// orbit, with sigma'(z) = B'(z) / B'(sigma(z)).
    cplx apply(int cls, const field_fn& h, cplx z) {
        const std::vector<cplx>& b = branches(z);
        const cplx bp = B_.eval_with_derivative(z, tol_).derivative;
        cplx acc(0.0, 0.0);
        for (int i : orbit(cls)) {
            const cplx s = b[static_cast<std::size_t>(i)];
            const cplx ds = B_.eval_with_derivative(s, tol_).derivative;
            if (std::abs(ds) < tol_.min_derivative)
                throw numeric_error("branch_derivative",
                                    "branch derivative vanished at a class member");
            acc += h(s) * (bp / ds);
        }
        return acc;
    }

    std::vector<cplx> class_members(int cls, cplx z) {
        const std::vector<cplx>& b = branches(z);
        std::vector<cplx> out;
        for (int i : orbit(cls)) out.push_back(b[static_cast<std::size_t>(i)]);
        return out;
    }

    const std::vector<int>& orbit(int cls) const {
        if (cls < 0 || static_cast<std::size_t>(cls) >= rep_.orbits.size())
            throw spec_error("class index out of range");
        return rep_.orbits[static_cast<std::size_t>(cls)];
    }

    int inverse_class(int cls) const {
        if (cls < 0 || static_cast<std::size_t>(cls) >= rep_.inverse_pairing.size())
            throw spec_error("class index out of range");
        return rep_.inverse_pairing[static_cast<std::size_t>(cls)];
    }

private:
    /// Straight route with short-side arcs of radius up to twice the
    /// clearance around every obstacle the segment would graze. Overlapping
    /// detours are refused.
    PlanePath build_route(cplx from, cplx to) const {
        const double base_r = 2.0 * tol_.quad_clearance;
        struct Detour {
            double t1, t2;
            cplx o;
            double r;
        };
        std::vector<Detour> detours;
        const cplx d = to - from;
        const double len2 = std::norm(d);
        for (const cplx& o : obstacles_) {
            double r = std::min(base_r, std::min(std::abs(to - o), std::abs(from - o)));
            if (!(r > 0.0))
                throw numeric_error("route_blocked", "route endpoint sits on an obstacle");
            const double tproj = ((o - from) * std::conj(d)).real() / len2;
            const cplx foot = from + d * std::clamp(tproj, 0.0, 1.0);
            if (std::abs(foot - o) >= r) continue;
            const double perp = std::abs(from + d * tproj - o);
            const double half = std::sqrt(std::max(0.0, r * r - perp * perp)) / std::sqrt(len2);
            double t1 = tproj - half, t2 = tproj + half;
            t1 = std::clamp(t1, 0.0, 1.0);
            t2 = std::clamp(t2, 0.0, 1.0);
            if (t2 - t1 < 1e-15) continue;
            detours.push_back({t1, t2, o, r});
        }
        std::sort(detours.begin(), detours.end(),
                  [](const Detour& a, const Detour& b) { return a.t1 < b.t1; });
        for (std::size_t i = 0; i + 1 < detours.size(); ++i)
            if (detours[i + 1].t1 < detours[i].t2)
                throw numeric_error("route_blocked", "overlapping detours");

        PlanePath p = PlanePath::line(from, from);
        for (const Detour& dt : detours) {
            const cplx entry = from + d * dt.t1;
            const cplx exit = from + d * dt.t2;
            p.append_line(entry);
            const double th1 = std::arg(entry - dt.o);
            const double th2 = std::arg(exit - dt.o);
            double dth = th2 - th1;
            constexpr double tau = 6.283185307179586476925287;
            while (dth <= -0.5 * tau) dth += tau;
            while (dth > 0.5 * tau) dth -= tau;
            p.append_arc(dt.o, dt.r, th1, th1 + dth);
        }
        p.append_line(to);
        return p;
    }

    /// Push the z-route through B as a polyline, stepping finer near
    /// obstacles so the image cannot cut a corner across a critical value.
    PlanePath image_polyline(const PlanePath& zroute) const {
        const double L = zroute.total_length();
        PlanePath w = PlanePath::line(B_.eval(zroute.point(0.0), tol_),
                                      B_.eval(zroute.point(0.0), tol_));
        double t = 0.0;
        while (t < 1.0) {
            const cplx z = zroute.point(t);
            double od = std::numeric_limits<double>::infinity();
            for (const cplx& o : obstacles_) od = std::min(od, std::abs(z - o));
            const double dz = std::max(0.5 * tol_.quad_clearance, 0.25 * od);
            const double dt = L > 0.0 ? dz / L : 1.0;
            t = std::min(1.0, t + dt);
            w.append_line(B_.eval(zroute.point(t), tol_));
        }
        return w;
    }

    const FiniteBlaschke B_;
    const Tolerances tol_;
    ComponentReport rep_;
    std::vector<cplx> obstacles_;
    std::map<std::pair<double, double>, std::vector<cplx>> cache_;
};

struct AdjointCheck {
    cplx lhs;
    cplx rhs;
    double residual = 0.0;
    double forfeited_weight = 0.0;
    long used_nodes = 0;
};

/// Quadrature test of <E h, g> = <h, E~ g> with E the class operator and E~
/// the operator of the paired class. Nodes without clearance or without a
/// usable route are dropped from both sides; their total weight is capped.
inline AdjointCheck adjoint_residual(BranchAtlas& atlas, int cls, const field_fn& h,
                                     const field_fn& g, const DiskQuadrature& quad,
                                     const Tolerances& tol = Tolerances::defaults()) {
    const int icls = atlas.inverse_class(cls);
    AdjointCheck out;
    cplx lhs(0.0, 0.0), rhs(0.0, 0.0);
    for (std::size_t k = 0; k < quad.nodes.size(); ++k) {
        const cplx z = quad.nodes[k];
        if (!atlas.usable(z)) {
            out.forfeited_weight += quad.weights[k];
            continue;
        }
        cplx eh, eg;
        try {
            eh = atlas.apply(cls, h, z);
            eg = atlas.apply(icls, g, z);
        } catch (const numeric_error& e) {
            if (std::string(e.gate()) == "route_blocked") {
                out.forfeited_weight += quad.weights[k];
                continue;
            }
            throw;
        }
        lhs += quad.weights[k] * eh * std::conj(g(z));
        rhs += quad.weights[k] * h(z) * std::conj(eg);
        ++out.used_nodes;
    }
    if (out.forfeited_weight > tol.forfeit_cap)
        throw numeric_error("quadrature_coverage",
                            "forfeited weight " + std::to_string(out.forfeited_weight) +
                            " exceeds the cap");
    out.lhs = lhs;
    out.rhs = rhs;
    out.residual = std::abs(lhs - rhs);
    return out;
}

struct KernelIdentityCheck {
    cplx lhs;
    cplx rhs;
    double residual = 0.0;
};

/// Reproducing-kernel transformation law: applying the class operator to
/// K_lambda in z matches the sum of conj(tau'(lambda)) K_{tau(lambda)}(z)
/// over the paired class.
inline KernelIdentityCheck kernel_identity_residual(BranchAtlas& atlas, int cls, cplx lambda,
                                                    cplx z,
                                                    const Tolerances& tol = Tolerances::defaults()) {
    KernelIdentityCheck out;
    out.lhs = atlas.apply(cls, [&](cplx s) { return bergman_kernel(lambda, s); }, z);
    const int icls = atlas.inverse_class(cls);
    const std::vector<cplx> taus = atlas.class_members(icls, lambda);
    const cplx bpl = atlas.product().eval_with_derivative(lambda, tol).derivative;
    cplx rhs(0.0, 0.0);
    for (const cplx& tv : taus) {
        const cplx dtv = atlas.product().eval_with_derivative(tv, tol).derivative;
        if (std::abs(dtv) < tol.min_derivative)
            throw numeric_error("branch_derivative", "kernel identity hit a critical branch");
        rhs += std::conj(bpl / dtv) * bergman_kernel(tv, z);
    }
    out.rhs = rhs;
    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

/// Each branch's derivative must satisfy tau' = B' / (B' o tau); compared
/// against a central difference of the tracked branch positions.
inline double derivative_identity_residual(BranchAtlas& atlas, int cls, cplx lambda,
                                           const Tolerances& tol = Tolerances::defaults()) {
    const double h = 1e-5;
    const std::vector<cplx> mid = atlas.class_members(cls, lambda);
    const std::vector<cplx> plus = atlas.class_members(cls, lambda + h);
    const std::vector<cplx> minus = atlas.class_members(cls, lambda - h);
    if (plus.size() != mid.size() || minus.size() != mid.size())
        throw numeric_error("branch_base", "class member count changed between offsets");
    const cplx bp = atlas.product().eval_with_derivative(lambda, tol).derivative;
    double worst = 0.0;
    for (std::size_t i = 0; i < mid.size(); ++i) {
        const cplx fd = (plus[i] - minus[i]) / (2.0 * h);
        const cplx db = atlas.product().eval_with_derivative(mid[i], tol).derivative;
        if (std::abs(db) < tol.min_derivative)
            throw numeric_error("branch_derivative", "derivative identity hit a critical branch");
        worst = std::max(worst, std::abs(fd - bp / db));
    }
    return worst;
}

struct SymmetryCheck {
    double precondition_residual = 0.0;
    cplx inner_fg;
    cplx inner_transformed;
    double residual = 0.0;
};

using auto_map = std::function<MoebiusEval(cplx)>;

/// For a disk automorphism rho with B o rho = B, the weighted composition
/// f -> (f o rho) rho' preserves Bergman inner products. The invariance
/// precondition is sampled on a circle first.
inline SymmetryCheck symmetry_unitary_check(const FiniteBlaschke& B, const auto_map& rho,
                                            const field_fn& f, const field_fn& g,
                                            const DiskQuadrature& quad,
                                            const Tolerances& tol = Tolerances::defaults()) {
    constexpr double tau = 6.283185307179586476925287;
    SymmetryCheck out;
    for (int k = 0; k < 100; ++k) {
        const cplx z = 0.8 * std::exp(cplx(0.0, tau * k / 100.0));
        const MoebiusEval r = rho(z);
        const double res = std::abs(B.eval(r.value, tol) - B.eval(z, tol));
        out.precondition_residual = std::max(out.precondition_residual, res);
    }
    if (out.precondition_residual > tol.symmetry_check)
        throw numeric_error("not_symmetric",
                            "composition does not fix the product: residual " +
                            std::to_string(out.precondition_residual));
    const field_fn uf = [&](cplx z) {
        const MoebiusEval r = rho(z);
        return f(r.value) * r.derivative;
    };
    const field_fn ug = [&](cplx z) {
        const MoebiusEval r = rho(z);
        return g(r.value) * r.derivative;
    };
    out.inner_fg = quad_inner(quad, f, g);
    out.inner_transformed = quad_inner(quad, uf, ug);
    out.residual = std::abs(out.inner_fg - out.inner_transformed);
    return out;
}

} // namespace blaschke
