#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "fibers.hpp"
#include "mobius.hpp"
#include "monodromy.hpp"
#include "product.hpp"
#include "tolerances.hpp"

namespace blaschke {

/// Recipe for a zero sequence accumulating at the circle.
struct ThinSpec {
    std::string rule;  // "factorial" | "ratio" | "explicit"
    std::size_t N = 0;
    double ratio_c = 0.5;
    double start_decrement = 0.5;
    std::vector<SeqPoint> points;  // for "explicit"
};

/// Base-b radical inverse of k, in [0, 1).
inline double van_der_corput(std::size_t k, unsigned base = 2) {
    double x = 0.0, scale = 1.0 / static_cast<double>(base);
    while (k > 0) {
        x += scale * static_cast<double>(k % base);
        k /= base;
        scale /= static_cast<double>(base);
    }
    return x;
}

/// Arguments follow the base-2 radical inverse so no two points share an
/// angle; decrements follow the chosen rule. The factorial rule keeps
/// 1 - |z_k| = 1/k! exactly by iterated division, which stays a normal double
/// up to k = 170.
inline ZeroSequence generate_thin_sequence(const ThinSpec& spec,
                                           const Tolerances& tol = Tolerances::defaults()) {
    constexpr double tau = 6.283185307179586476925287;
    (void)tol;
    ZeroSequence out;
    out.source_tag = spec.rule;
    if (spec.rule == "factorial") {
        if (spec.N < 1 || spec.N > 170)
            throw spec_error("factorial rule supports 1 <= N <= 170");
        double dec = 1.0;
        for (std::size_t k = 0; k < spec.N; ++k) {
            if (k > 0) dec /= static_cast<double>(k + 1);
            out.points.push_back({dec, tau * van_der_corput(k)});
        }
    } else if (spec.rule == "ratio") {
        if (spec.N < 1) throw spec_error("ratio rule needs N >= 1");
        if (!(spec.ratio_c > 0.0 && spec.ratio_c < 1.0))
            throw spec_error("ratio must lie in (0, 1)");
        if (!(spec.start_decrement > 0.0 && spec.start_decrement <= 1.0))
            throw spec_error("start decrement must lie in (0, 1]");
        double dec = spec.start_decrement;
        for (std::size_t k = 0; k < spec.N; ++k) {
            out.points.push_back({dec, tau * van_der_corput(k)});
            dec *= spec.ratio_c;
        }
    } else if (spec.rule == "explicit") {
        if (spec.points.empty()) throw spec_error("explicit rule needs points");
        for (const SeqPoint& p : spec.points)
            if (!(p.decrement > 0.0 && p.decrement <= 1.0))
                throw spec_error("explicit decrements must lie in (0, 1]");
        out.points = spec.points;
    } else {
        throw spec_error("unknown sequence rule: " + spec.rule);
    }
    return out;
}

struct ExtractionResult {
    std::vector<std::size_t> indices;  // positions in the input sequence
    ZeroSequence subsequence;
    std::vector<double> certificates;  // prod_{j<k} d(w_j, w_k) at acceptance
};

/// Greedy subsequence selection: the first point is kept, and a later point
/// joins once its separation product against everything already chosen
/// exceeds 1 - 1/(k+1)^2 for slot k, so every certificate witnesses that
/// separation bound at the moment of acceptance.
inline ExtractionResult extract_thin_subsequence(const ZeroSequence& seq, std::size_t K,
                                                 const Tolerances& tol = Tolerances::defaults()) {
    (void)tol;
    if (K < 1) throw spec_error("extraction needs K >= 1");
    if (seq.points.empty()) throw spec_error("cannot extract from an empty sequence");
    ExtractionResult out;
    out.subsequence.source_tag = seq.source_tag + ":extracted";
    std::vector<SeqPoint> chosen;
    chosen.push_back(seq.points[0]);
    out.indices.push_back(0);
    out.certificates.push_back(1.0);
    for (std::size_t i = 1; i < seq.points.size() && chosen.size() < K; ++i) {
        const std::size_t s = chosen.size();
        const double need = std::log1p(-1.0 / static_cast<double>((s + 2) * (s + 2)));
        double acc = 0.0;
        for (const SeqPoint& c : chosen) acc += seq_log_distance(c, seq.points[i]);
        if (acc > need) {
            chosen.push_back(seq.points[i]);
            out.indices.push_back(i);
            out.certificates.push_back(std::exp(acc));
        }
    }
    if (chosen.size() < K)
        throw spec_error("sequence exhausted after choosing " +
                         std::to_string(chosen.size()) + " of " + std::to_string(K));
    out.subsequence.points = std::move(chosen);
    return out;
}

struct StageAudit {
    int m = 0;
    cplx lambda;
    std::size_t pool_index = 0;
    double r_gate = 0.0;       // radius separating old and new critical points
    cplx outer_point;          // the single new critical point outside r_gate
    cplx outer_value;
    double value_sep = std::numeric_limits<double>::infinity();
    int inside_count = 0;
    double simple_margin = std::numeric_limits<double>::infinity();
    double k_tilde_radius = 0.0;
    double k_radius = 0.0;
    double delta = 0.0;
    int q = 0;
    bool pass = false;
};

struct ConstructionResult {
    FiniteBlaschke product;
    std::vector<StageAudit> audits;
};

namespace detail {

inline double min_derivative_on_circle(const FiniteBlaschke& B, double r,
                                       const Tolerances& tol) {
    constexpr double tau = 6.283185307179586476925287;
    double lo = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 512; ++k) {
        const cplx z = r * std::exp(cplx(0.0, tau * k / 512.0));
        lo = std::min(lo, std::abs(B.eval_with_derivative(z, tol).derivative));
    }
    return lo;
}

} // namespace detail

/// Stagewise growth of an irreducible product from a zero pool. Each new
/// factor is drawn from the pool under a geometric decrement budget; it is
/// accepted when exactly one simple critical point appears outside the gate
/// radius, its value lands outside that radius too, and all critical data
/// stays nondegenerate. Every accepted stage must keep the component count of
/// the pair surface at two.
inline ConstructionResult construct_irreducible_stages(
    const ZeroSequence& pool, int stages,
    const Tolerances& tol = Tolerances::defaults()) {
    if (stages < 1) throw spec_error("need at least one stage");
    if (pool.points.size() < 2) throw spec_error("pool needs at least two points");
    for (int i = 0; i < 2; ++i)
        if (pool.points[static_cast<std::size_t>(i)].decrement < tol.interior_margin)
            throw spec_error("seed pool point is not representable");

    std::vector<StageAudit> audits;
    FiniteBlaschke B(cplx(1.0, 0.0),
                     {{DiskPoint(pool.points[0].to_cplx(), tol), 1},
                      {DiskPoint(pool.points[1].to_cplx(), tol), 1}},
                     tol);
    {
        const CriticalData cd = critical_data(B, tol);
        const double rt = std::max(0.5, std::abs(cd.points[0].z) + 0.05);
        if (!(rt < 1.0))
            throw numeric_error("stage_failure", "seed critical point too close to the circle");
        StageAudit a;
        a.m = 1;
        a.lambda = pool.points[1].to_cplx();
        a.pool_index = 1;
        a.r_gate = rt;
        a.outer_point = cd.points[0].z;
        a.outer_value = cd.points[0].value;
        a.inside_count = 0;
        a.simple_margin = std::abs(B.derivative_at(cd.points[0].z, 2, tol));
        a.k_tilde_radius = rt;
        a.k_radius = 0.5 * (1.0 + rt);
        a.delta = 0.5 * detail::min_derivative_on_circle(B, rt, tol);
        a.q = surface_components(B, tol).q;
        if (a.q != 2)
            throw numeric_error("stage_irreducibility",
                                "seed stage produced q = " + std::to_string(a.q));
        a.pass = true;
        audits.push_back(a);
    }

    std::size_t pool_pos = 2;
    for (int m = 1; m < stages; ++m) {
        const StageAudit& prev = audits.back();
        const double r_gate =
            std::max(0.5 * (1.0 + prev.k_radius), 1.0 - 1.0 / static_cast<double>(m + 2));
        // every critical point of the current product lies inside the stored
        // disk, so a candidate factor is admissible only when it adds exactly
        // one point beyond this fence
        const double fence = std::max(r_gate, prev.k_tilde_radius);
        long k_slot = 0;
        long t_filter = 0, t_unrep = 0, t_solve = 0, t_outer = 0, t_value = 0,
             t_sep = 0, t_simple = 0;
        bool accepted = false;
        long examined = 0;
        while (pool_pos < pool.points.size() && examined < tol.scan_budget && !accepted) {
            const SeqPoint sp = pool.points[pool_pos];
            const std::size_t this_index = pool_pos;
            ++pool_pos;
            ++examined;
            const double budget = prev.delta * (1.0 - prev.k_radius) /
                                  std::ldexp(1.0, static_cast<int>(std::min<long>(k_slot + 2, 1000)));
            if (!(sp.decrement <= budget)) {
                ++t_filter;
                continue;
            }
            ++k_slot;
            if (sp.decrement < tol.interior_margin) {
                ++t_unrep;
                continue;
            }
            const cplx lam = sp.to_cplx();
            std::vector<ZeroFactor> zs = B.zeros();
            zs.push_back({DiskPoint(lam, tol), 1});
            const cplx cnew = B.constant() * (std::conj(lam) / std::abs(lam));
            FiniteBlaschke cand(cnew, std::move(zs), tol);

            CriticalData ccd;
            try {
                ccd = critical_data(cand, tol);
            } catch (const numeric_error&) {
                ++t_solve;
                continue;
            }
            int outer_idx = -1, n_outer = 0, n_inside = 0;
            for (std::size_t i = 0; i < ccd.points.size(); ++i) {
                if (std::abs(ccd.points[i].z) > fence) {
                    ++n_outer;
                    outer_idx = static_cast<int>(i);
                } else {
                    ++n_inside;
                }
            }
            if (n_outer != 1 || ccd.points[static_cast<std::size_t>(outer_idx)].multiplicity != 1) {
                ++t_outer;
                continue;
            }
            const CriticalPoint& star = ccd.points[static_cast<std::size_t>(outer_idx)];
            if (!(std::abs(star.value) > r_gate)) {
                ++t_value;
                continue;
            }
            double value_sep = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < ccd.points.size(); ++i)
                for (std::size_t j = i + 1; j < ccd.points.size(); ++j)
                    value_sep = std::min(value_sep,
                                         std::abs(ccd.points[i].value - ccd.points[j].value));
            if (value_sep < tol.stage_margin) {
                ++t_sep;
                continue;
            }
            double simple_margin = std::numeric_limits<double>::infinity();
            for (const CriticalPoint& cp : ccd.points)
                simple_margin = std::min(simple_margin,
                                         std::abs(cand.derivative_at(cp.z, 2, tol)));
            if (simple_margin < tol.stage_margin) {
                ++t_simple;
                continue;
            }

            const int q = surface_components(cand, tol).q;
            if (q != 2)
                throw numeric_error("stage_irreducibility",
                                    "stage " + std::to_string(m + 1) +
                                    " accepted a factor but q = " + std::to_string(q));
            StageAudit a;
            a.m = m + 1;
            a.lambda = lam;
            a.pool_index = this_index;
            a.r_gate = r_gate;
            a.outer_point = star.z;
            a.outer_value = star.value;
            a.value_sep = value_sep;
            a.inside_count = n_inside;
            a.simple_margin = simple_margin;
            // the accepted point becomes the outermost critical point; the
            // next disk reaches most of the way from it to the circle so the
            // following stage can fence it in
            a.k_tilde_radius =
                std::max(fence, 1.0 - 0.7 * (1.0 - std::abs(star.z)));
            a.k_radius = 0.5 * (1.0 + r_gate);
            a.delta = 0.5 * detail::min_derivative_on_circle(cand, a.k_tilde_radius, tol);
            a.q = q;
            a.pass = true;
            audits.push_back(a);
            B = cand;
            accepted = true;
        }
        if (!accepted)
            throw numeric_error(
                "stage_failure",
                "stage " + std::to_string(m + 1) + " exhausted its scan: filter=" +
                    std::to_string(t_filter) + " unrepresentable=" + std::to_string(t_unrep) +
                    " solve=" + std::to_string(t_solve) + " outer=" + std::to_string(t_outer) +
                    " value=" + std::to_string(t_value) + " value_sep=" + std::to_string(t_sep) +
                    " simple=" + std::to_string(t_simple));
    }
    return {std::move(B), std::move(audits)};
}

/// Invariance of the zero multiset under an order-n pseudohyperbolic rotation
/// about mu.
struct RotationStructure {
    cplx mu;
    int n = 0;
    double residual = 0.0;
};

namespace detail {

inline double rotation_cost(const std::vector<cplx>& zeros, cplx mu, cplx xi,
                            const Tolerances& tol) {
    if (!(std::abs(mu) < 1.0 - tol.interior_margin))
        return std::numeric_limits<double>::infinity();
    const std::size_t n = zeros.size();
    std::vector<cplx> rot(n);
    for (std::size_t i = 0; i < n; ++i)
        rot[i] = moebius_value(mu, xi * moebius_value(mu, zeros[i], tol), tol);
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    pairs.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            pairs.emplace_back(std::abs(rot[i] - zeros[j]), i, j);
    std::sort(pairs.begin(), pairs.end());
    std::vector<char> ui(n, 0), uj(n, 0);
    double cost = 0.0;
    std::size_t matched = 0;
    for (const auto& [d, i, j] : pairs) {
        if (ui[i] || uj[j]) continue;
        ui[i] = uj[j] = 1;
        cost = std::max(cost, d);
        if (++matched == n) break;
    }
    return cost;
}

inline cplx pseudo_midpoint(cplx a, cplx b, const Tolerances& tol) {
    const cplx u = moebius_value(a, b, tol);
    const double m = std::abs(u);
    if (m < 1e-15) return a;
    const double s = (1.0 - std::sqrt(std::max(0.0, 1.0 - m * m))) / m;
    return moebius_value(a, s * (u / m), tol);
}

} // namespace detail

/// Scan orders n = rotation_n_max .. 2 for a center making the zero multiset
/// rotation invariant. Candidate centers start from the origin, the zero
/// centroid, and pairwise pseudohyperbolic midpoints, each refined by a
/// compass search on the matching cost.
inline std::optional<RotationStructure> detect_rotational_structure(
    const FiniteBlaschke& B, const Tolerances& tol = Tolerances::defaults()) {
    constexpr double tau = 6.283185307179586476925287;
    std::vector<cplx> zeros;
    for (const ZeroFactor& f : B.zeros())
        for (int m = 0; m < f.multiplicity; ++m) zeros.push_back(f.z.value());
    if (zeros.size() < 2) return std::nullopt;

    std::vector<cplx> seeds{cplx(0.0, 0.0)};
    {
        cplx centroid(0.0, 0.0);
        for (const cplx& z : zeros) centroid += z;
        seeds.push_back(centroid / static_cast<double>(zeros.size()));
        const std::size_t cap = std::min<std::size_t>(B.zeros().size(), 16);
        for (std::size_t i = 0; i < cap; ++i)
            for (std::size_t j = i + 1; j < cap; ++j)
                seeds.push_back(detail::pseudo_midpoint(B.zeros()[i].z.value(),
                                                        B.zeros()[j].z.value(), tol));
    }

    for (int n = tol.rotation_n_max; n >= 2; --n) {
        const cplx xi = std::exp(cplx(0.0, tau / static_cast<double>(n)));
        for (const cplx& seed : seeds) {
            cplx mu = seed;
            double f = detail::rotation_cost(zeros, mu, xi, tol);
            double step = 0.1;
            while (step > 1e-10) {
                const cplx dirs[4] = {cplx(step, 0.0), cplx(-step, 0.0),
                                      cplx(0.0, step), cplx(0.0, -step)};
                cplx best_mu = mu;
                double best = f;
                for (const cplx& d : dirs) {
                    const double c = detail::rotation_cost(zeros, mu + d, xi, tol);
                    if (c < best) {
                        best = c;
                        best_mu = mu + d;
                    }
                }
                if (best_mu == mu) {
                    step *= 0.5;
                } else {
                    mu = best_mu;
                    f = best;
                }
            }
            if (f <= tol.rotation_match) return RotationStructure{mu, n, f};
        }
    }
    return std::nullopt;
}

} // namespace blaschke
