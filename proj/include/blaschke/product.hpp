#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "mobius.hpp"
#include "poly.hpp"
#include "tolerances.hpp"

namespace blaschke {

namespace detail {

/// Type-erased per-product cache so expensive analysis (critical points and
/// values) survives copies of the owning product. Guarded by a mutex because
/// the products themselves are logically const.
struct SlotHolder {
    std::mutex m;
    std::shared_ptr<const void> data;
};

} // namespace detail

struct ZeroFactor {
    DiskPoint z;
    int multiplicity = 1;
};

struct RationalForm {
    poly_t p;  // numerator, ascending coefficients
    poly_t q;  // denominator, ascending coefficients
};

/// Finite Blaschke product c * prod phi_{lambda_i}(z)^{m_i} with |c| = 1.
class FiniteBlaschke {
public:
    FiniteBlaschke(cplx constant, std::vector<ZeroFactor> zeros,
                   const Tolerances& tol = Tolerances::defaults())
        : c_(constant), slot_(std::make_shared<detail::SlotHolder>()) {
        if (std::abs(std::abs(constant) - 1.0) > tol.unimodular)
            throw spec_error("constant must be unimodular (|c| = " +
                             std::to_string(std::abs(constant)) + ")");
        for (const ZeroFactor& f : zeros) {
            if (f.multiplicity < 1)
                throw spec_error("zero multiplicity must be positive");
            bool merged = false;
            for (ZeroFactor& g : zeros_) {
                if (g.z.value() == f.z.value()) {
                    g.multiplicity += f.multiplicity;
                    merged = true;
                    break;
                }
            }
            if (!merged) zeros_.push_back(f);
        }
        long deg = 0;
        for (const ZeroFactor& f : zeros_) deg += f.multiplicity;
        if (deg < 1) throw spec_error("product needs at least one zero");
        if (deg > tol.max_degree)
            throw spec_error("degree " + std::to_string(deg) + " exceeds cap " +
                             std::to_string(tol.max_degree));
        degree_ = static_cast<int>(deg);
        for (std::size_t i = 0; i < zeros_.size() && !conditioning_warning_; ++i)
            for (std::size_t j = i + 1; j < zeros_.size(); ++j)
                if (pseudo_distance(zeros_[i].z.value(), zeros_[j].z.value()) <
                    tol.close_zero_warn) {
                    conditioning_warning_ = true;
                    break;
                }
    }

    cplx constant() const noexcept { return c_; }
    const std::vector<ZeroFactor>& zeros() const noexcept { return zeros_; }
    int degree() const noexcept { return degree_; }
    bool conditioning_warning() const noexcept { return conditioning_warning_; }

    cplx eval(cplx z, const Tolerances& tol = Tolerances::defaults()) const {
        cplx v = c_;
        for (const ZeroFactor& f : zeros_) {
            const cplx fv = moebius_apply(f.z.value(), z, tol).value;
            for (int m = 0; m < f.multiplicity; ++m) v *= fv;
        }
        return v;
    }

    MoebiusEval eval_with_derivative(cplx z,
                                     const Tolerances& tol = Tolerances::defaults()) const {
        cplx v = c_, d(0.0, 0.0);
        for (const ZeroFactor& f : zeros_) {
            const MoebiusEval e = moebius_apply(f.z.value(), z, tol);
            for (int m = 0; m < f.multiplicity; ++m) {
                d = d * e.value + v * e.derivative;
                v = v * e.value;
            }
        }
        return {v, d};
    }

    /// Coefficients a_0..a_order of B(z + h) as a series in h. Each factor
    /// (A0 - h)/(C0 - conj(lambda) h) contributes the series with
    /// f[k] = (A0 t^k - t^{k-1}) / C0, t = conj(lambda)/C0.
    std::vector<cplx> taylor(cplx z, int order,
                             const Tolerances& tol = Tolerances::defaults()) const {
        if (order < 0) throw spec_error("taylor order must be nonnegative");
        const std::size_t n = static_cast<std::size_t>(order) + 1;
        std::vector<cplx> acc(n, cplx(0.0, 0.0));
        acc[0] = c_;
        std::vector<cplx> f(n), next(n);
        for (const ZeroFactor& fac : zeros_) {
            const cplx lam = fac.z.value();
            const cplx C0 = 1.0 - std::conj(lam) * z;
            if (std::abs(C0) <= tol.singular_denom)
                throw numeric_error("moebius_singularity",
                                    "series base point at a pole");
            const cplx A0 = lam - z;
            const cplx t = std::conj(lam) / C0;
            cplx tk(1.0, 0.0);  // t^k
            f[0] = A0 / C0;
            for (std::size_t k = 1; k < n; ++k) {
                const cplx tk1 = tk;  // t^{k-1}
                tk *= t;
                f[k] = (A0 * tk - tk1) / C0;
            }
            for (int m = 0; m < fac.multiplicity; ++m) {
                for (std::size_t k = 0; k < n; ++k) {
                    cplx s(0.0, 0.0);
                    for (std::size_t i = 0; i <= k; ++i) s += acc[i] * f[k - i];
                    next[k] = s;
                }
                std::swap(acc, next);
            }
        }
        return acc;
    }

    /// k-th derivative via the series: B^(k)(z) = k! a_k.
    cplx derivative_at(cplx z, int k,
                       const Tolerances& tol = Tolerances::defaults()) const {
        const std::vector<cplx> a = taylor(z, k, tol);
        double fact = 1.0;
        for (int j = 2; j <= k; ++j) fact *= static_cast<double>(j);
        return fact * a.back();
    }

    /// Local valency at z: smallest j >= 1 with B^(j)(z) away from zero. A
    /// regular point gives 1; a critical point where B' vanishes to order m
    /// gives m + 1.
    int local_valency(cplx z, const Tolerances& tol = Tolerances::defaults()) const {
        const std::vector<cplx> a = taylor(z, degree_, tol);
        double fact = 1.0;
        for (int j = 1; j <= degree_; ++j) {
            fact *= static_cast<double>(j);
            if (std::abs(fact * a[static_cast<std::size_t>(j)]) >= tol.multiplicity_cut)
                return j;
        }
        throw numeric_error("multiplicity",
                            "no derivative up to order " + std::to_string(degree_) +
                            " clears the cutoff");
    }

    /// B = p/q with p = c prod (lambda_i - z)^{m_i}, q = prod (1 - conj(lambda_i) z)^{m_i}.
    RationalForm to_rational() const {
        poly_t p{c_}, q{cplx(1.0, 0.0)};
        for (const ZeroFactor& f : zeros_) {
            const poly_t fp{f.z.value(), cplx(-1.0, 0.0)};
            const poly_t fq{cplx(1.0, 0.0), -std::conj(f.z.value())};
            for (int m = 0; m < f.multiplicity; ++m) {
                p = poly_mul(p, fp);
                q = poly_mul(q, fq);
            }
        }
        return {std::move(p), std::move(q)};
    }

    detail::SlotHolder& cache_slot() const { return *slot_; }

private:
    cplx c_;
    std::vector<ZeroFactor> zeros_;
    int degree_ = 0;
    bool conditioning_warning_ = false;
    std::shared_ptr<detail::SlotHolder> slot_;
};

/// Zero described by its distance to the circle rather than its modulus, so
/// points far beyond double rounding of |z| stay meaningful.
struct SeqPoint {
    double decrement;  // 1 - |z|
    double argument;   // arg z

    cplx to_cplx() const {
        const double r = 1.0 - decrement;
        return r * cplx(std::cos(argument), std::sin(argument));
    }
};

/// 1 - d(z_j, z_k)^2 computed purely from decrements and arguments:
///   num = a(2-a) b(2-b),
///   den = (s + 2(1-s)sin^2(delta/2))^2 + ((1-s)sin delta)^2,  s = a + b - ab.
inline double one_minus_dsq(const SeqPoint& pj, const SeqPoint& pk) {
    const double a = pj.decrement, b = pk.decrement;
    const double s = a + b - a * b;
    const double delta = pj.argument - pk.argument;
    const double sh = std::sin(0.5 * delta);
    const double c1 = s + 2.0 * (1.0 - s) * sh * sh;
    const double c2 = (1.0 - s) * std::sin(delta);
    const double den = c1 * c1 + c2 * c2;
    const double num = a * (2.0 - a) * b * (2.0 - b);
    return num / den;
}

/// log d(z_j, z_k) in the same algebra. Near d = 1 the complement formula is
/// exact; near d = 0 the direct chordal form avoids cancellation.
inline double seq_log_distance(const SeqPoint& pj, const SeqPoint& pk) {
    const double a = pj.decrement, b = pk.decrement;
    const double s = a + b - a * b;
    const double delta = pj.argument - pk.argument;
    const double sh = std::sin(0.5 * delta);
    const double c1 = s + 2.0 * (1.0 - s) * sh * sh;
    const double c2 = (1.0 - s) * std::sin(delta);
    const double den = c1 * c1 + c2 * c2;
    const double omd = a * (2.0 - a) * b * (2.0 - b) / den;
    if (omd <= 0.5) return 0.5 * std::log1p(-omd);
    const double num = (b - a) * (b - a) +
                       4.0 * (1.0 - a) * (1.0 - b) * sh * sh;
    return 0.5 * (std::log(num) - std::log(den));
}

inline double seq_distance(const SeqPoint& pj, const SeqPoint& pk) {
    return std::exp(seq_log_distance(pj, pk));
}

struct ZeroSequence {
    std::vector<SeqPoint> points;
    std::string source_tag;

    double blaschke_sum() const {
        double s = 0.0;
        for (const SeqPoint& p : points) s += p.decrement;
        return s;
    }

    /// Product built from the first `count` points, all simple zeros,
    /// constant 1. Fails if a point rounds onto the circle.
    FiniteBlaschke to_product(std::size_t count,
                              const Tolerances& tol = Tolerances::defaults()) const {
        if (count < 1 || count > points.size())
            throw spec_error("truncation count out of range");
        std::vector<ZeroFactor> zs;
        zs.reserve(count);
        for (std::size_t k = 0; k < count; ++k) {
            if (points[k].decrement < tol.interior_margin)
                throw spec_error("sequence point " + std::to_string(k) +
                                 " is too close to the circle to represent");
            zs.push_back({DiskPoint(points[k].to_cplx(), tol), 1});
        }
        return FiniteBlaschke(cplx(1.0, 0.0), std::move(zs), tol);
    }
};

struct ThinnessRow {
    std::size_t k;  // zero-based index into the truncation
    double delta;   // prod_{j != k} d(z_j, z_k)
    std::optional<double> cross_check;  // (1 - |z_k|^2) |B'(z_k)| when representable
};

/// Per-zero separation products for the first N sequence points, in log space.
/// When every point is representable as a machine disk point the analytic
/// identity delta_k = (1 - |z_k|^2) |B'(z_k)| doubles as a consistency gate.
inline std::vector<ThinnessRow> thinness_profile(
    const ZeroSequence& seq, std::size_t N,
    const Tolerances& tol = Tolerances::defaults()) {
    if (N < 2 || N > seq.points.size())
        throw spec_error("thinness profile needs 2 <= N <= sequence length");
    std::vector<ThinnessRow> rows(N);
    for (std::size_t k = 0; k < N; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            if (j == k) continue;
            const double ld = seq_log_distance(seq.points[j], seq.points[k]);
            if (!std::isfinite(ld))
                throw spec_error("sequence points " + std::to_string(j) + " and " +
                                 std::to_string(k) + " coincide");
            acc += ld;
        }
        rows[k] = {k, std::exp(acc), std::nullopt};
    }
    bool representable = true;
    for (std::size_t k = 0; k < N; ++k)
        if (seq.points[k].decrement < tol.interior_margin) representable = false;
    if (representable) {
        const FiniteBlaschke B = seq.to_product(N, tol);
        if (B.zeros().size() != N)
            throw spec_error("distinct sequence points merged when rounded to the disk");
        for (std::size_t k = 0; k < N; ++k) {
            // B' at the zero z_k is phi_k'(z_k) times the remaining factors,
            // and the (1 - |z_k|^2) weight cancels |phi_k'(z_k)| exactly, so
            // the identity value is the bare product over j != k; forming the
            // weight and the full derivative separately would cancel away
            // eps / (1 - |z_k|) digits instead
            const cplx zk = seq.points[k].to_cplx();
            double cross = 1.0;
            for (std::size_t j = 0; j < N; ++j) {
                if (j == k) continue;
                cross *= std::abs(moebius_apply(B.zeros()[j].z.value(), zk, tol).value);
            }
            rows[k].cross_check = cross;
            if (std::abs(rows[k].delta - cross) > tol.profile_agreement)
                throw numeric_error("profile_agreement",
                                    "separation product and derivative identity "
                                    "disagree at index " + std::to_string(k));
        }
    }
    return rows;
}

/// Fraction of adjacent profile rows with nondecreasing delta; a quick scalar
/// summary of whether the tail is improving.
inline double fraction_nondecreasing(const std::vector<ThinnessRow>& rows) {
    if (rows.size() < 2) return 1.0;
    std::size_t good = 0;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k)
        if (rows[k + 1].delta >= rows[k].delta) ++good;
    return static_cast<double>(good) / static_cast<double>(rows.size() - 1);
}

} // namespace blaschke
