#pragma once

#include <cmath>
#include <complex>

#include "errors.hpp"
#include "tolerances.hpp"

namespace blaschke {

using cplx = std::complex<double>;

/// Point of the open unit disk. Construction enforces strict interiority with
/// a fixed margin so downstream denominators 1 - conj(lambda) z stay bounded
/// away from zero.
class DiskPoint {
public:
    explicit DiskPoint(cplx v, const Tolerances& tol = Tolerances::defaults()) : v_(v) {
        if (!(std::abs(v) <= 1.0 - tol.interior_margin))
            throw spec_error("point is not strictly interior to the unit disk (|z| = " +
                             std::to_string(std::abs(v)) + ")");
    }

    cplx value() const noexcept { return v_; }
    operator cplx() const noexcept { return v_; }

private:
    cplx v_;
};

struct MoebiusEval {
    cplx value;
    cplx derivative;
};

/// phi_lambda(z) = (lambda - z) / (1 - conj(lambda) z), with its z-derivative
/// (|lambda|^2 - 1) / (1 - conj(lambda) z)^2.
inline MoebiusEval moebius_apply(cplx lambda, cplx z,
                                 const Tolerances& tol = Tolerances::defaults()) {
    const cplx den = 1.0 - std::conj(lambda) * z;
    if (std::abs(den) <= tol.singular_denom)
        throw numeric_error("moebius_singularity",
                            "denominator 1 - conj(lambda) z vanishes");
    return {(lambda - z) / den, (std::norm(lambda) - 1.0) / (den * den)};
}

inline cplx moebius_value(cplx lambda, cplx z,
                          const Tolerances& tol = Tolerances::defaults()) {
    return moebius_apply(lambda, z, tol).value;
}

/// Disk automorphism z -> phi_lambda(z). With psi_normalized set the value is
/// scaled by |lambda|/lambda, so the factor tends to 1 on compact sets as
/// lambda approaches the circle.
struct MoebiusMap {
    DiskPoint lambda;
    bool psi_normalized = false;

    MoebiusEval apply(cplx z, const Tolerances& tol = Tolerances::defaults()) const {
        MoebiusEval e = moebius_apply(lambda.value(), z, tol);
        if (psi_normalized) {
            const cplx lam = lambda.value();
            const double m = std::abs(lam);
            if (m == 0.0)
                throw spec_error("psi normalization is undefined for lambda = 0");
            const cplx u = std::conj(lam) / m;  // |lambda| / lambda
            e.value *= u;
            e.derivative *= u;
        }
        return e;
    }
};

/// Pseudohyperbolic distance d(z, w) = |z - w| / |1 - conj(w) z|.
inline double pseudo_distance(cplx z, cplx w) {
    const double den = std::abs(1.0 - std::conj(w) * z);
    if (den == 0.0)
        throw numeric_error("moebius_singularity",
                            "pseudohyperbolic distance undefined: 1 - conj(w) z = 0");
    return std::abs(z - w) / den;
}

/// Membership in the pseudohyperbolic disk Delta(center, radius).
inline bool pseudo_disk_contains(cplx center, double radius, cplx z) {
    return pseudo_distance(z, center) < radius;
}

/// Radius t(a) = a / (1 + sqrt(1 - a^2)) below which the local geometry of a
/// factor with |value| >= a stays univalent; strictly increasing, t(a) < a.
inline double univalence_radius(double a) {
    if (!(a > 0.0 && a < 1.0))
        throw spec_error("univalence radius needs a in (0,1)");
    return a / (1.0 + std::sqrt(1.0 - a * a));
}

/// Triangle-type combination (x + y) / (1 + x y); pseudohyperbolic distances
/// obey d(z1,z3) <= combine(d(z1,z2), d(z2,z3)).
inline double metric_combine(double x, double y) {
    return (x + y) / (1.0 + x * y);
}

/// Largest combined value over [0, eps]^2, attained at the corner (eps, eps).
inline double metric_combine_sup(double eps) {
    return metric_combine(eps, eps);
}

} // namespace blaschke
