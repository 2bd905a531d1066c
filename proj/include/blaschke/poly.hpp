#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "mobius.hpp"
#include "tolerances.hpp"

namespace blaschke {

/// Polynomial as ascending coefficients: p(z) = c[0] + c[1] z + ...
using poly_t = std::vector<cplx>;

namespace detail {

/// Neumaier-compensated accumulator for one real component.
struct comp_sum {
    double s = 0.0;
    double c = 0.0;
    void add(double x) {
        const double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double total() const { return s + c; }
};

} // namespace detail

/// Convolution product. Above degree ~20 the plain accumulation loses digits
/// on the alternating sums produced by many near-unimodular factors, so the
/// real and imaginary parts switch to compensated summation.
inline poly_t poly_mul(const poly_t& a, const poly_t& b) {
    if (a.empty() || b.empty()) return {};
    const std::size_t n = a.size() + b.size() - 1;
    poly_t out(n, cplx(0.0, 0.0));
    if (n <= 21) {
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j)
                out[i + j] += a[i] * b[j];
        return out;
    }
    for (std::size_t k = 0; k < n; ++k) {
        detail::comp_sum re, im;
        const std::size_t lo = k >= b.size() - 1 ? k - (b.size() - 1) : 0;
        const std::size_t hi = std::min(k, a.size() - 1);
        for (std::size_t i = lo; i <= hi; ++i) {
            const cplx t = a[i] * b[k - i];
            re.add(t.real());
            im.add(t.imag());
        }
        out[k] = cplx(re.total(), im.total());
    }
    return out;
}

inline poly_t poly_derivative(const poly_t& p) {
    if (p.size() <= 1) return {};
    poly_t out(p.size() - 1);
    for (std::size_t k = 1; k < p.size(); ++k)
        out[k - 1] = static_cast<double>(k) * p[k];
    return out;
}

inline cplx poly_eval(const poly_t& p, cplx z) {
    cplx acc(0.0, 0.0);
    for (std::size_t k = p.size(); k-- > 0;)
        acc = acc * z + p[k];
    return acc;
}

/// Value and derivative in one Horner pass.
inline std::pair<cplx, cplx> poly_eval_d(const poly_t& p, cplx z) {
    cplx v(0.0, 0.0), d(0.0, 0.0);
    for (std::size_t k = p.size(); k-- > 0;) {
        d = d * z + v;
        v = v * z + p[k];
    }
    return {v, d};
}

inline double poly_max_abs(const poly_t& p) {
    double m = 0.0;
    for (const cplx& c : p) m = std::max(m, std::abs(c));
    return m;
}

/// All complex roots by Aberth-Ehrlich simultaneous iteration with a Newton
/// polish. Leading coefficients below poly_trim (relative to the largest) are
/// dropped; exact zero trailing coefficients peel off as roots at the origin.
/// Every returned root must pass the residual gate
///   |p(r)| <= poly_residual * max|c| * max(1, |r|)^deg,
/// otherwise the whole call fails. Roots come back sorted by (arg, abs) so
/// repeated runs agree bit for bit.
inline std::vector<cplx> poly_roots(poly_t p,
                                    const Tolerances& tol = Tolerances::defaults()) {
    const double scale = poly_max_abs(p);
    if (scale == 0.0 || p.empty())
        throw spec_error("root solve of the zero polynomial");

    while (p.size() > 1 && std::abs(p.back()) <= tol.poly_trim * scale)
        p.pop_back();
    if (p.size() <= 1) return {};

    const poly_t trimmed = p;

    std::vector<cplx> roots;
    std::size_t origin = 0;
    while (origin + 1 < p.size() && p[origin] == cplx(0.0, 0.0)) ++origin;
    if (origin > 0) {
        roots.assign(origin, cplx(0.0, 0.0));
        p.erase(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(origin));
    }

    const std::size_t d = p.size() - 1;
    if (d >= 1) {
        double r0 = std::pow(std::abs(p.front() / p.back()), 1.0 / static_cast<double>(d));
        r0 = std::min(std::max(r0, 1e-6), 1e6);

        constexpr double tau = 6.283185307179586476925287;
        std::vector<cplx> x(d);
        for (std::size_t k = 0; k < d; ++k) {
            const double th = tau * static_cast<double>(k) / static_cast<double>(d) + 0.4;
            x[k] = r0 * cplx(std::cos(th), std::sin(th));
        }

        for (long sweep = 0; sweep < tol.poly_sweeps; ++sweep) {
            double moved = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const auto [v, dv] = poly_eval_d(p, x[k]);
                if (v == cplx(0.0, 0.0)) continue;
                cplx ratio;
                if (dv != cplx(0.0, 0.0)) {
                    ratio = v / dv;
                } else {
                    ratio = cplx(1e-8, 1e-8);
                }
                cplx rep(0.0, 0.0);
                for (std::size_t j = 0; j < d; ++j) {
                    if (j == k) continue;
                    const cplx diff = x[k] - x[j];
                    if (diff == cplx(0.0, 0.0)) {
                        rep += cplx(1e8, 0.0);
                        continue;
                    }
                    rep += 1.0 / diff;
                }
                const cplx den = 1.0 - ratio * rep;
                cplx step;
                if (std::abs(den) > 1e-14)
                    step = ratio / den;
                else
                    step = ratio;
                x[k] -= step;
                moved = std::max(moved, std::abs(step));
            }
            if (moved <= 1e-15 * std::max(1.0, r0)) break;
        }

        for (std::size_t k = 0; k < d; ++k) {
            for (int it = 0; it < 3; ++it) {
                const auto [v, dv] = poly_eval_d(p, x[k]);
                if (dv == cplx(0.0, 0.0)) break;
                const cplx step = v / dv;
                if (!(std::abs(step) < 1.0)) break;
                x[k] -= step;
                if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(x[k]))) break;
            }
            roots.push_back(x[k]);
        }
    }

    const double bound = tol.poly_residual * scale;
    for (const cplx& r : roots) {
        const double grow = std::pow(std::max(1.0, std::abs(r)),
                                     static_cast<double>(trimmed.size() - 1));
        const double res = std::abs(poly_eval(trimmed, r));
        if (!(res <= bound * grow))
            throw numeric_error("poly_residual",
                                "root residual " + std::to_string(res) +
                                " exceeds gate " + std::to_string(bound * grow));
    }

    std::sort(roots.begin(), roots.end(), [](const cplx& a, const cplx& b) {
        const double aa = std::arg(a), ab = std::arg(b);
        if (aa != ab) return aa < ab;
        return std::abs(a) < std::abs(b);
    });
    return roots;
}

} // namespace blaschke
