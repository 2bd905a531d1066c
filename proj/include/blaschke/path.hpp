#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "mobius.hpp"

namespace blaschke {

namespace detail {

constexpr double path_tau = 6.283185307179586476925287;

/// One segment or circular arc. Arcs run from angle th0 to th1 about center;
/// th1 > th0 is counterclockwise.
struct PathPiece {
    bool is_arc = false;
    cplx a, b;            // line endpoints
    cplx center;          // arc data
    double radius = 0.0;
    double th0 = 0.0, th1 = 0.0;

    double length() const {
        return is_arc ? radius * std::abs(th1 - th0) : std::abs(b - a);
    }

    cplx start() const {
        return is_arc ? center + radius * std::exp(cplx(0.0, th0)) : a;
    }

    cplx end() const {
        return is_arc ? center + radius * std::exp(cplx(0.0, th1)) : b;
    }

    cplx point(double s) const {
        if (!is_arc) return a + (b - a) * s;
        return center + radius * std::exp(cplx(0.0, th0 + (th1 - th0) * s));
    }

    /// d/ds of point(s).
    cplx deriv(double s) const {
        if (!is_arc) return b - a;
        return cplx(0.0, th1 - th0) * radius * std::exp(cplx(0.0, th0 + (th1 - th0) * s));
    }

    /// Whether angle phi falls inside [th0, th1] (mod 2 pi), either direction.
    bool covers_angle(double phi) const {
        const double lo = std::min(th0, th1), hi = std::max(th0, th1);
        if (hi - lo >= path_tau) return true;
        double q = std::fmod(phi - lo, path_tau);
        if (q < 0.0) q += path_tau;
        return q <= hi - lo;
    }

    double distance_to(cplx p) const {
        if (!is_arc) {
            const cplx d = b - a;
            const double len2 = std::norm(d);
            if (len2 == 0.0) return std::abs(p - a);
            double t = ((p - a) * std::conj(d)).real() / len2;
            t = std::clamp(t, 0.0, 1.0);
            return std::abs(p - (a + d * t));
        }
        const cplx rel = p - center;
        if (std::abs(rel) > 0.0 && covers_angle(std::arg(rel)))
            return std::abs(std::abs(rel) - radius);
        return std::min(std::abs(p - start()), std::abs(p - end()));
    }

    double max_modulus() const {
        if (!is_arc) return std::max(std::abs(a), std::abs(b));
        const double cm = std::abs(center);
        if (cm > 0.0 && covers_angle(std::arg(center))) return cm + radius;
        if (cm == 0.0) return radius;
        return std::max(std::abs(start()), std::abs(end()));
    }

    PathPiece reversed() const {
        PathPiece r = *this;
        if (is_arc) {
            std::swap(r.th0, r.th1);
        } else {
            std::swap(r.a, r.b);
        }
        return r;
    }
};

} // namespace detail

/// Piecewise line/arc path with a constant-speed parameterization on [0, 1].
class PlanePath {
public:
    static PlanePath line(cplx from, cplx to) {
        PlanePath p;
        detail::PathPiece seg;
        seg.a = from;
        seg.b = to;
        p.pieces_.push_back(seg);
        return p;
    }

    /// Arc about `center` from angle th0 to th1 (th1 > th0 is ccw; a span of
    /// 2 pi closes a full circle).
    static PlanePath circle(cplx center, double radius, double th0, double th1) {
        PlanePath p;
        detail::PathPiece arc;
        arc.is_arc = true;
        arc.center = center;
        arc.radius = radius;
        arc.th0 = th0;
        arc.th1 = th1;
        p.pieces_.push_back(arc);
        return p;
    }

    void append_line(cplx to) {
        detail::PathPiece seg;
        seg.a = endpoint();
        seg.b = to;
        pieces_.push_back(seg);
    }

    void append_arc(cplx center, double radius, double th0, double th1) {
        detail::PathPiece arc;
        arc.is_arc = true;
        arc.center = center;
        arc.radius = radius;
        arc.th0 = th0;
        arc.th1 = th1;
        if (std::abs(arc.start() - endpoint()) > 1e-9)
            throw spec_error("appended arc does not start at the current endpoint");
        pieces_.push_back(arc);
    }

    cplx startpoint() const {
        if (pieces_.empty()) throw spec_error("empty path");
        return pieces_.front().start();
    }

    cplx endpoint() const {
        if (pieces_.empty()) throw spec_error("empty path");
        return pieces_.back().end();
    }

    bool is_loop(double eps = 1e-9) const {
        return std::abs(startpoint() - endpoint()) <= eps;
    }

    double total_length() const {
        double s = 0.0;
        for (const auto& p : pieces_) s += p.length();
        return s;
    }

    cplx point(double t) const {
        const auto [idx, s] = locate(t);
        return pieces_[idx].point(s);
    }

    /// dz/dt; |velocity| equals the total length for all t.
    cplx velocity(double t) const {
        const auto [idx, s] = locate(t);
        const double len = pieces_[idx].length();
        if (len == 0.0) return cplx(0.0, 0.0);
        return pieces_[idx].deriv(s) * (total_length() / len);
    }

    double clearance_to(cplx p) const {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& piece : pieces_) d = std::min(d, piece.distance_to(p));
        return d;
    }

    double max_modulus() const {
        double m = 0.0;
        for (const auto& piece : pieces_) m = std::max(m, piece.max_modulus());
        return m;
    }

    PlanePath reversed() const {
        PlanePath r;
        for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it)
            r.pieces_.push_back(it->reversed());
        return r;
    }

    /// Parameter of the first piece boundary strictly past t (1.0 from the
    /// last piece). A single step across a boundary can skip a whole short
    /// piece, and with it the winding the piece carries, so trackers must
    /// stop here.
    double next_breakpoint(double t) const {
        if (pieces_.empty()) throw spec_error("empty path");
        const double L = total_length();
        if (L == 0.0) return 1.0;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
            acc += pieces_[i].length();
            const double b = acc / L;
            if (b > t + 1e-12) return b;
        }
        return 1.0;
    }

    /// Largest parameter step from t subtending at most an eighth of a turn
    /// on the arc piece containing t. Straight pieces leave the step
    /// unconstrained.
    double resolution_step(double t) const {
        if (pieces_.empty()) throw spec_error("empty path");
        const double L = total_length();
        if (L == 0.0) return 1.0;
        double target = std::clamp(t, 0.0, 1.0) * L;
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            const double len = pieces_[i].length();
            // a t sitting exactly on a boundary belongs to the next piece
            if (target < len - 1e-12 * L || i + 1 == pieces_.size()) {
                if (!pieces_[i].is_arc || pieces_[i].radius <= 0.0) return 1.0;
                return (detail::path_tau / 8.0) * pieces_[i].radius / L;
            }
            target -= len;
        }
        return 1.0;
    }

private:
    std::pair<std::size_t, double> locate(double t) const {
        if (pieces_.empty()) throw spec_error("empty path");
        const double L = total_length();
        if (L == 0.0) return {0, 0.0};
        double target = std::clamp(t, 0.0, 1.0) * L;
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            const double len = pieces_[i].length();
            if (target <= len || i + 1 == pieces_.size()) {
                const double s = len == 0.0 ? 0.0 : std::clamp(target / len, 0.0, 1.0);
                return {i, s};
            }
            target -= len;
        }
        return {pieces_.size() - 1, 1.0};
    }

    std::vector<detail::PathPiece> pieces_;
};

} // namespace blaschke
