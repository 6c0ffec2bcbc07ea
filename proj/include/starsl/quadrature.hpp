#ifndef STARSL_QUADRATURE_HPP
#define STARSL_QUADRATURE_HPP

// Product quadrature for piecewise-linear functions against trigonometric
// weights. Each cell is integrated in closed form, so accuracy is uniform in
// the frequency; the only error source is the linear interpolation of the
// integrand itself.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "starsl/common.hpp"

namespace starsl {

// sin(z)/z, entire.
inline Complex sinc(Complex z) {
    if (std::abs(z) < 1e-4) {
        const Complex z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sin(z) / z;
}

inline Real sinc(Real z) {
    if (std::abs(z) < 1e-4) {
        const Real z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sin(z) / z;
}

// (sin z - z cos z)/z^3, entire; first moment of sin over a symmetric cell.
// The subtraction cancels below |z| ~ 0.1, hence the series branch.
inline Complex sin_moment1(Complex z) {
    if (std::abs(z) < 0.1) {
        const Complex z2 = z * z;
        return 1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0 - z2 * z2 * z2 / 45360.0;
    }
    return (std::sin(z) - z * std::cos(z)) / (z * z * z);
}

inline Real sin_moment1(Real z) {
    if (std::abs(z) < 0.1) {
        const Real z2 = z * z;
        return 1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0 - z2 * z2 * z2 / 45360.0;
    }
    return (std::sin(z) - z * std::cos(z)) / (z * z * z);
}

// sin(pi t)/t with the removable singularity at t = 0.
inline Real sin_pi_over(Real t) { return kPi * sinc(kPi * t); }

// A real function on [0, pi], linear between breakpoints, with jump
// discontinuities allowed at interior breakpoints. Segment i covers
// [x[i], x[i+1]] and takes one-sided endpoint values (yl[i], yr[i]).
struct PiecewiseLinear {
    std::vector<Real> x;   // size m+1, strictly increasing, x.front()=0, x.back()=pi
    std::vector<Real> yl;  // size m, value at the left end of segment i
    std::vector<Real> yr;  // size m, value at the right end of segment i

    std::size_t segments() const { return yl.size(); }

    // Midpoint convention at jump breakpoints.
    Real value(Real t) const {
        if (t <= x.front()) return yl.front();
        if (t >= x.back()) return yr.back();
        std::size_t i =
            static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
        if (i >= segments()) i = segments() - 1;
        if (t == x[i]) return (i > 0) ? 0.5 * (yr[i - 1] + yl[i]) : yl[0];
        const Real w = (t - x[i]) / (x[i + 1] - x[i]);
        return yl[i] + w * (yr[i] - yl[i]);
    }

    Real integral() const {
        Real s = 0;
        for (std::size_t i = 0; i < segments(); ++i)
            s += 0.5 * (yl[i] + yr[i]) * (x[i + 1] - x[i]);
        return s;
    }

    // integral of f(t) cos(rho t) dt over [0, pi], exact per segment
    Real integrate_cos(Real rho) const {
        Real s = 0;
        for (std::size_t i = 0; i < segments(); ++i) {
            const Real d = 0.5 * (x[i + 1] - x[i]);
            if (d <= 0) continue;
            const Real m = 0.5 * (x[i] + x[i + 1]);
            const Real fm = 0.5 * (yl[i] + yr[i]);
            const Real g = (yr[i] - yl[i]) / (2.0 * d);
            const Real z = rho * d;
            s += 2.0 * fm * std::cos(rho * m) * d * sinc(z)
               - 2.0 * g * std::sin(rho * m) * rho * d * d * d * sin_moment1(z);
        }
        return s;
    }

    // integral of f(t) sin(rho t) dt over [0, pi]
    Real integrate_sin(Real rho) const {
        Real s = 0;
        for (std::size_t i = 0; i < segments(); ++i) {
            const Real d = 0.5 * (x[i + 1] - x[i]);
            if (d <= 0) continue;
            const Real m = 0.5 * (x[i] + x[i + 1]);
            const Real fm = 0.5 * (yl[i] + yr[i]);
            const Real g = (yr[i] - yl[i]) / (2.0 * d);
            const Real z = rho * d;
            s += 2.0 * fm * std::sin(rho * m) * d * sinc(z)
               + 2.0 * g * std::cos(rho * m) * rho * d * d * d * sin_moment1(z);
        }
        return s;
    }

    // Uniform-grid samples, midpoint value where a breakpoint carries a jump.
    std::vector<Real> sample(std::size_t n_nodes) const {
        std::vector<Real> out(n_nodes);
        const Real h = kPi / static_cast<Real>(n_nodes - 1);
        for (std::size_t i = 0; i < n_nodes; ++i) out[i] = value(static_cast<Real>(i) * h);
        return out;
    }
};

// Sum of piecewise-linear pieces, each supported on a subinterval. Breakpoints
// of all pieces are merged; one-sided values keep jumps exact.
struct PiecewiseBuilder {
    struct Piece {
        Real lo, hi;      // support (lo, hi)
        Real scale;       // multiplies q(map_offset + map_sign * s)
        Real map_offset;
        Real map_sign;
    };
    std::vector<Piece> pieces;
    std::vector<Real> breakpoints;  // accumulated, unsorted

    void add_piece(Real lo, Real hi, Real scale, Real map_offset, Real map_sign,
                   const std::vector<Real>& kink_args, Real arg_lo, Real arg_hi) {
        if (hi - lo < 1e-14) return;
        pieces.push_back({lo, hi, scale, map_offset, map_sign});
        breakpoints.push_back(lo);
        breakpoints.push_back(hi);
        // interior kinks of q mapped back into s
        for (Real a : kink_args) {
            if (a <= arg_lo + 1e-15 || a >= arg_hi - 1e-15) continue;
            const Real s = (a - map_offset) / map_sign;
            if (s > lo + 1e-15 && s < hi - 1e-15) breakpoints.push_back(s);
        }
    }

    template <typename F>
    PiecewiseLinear build(F&& q_at) const {
        std::vector<Real> bp = breakpoints;
        bp.push_back(0.0);
        bp.push_back(kPi);
        std::sort(bp.begin(), bp.end());
        std::vector<Real> xs;
        for (Real b : bp) {
            b = std::clamp(b, 0.0, kPi);
            if (xs.empty() || b - xs.back() > 1e-13) xs.push_back(b);
        }
        if (xs.back() < kPi) xs.back() = kPi;
        PiecewiseLinear out;
        out.x = xs;
        const std::size_t m = xs.size() - 1;
        out.yl.assign(m, 0.0);
        out.yr.assign(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const Real lo = xs[i], hi = xs[i + 1];
            const Real mid = 0.5 * (lo + hi);
            for (const Piece& p : pieces) {
                if (mid <= p.lo || mid >= p.hi) continue;
                out.yl[i] += p.scale * q_at(p.map_offset + p.map_sign * lo);
                out.yr[i] += p.scale * q_at(p.map_offset + p.map_sign * hi);
            }
        }
        return out;
    }
};

}  // namespace starsl

#endif
