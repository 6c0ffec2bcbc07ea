#ifndef STARSL_POTENTIAL_HPP
#define STARSL_POTENTIAL_HPP

// Edge potentials on (0, pi) and the oscillatory transforms of a potential
// against sin(rho(x-t))/rho and cos(rho(x-t)) that every characteristic
// function is assembled from.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "starsl/common.hpp"
#include "starsl/quadrature.hpp"

namespace starsl {

// A real L^2 potential, represented by samples on the uniform grid
// x_i = i*pi/M and interpolated linearly. Optionally carries the sine-series
// coefficients it was generated from; the grid is then derived data.
struct PotentialFn {
    std::vector<Real> grid;                          // size M+1
    std::optional<std::vector<Real>> sine_coeffs;    // c_n with q = sum 2 c_n/pi sin n(pi-t)

    static constexpr int kMinGrid = 64;

    int grid_cells() const { return static_cast<int>(grid.size()) - 1; }
    Real spacing() const { return kPi / static_cast<Real>(grid_cells()); }

    static PotentialFn from_grid(std::vector<Real> samples) {
        if (samples.size() < kMinGrid + 1)
            throw InputError("potential grid must have at least 64 cells");
        for (Real v : samples)
            if (!std::isfinite(v)) throw InputError("potential samples must be finite reals");
        PotentialFn q;
        q.grid = std::move(samples);
        return q;
    }

    template <typename F>
    static PotentialFn from_function(F&& f, int M) {
        if (M < kMinGrid) throw InputError("potential grid must have at least 64 cells");
        std::vector<Real> g(static_cast<std::size_t>(M) + 1);
        for (int i = 0; i <= M; ++i) g[i] = f(static_cast<Real>(i) * kPi / M);
        return from_grid(std::move(g));
    }

    static PotentialFn zero(int M) {
        return from_function([](Real) { return 0.0; }, M);
    }

    static PotentialFn constant(Real c, int M) {
        return from_function([c](Real) { return c; }, M);
    }

    bool is_zero() const {
        for (Real v : grid)
            if (v != 0.0) return false;
        return true;
    }

    Real value(Real x) const {
        const int M = grid_cells();
        if (x <= 0.0) return grid.front();
        if (x >= kPi) return grid.back();
        const Real pos = x / kPi * M;
        int i = static_cast<int>(pos);
        if (i >= M) i = M - 1;
        const Real w = pos - i;
        return grid[i] + w * (grid[i + 1] - grid[i]);
    }

    bool operator==(const PotentialFn& o) const { return grid == o.grid; }
};

// q(t) = sum_{n=1}^{D} (2 c_n / pi) sin n(pi - t), sampled; coefficients kept.
inline PotentialFn sine_series_potential(std::span<const Real> coeffs, int M) {
    if (coeffs.empty()) throw InputError("sine series needs at least one coefficient");
    PotentialFn q = PotentialFn::from_function(
        [&](Real t) {
            Real s = 0;
            for (std::size_t n = 1; n <= coeffs.size(); ++n)
                s += 2.0 * coeffs[n - 1] / kPi * std::sin(static_cast<Real>(n) * (kPi - t));
            return s;
        },
        M);
    q.sine_coeffs = std::vector<Real>(coeffs.begin(), coeffs.end());
    return q;
}

// omega = 1/2 integral of q over (0, pi); trapezoid is exact for the interpolant.
inline Real potential_mean(const PotentialFn& q) {
    const int M = q.grid_cells();
    Real s = 0.5 * (q.grid.front() + q.grid.back());
    for (int i = 1; i < M; ++i) s += q.grid[i];
    return 0.5 * s * q.spacing();
}

namespace detail {

// Shared cell walk: integrates the linear interpolant of q over [0, x] against
// the requested trigonometric weight in closed form per cell.
template <typename CellFn>
Complex transform_cells(const PotentialFn& q, Real x, CellFn&& cell) {
    if (x < 0.0 || x > kPi + 1e-12) throw InputError("transform abscissa outside [0, pi]");
    x = std::min(x, kPi);
    const int M = q.grid_cells();
    const Real h = q.spacing();
    Complex acc = 0;
    for (int i = 0; i < M; ++i) {
        const Real lo = i * h;
        if (lo >= x) break;
        const Real hi = std::min((i + 1) * h, x);
        Real fa = q.grid[i];
        Real fb;
        if (hi == (i + 1) * h) {
            fb = q.grid[i + 1];
        } else {
            const Real w = (hi - lo) / h;
            fb = q.grid[i] + w * (q.grid[i + 1] - q.grid[i]);
        }
        acc += cell(lo, hi, fa, fb);
    }
    return acc;
}

}  // namespace detail

// w_q(x, rho) = integral_0^x q(t) sin(rho(x-t))/rho dt. Entire in lambda=rho^2;
// the rho -> 0 limit integral_0^x q(t)(x-t) dt is reproduced automatically.
inline Complex potential_sine_transform(const PotentialFn& q, Real x, Complex rho) {
    if (!std::isfinite(rho.real()) || !std::isfinite(rho.imag()))
        throw InputError("transform frequency must be finite");
    return detail::transform_cells(q, x, [&](Real lo, Real hi, Real fa, Real fb) {
        const Real d = 0.5 * (hi - lo);
        const Real m = 0.5 * (lo + hi);
        const Real fm = 0.5 * (fa + fb);
        const Real g = (fb - fa) / (2.0 * d);
        const Complex z = rho * d;
        const Complex A = rho * (x - m);
        // (x-m) sinc(A) d sinc(z) carries the 1/rho^2 of sin(A)sin(z)/rho^2 stably
        return 2.0 * fm * (x - m) * sinc(A) * d * sinc(z)
             - 2.0 * g * std::cos(A) * d * d * d * sin_moment1(z);
    });
}

// integral_0^x q(t) cos(rho(x-t)) dt
inline Complex potential_cosine_transform(const PotentialFn& q, Real x, Complex rho) {
    if (!std::isfinite(rho.real()) || !std::isfinite(rho.imag()))
        throw InputError("transform frequency must be finite");
    return detail::transform_cells(q, x, [&](Real lo, Real hi, Real fa, Real fb) {
        const Real d = 0.5 * (hi - lo);
        const Real m = 0.5 * (lo + hi);
        const Real fm = 0.5 * (fa + fb);
        const Real g = (fb - fa) / (2.0 * d);
        const Complex z = rho * d;
        const Complex A = rho * (x - m);
        return 2.0 * fm * std::cos(A) * d * sinc(z)
             + 2.0 * g * std::sin(A) * rho * d * d * d * sin_moment1(z);
    });
}

// One edge of the star: potential, frozen-argument set, boundary order at the
// outer vertex. Empty frozen set <=> ordinary Sturm-Liouville edge.
struct EdgeSpec {
    PotentialFn q;
    std::vector<Real> frozen_args;  // strictly increasing, each in open (0, pi)
    int alpha = 0;                  // derivative order of the outer boundary condition

    EdgeSpec(PotentialFn potential, std::vector<Real> args, int alpha_order)
        : q(std::move(potential)), frozen_args(std::move(args)), alpha(alpha_order) {
        if (alpha != 0 && alpha != 1) throw InputError("alpha must be 0 or 1");
        Real prev = 0.0;
        for (Real a : frozen_args) {
            if (!(a > 0.0 && a < kPi))
                throw InputError("frozen argument must lie in open (0,pi)");
            if (!(a > prev)) throw InputError("frozen arguments must be strictly increasing");
            prev = a;
        }
    }

    bool ordinary() const { return frozen_args.empty(); }
    int n_frozen() const { return static_cast<int>(frozen_args.size()); }

    bool operator==(const EdgeSpec& o) const {
        return alpha == o.alpha && frozen_args == o.frozen_args && q == o.q;
    }
};

// The star graph; the edge to be reconstructed is by convention the last one.
struct GraphSpec {
    std::vector<EdgeSpec> edges;
    std::vector<int> duplicate_of;  // duplicate_of[j] = first edge equal to edge j

    explicit GraphSpec(std::vector<EdgeSpec> e) : edges(std::move(e)) {
        if (edges.size() < 2) throw InputError("graph needs p >= 2 edges");
        duplicate_of.resize(edges.size());
        for (std::size_t j = 0; j < edges.size(); ++j) {
            duplicate_of[j] = static_cast<int>(j);
            for (std::size_t i = 0; i < j; ++i)
                if (edges[i] == edges[j]) {
                    duplicate_of[j] = static_cast<int>(i);
                    break;
                }
        }
    }

    int size() const { return static_cast<int>(edges.size()); }
    const EdgeSpec& unknown_edge() const { return edges.back(); }
};

}  // namespace starsl

#endif
