#ifndef STARSL_KERNELS_HPP
#define STARSL_KERNELS_HPP

// Forward map from a frozen-argument edge potential to the two L^2(0,pi)
// kernels of its characteristic-function representations:
//   value_pi(lambda) = sin(rho pi)/rho + rho^{-2} integral cos_kernel(t) cos(rho t) dt
//   deriv_pi(lambda) = cos(rho pi)    + rho^{-1} integral sin_kernel(t) sin(rho t) dt
// The kernels are sums of shifted/reflected copies of q with jump
// discontinuities; an exact piecewise representation is kept alongside the
// grid samples so the representation identity can be verified to near
// roundoff.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "starsl/common.hpp"
#include "starsl/edge.hpp"
#include "starsl/potential.hpp"
#include "starsl/quadrature.hpp"

namespace starsl {

struct KernelPair {
    std::vector<Real> cos_kernel;  // grid samples on x_i = i*pi/M (midpoint at jumps)
    std::vector<Real> sin_kernel;
    std::optional<std::vector<std::vector<Real>>> per_arg_cos;  // per-frozen-argument pieces

    // Exact forms, when available. Forward-built kernels carry the piecewise
    // representation; solver-built kernels carry trig coefficients.
    std::optional<PiecewiseLinear> cos_exact, sin_exact;
    std::optional<std::pair<std::vector<Real>, std::vector<Real>>> trig_coeffs;

    // integral of cos_kernel(t) cos(rho t) dt by the most exact representation
    Real weight_cos(Real rho) const {
        if (trig_coeffs) {
            const auto& [nc, ws] = *trig_coeffs;
            Real s = 0;
            for (std::size_t m = 0; m < nc.size(); ++m)
                s += nc[m] * 0.5 *
                     (sin_pi_over(rho + static_cast<Real>(m)) +
                      sin_pi_over(rho - static_cast<Real>(m)));
            return s;
        }
        if (cos_exact) return cos_exact->integrate_cos(rho);
        return grid_pl(cos_kernel).integrate_cos(rho);
    }

    // integral of sin_kernel(t) sin(rho t) dt; solver-built sine coefficients
    // live on the half-integer frequencies m - 1/2
    Real weight_sin(Real rho) const {
        if (trig_coeffs) {
            const auto& [nc, ws] = *trig_coeffs;
            Real s = 0;
            for (std::size_t m = 0; m < ws.size(); ++m) {
                const Real mm = static_cast<Real>(m) + 0.5;
                s += ws[m] * 0.5 * (sin_pi_over(rho - mm) - sin_pi_over(rho + mm));
            }
            return s;
        }
        if (sin_exact) return sin_exact->integrate_sin(rho);
        return grid_pl(sin_kernel).integrate_sin(rho);
    }

    Real cos_kernel_integral() const {
        if (cos_exact) return cos_exact->integral();
        return grid_pl(cos_kernel).integral();
    }

    static PiecewiseLinear grid_pl(const std::vector<Real>& samples) {
        PiecewiseLinear pl;
        const std::size_t m = samples.size() - 1;
        pl.x.resize(m + 1);
        pl.yl.resize(m);
        pl.yr.resize(m);
        for (std::size_t i = 0; i <= m; ++i) pl.x[i] = kPi * static_cast<Real>(i) / m;
        for (std::size_t i = 0; i < m; ++i) {
            pl.yl[i] = samples[i];
            pl.yr[i] = samples[i + 1];
        }
        return pl;
    }
};

namespace detail {

inline std::vector<Real> grid_nodes(const PotentialFn& q) {
    std::vector<Real> xs(q.grid.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = kPi * static_cast<Real>(i) / q.grid_cells();
    return xs;
}

// The four shifted/reflected pieces for a single frozen argument, read off
// the change-of-variables identity for the cosine representation.
inline void add_cos_pieces(PiecewiseBuilder& b, Real a, const std::vector<Real>& kinks) {
    b.add_piece(kPi - a, kPi, -0.5, a - kPi, +1.0, kinks, 0.0, a);        // -q(s - pi + a)
    b.add_piece(a, kPi, -0.5, kPi + a, -1.0, kinks, a, kPi);              // -q(pi + a - s)
    b.add_piece(0.0, a, +0.5, kPi - a, +1.0, kinks, kPi - a, kPi);        // +q(pi - a + s)
    b.add_piece(0.0, kPi - a, +0.5, kPi - a, -1.0, kinks, 0.0, kPi - a);  // +q(pi - a - s)
}

// Sine-representation analog; satisfies sin_piece + cos_piece = q(pi-a+s) on (0,a).
inline void add_sin_pieces(PiecewiseBuilder& b, Real a, const std::vector<Real>& kinks) {
    b.add_piece(a, kPi, +0.5, kPi + a, -1.0, kinks, a, kPi);              // +q(pi + a - s)
    b.add_piece(0.0, a, +0.5, kPi - a, +1.0, kinks, kPi - a, kPi);        // +q(pi - a + s)
    b.add_piece(0.0, kPi - a, -0.5, kPi - a, -1.0, kinks, 0.0, kPi - a);  // -q(pi - a - s)
    b.add_piece(kPi - a, kPi, +0.5, a - kPi, +1.0, kinks, 0.0, a);        // +q(s - pi + a)
}

}  // namespace detail

// Kernel of the cosine representation for the full frozen set, sampled on a
// grid with M_out cells. The exact piecewise form rides along.
inline PiecewiseLinear cos_kernel_exact(const PotentialFn& q, std::span<const Real> frozen_args) {
    const auto kinks = detail::grid_nodes(q);
    PiecewiseBuilder b;
    for (Real a : frozen_args) detail::add_cos_pieces(b, a, kinks);
    return b.build([&](Real t) { return q.value(t); });
}

inline PiecewiseLinear sin_kernel_exact(const PotentialFn& q, std::span<const Real> frozen_args) {
    const auto kinks = detail::grid_nodes(q);
    PiecewiseBuilder b;
    for (Real a : frozen_args) detail::add_sin_pieces(b, a, kinks);
    return b.build([&](Real t) { return q.value(t); });
}

inline std::vector<Real> cos_kernel_grid(const PotentialFn& q, std::span<const Real> frozen_args,
                                         int M_out) {
    return cos_kernel_exact(q, frozen_args).sample(static_cast<std::size_t>(M_out) + 1);
}

inline std::vector<Real> sin_kernel_grid(const PotentialFn& q, std::span<const Real> frozen_args,
                                         int M_out) {
    return sin_kernel_exact(q, frozen_args).sample(static_cast<std::size_t>(M_out) + 1);
}

inline KernelPair edge_kernels(const PotentialFn& q, std::span<const Real> frozen_args,
                               int M_out) {
    for (Real a : frozen_args)
        if (!(a > 0.0 && a < kPi)) throw InputError("frozen argument must lie in open (0,pi)");
    KernelPair pair;
    pair.cos_exact = cos_kernel_exact(q, frozen_args);
    pair.sin_exact = sin_kernel_exact(q, frozen_args);
    pair.cos_kernel = pair.cos_exact->sample(static_cast<std::size_t>(M_out) + 1);
    pair.sin_kernel = pair.sin_exact->sample(static_cast<std::size_t>(M_out) + 1);
    const auto kinks = detail::grid_nodes(q);
    std::vector<std::vector<Real>> per_arg;
    for (Real a : frozen_args) {
        PiecewiseBuilder b;
        detail::add_cos_pieces(b, a, kinks);
        per_arg.push_back(
            b.build([&](Real t) { return q.value(t); }).sample(static_cast<std::size_t>(M_out) + 1));
    }
    pair.per_arg_cos = std::move(per_arg);
    return pair;
}

// Max over the sample frequencies of the representation defect
//   |value_pi - (sin(rho pi)/rho + rho^{-2} I_cos)| + |deriv_pi - (cos(rho pi) + rho^{-1} I_sin)|.
// This is the oracle that guards the kernel derivation.
inline Real kernel_representation_check(const EdgeSpec& edge, const KernelPair& pair,
                                        std::span<const Real> rho_samples) {
    if (edge.alpha != 0) throw InputError("kernel representation is for alpha = 0 edges");
    if (edge.ordinary()) throw InputError("kernel representation needs a frozen edge");
    Real worst = 0;
    for (Real rho : rho_samples) {
        const EdgeCharValues d = edge_charfn_values(edge, Complex(rho * rho, 0.0));
        const Real lhs0 = d.value_pi.real();
        const Real lhs1 = d.deriv_pi.real();
        const Real rhs0 = kPi * sinc(rho * kPi) + pair.weight_cos(rho) / (rho * rho);
        const Real rhs1 = std::cos(rho * kPi) + pair.weight_sin(rho) / rho;
        const Real err = std::abs(lhs0 - rhs0) + std::abs(lhs1 - rhs1);
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace starsl

#endif
