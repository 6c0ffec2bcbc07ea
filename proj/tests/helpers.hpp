#ifndef STARSL_TESTS_HELPERS_HPP
#define STARSL_TESTS_HELPERS_HPP

// Shared test utilities: seeded random instances and brute-force quadrature
// oracles kept independent of the library's product-quadrature path.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "starsl/potential.hpp"

namespace testutil {

using starsl::Complex;
using starsl::EdgeSpec;
using starsl::GraphSpec;
using starsl::kPi;
using starsl::PotentialFn;
using starsl::Real;

// Composite Simpson on an analytic integrand; the independent oracle for the
// transform and projection tests.
inline Real simpson(const std::function<Real(Real)>& f, Real a, Real b, int n) {
    if (n % 2) ++n;
    const Real h = (b - a) / n;
    Real s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Midpoint Riemann sum; an independent brute-force check.
inline Real riemann(const std::function<Real(Real)>& f, Real a, Real b, long n) {
    const Real h = (b - a) / static_cast<Real>(n);
    Real s = 0;
    for (long i = 0; i < n; ++i) s += f(a + (i + 0.5) * h);
    return s * h;
}

inline PotentialFn random_trig_potential(std::mt19937& rng, int degree = 3, Real amp = 0.4,
                                         int M = 2048) {
    std::uniform_real_distribution<Real> u(-amp, amp);
    std::vector<Real> cs(degree), cc(degree);
    for (int i = 0; i < degree; ++i) {
        cs[i] = u(rng);
        cc[i] = u(rng);
    }
    const Real c0 = u(rng);
    return PotentialFn::from_function(
        [=](Real x) {
            Real v = c0;
            for (int n = 1; n <= degree; ++n)
                v += cs[n - 1] * std::sin(n * x) + cc[n - 1] * std::cos(n * x);
            return v;
        },
        M);
}

inline std::vector<Real> random_frozen_args(std::mt19937& rng, int n_max = 3) {
    std::uniform_int_distribution<int> nd(1, n_max);
    const int n = nd(rng);
    std::uniform_real_distribution<Real> u(0.35, kPi - 0.35);
    std::vector<Real> a(n);
    for (;;) {
        for (int i = 0; i < n; ++i) a[i] = u(rng);
        std::sort(a.begin(), a.end());
        bool ok = true;
        for (int i = 1; i < n; ++i)
            if (a[i] - a[i - 1] < 0.15) ok = false;
        if (ok) return a;
    }
}

inline GraphSpec random_graph(std::mt19937& rng, int p, int n_max = 3, Real amp = 0.4,
                              int M = 2048) {
    std::uniform_int_distribution<int> kind(0, 2);
    std::vector<EdgeSpec> edges;
    for (int j = 0; j < p; ++j) {
        PotentialFn q = random_trig_potential(rng, 3, amp, M);
        if (kind(rng) == 0)
            edges.emplace_back(std::move(q), std::vector<Real>{}, 0);
        else
            edges.emplace_back(std::move(q), random_frozen_args(rng, n_max), 0);
    }
    // at least one frozen edge keeps the instance genuinely nonlocal
    bool any_frozen = false;
    for (const auto& e : edges) any_frozen |= !e.ordinary();
    if (!any_frozen) {
        edges.back() = EdgeSpec(edges.back().q, random_frozen_args(rng, n_max), 0);
    }
    return GraphSpec(std::move(edges));
}

inline Real l2_grid_distance(const PotentialFn& a, const PotentialFn& b) {
    const int M = a.grid_cells();
    Real acc = 0;
    for (int i = 0; i <= M; ++i) {
        const Real x = kPi * static_cast<Real>(i) / M;
        const Real d = a.value(x) - b.value(x);
        acc += ((i == 0 || i == M) ? 0.5 : 1.0) * d * d;
    }
    return std::sqrt(acc * kPi / M);
}

}  // namespace testutil

#endif
