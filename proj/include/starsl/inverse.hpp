#ifndef STARSL_INVERSE_HPP
#define STARSL_INVERSE_HPP

// Reconstruction of the unknown potential on the last edge from the known
// edges, the frozen set F_p, and two eigenvalue subsequences:
//   1. ratio data g_{k,j} from the known edges' characteristic values,
//   2. a truncated Galerkin least-squares solve for the kernel pair,
//   3. sine-series coefficients of q_p read off the cosine kernel at integer
//      frequencies,
//   4. summation of the sine series.
// Modes whose frozen-set sine sum nearly vanishes are skipped and reported.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "starsl/common.hpp"
#include "starsl/edge.hpp"
#include "starsl/kernels.hpp"
#include "starsl/potential.hpp"
#include "starsl/spectrum.hpp"

namespace starsl {

struct InverseOptions {
    int K = 40;                     // eigenvalue pairs / trig modes used
    int D = 0;                      // sine modes extracted; 0 means K/2
    int M = 2048;                   // output grid cells
    int K_min = 4;                  // fewer pairs than this is an input error
    Real d00_rel_threshold = 1e-10; // assumption (i) proxy on |value_pi|
    Real tau_sin_per_arg = 1e-6;    // assumption (iii) proxy, scaled by n_p
    Real g_zero_threshold = 1e-10;  // ratio must stay away from zero
    bool rescaled_rows = true;      // row scaling keeping norms O(1), as displayed
};

struct RatioSequences {
    std::vector<Real> at_integer;  // g_{k,0}, grows like k^2
    std::vector<Real> at_half;     // g_{k,1}, bounded
};

// g_{k,j} = -sum_l deriv_l / value_l over the known edges, evaluated at
// lambda = mu_{k,j}^2. Validates the assumption (i) proxies.
inline RatioSequences charfn_ratio_sequence(std::span<const EdgeSpec> known,
                                            const EigenSubsequences& mu,
                                            const InverseOptions& opt = {}) {
    for (const EdgeSpec& e : known)
        if (e.alpha != 0) throw InputError("ratio data requires alpha = 0 on known edges");
    RatioSequences out;
    auto eval = [&](Real m, int k, int j) -> Real {
        const Complex lambda(m * m, 0.0);
        Real g = 0;
        for (std::size_t l = 0; l < known.size(); ++l) {
            const EdgeCharValues d = edge_charfn_values(known[l], lambda);
            const Real value = d.value_pi.real();
            const Real deriv = d.deriv_pi.real();
            if (std::abs(value) < opt.d00_rel_threshold * (1.0 + std::abs(deriv)))
                throw AssumptionViolation(
                    "assumption (i) violated: known-edge characteristic value vanishes at l=" +
                    std::to_string(l + 1) + ", k=" + std::to_string(k) +
                    ", j=" + std::to_string(j));
            g -= deriv / value;
        }
        if (std::abs(g) < opt.g_zero_threshold)
            throw AssumptionViolation("assumption (i) violated: ratio g vanishes at k=" +
                                      std::to_string(k) + ", j=" + std::to_string(j));
        return g;
    };
    out.at_integer.reserve(mu.near_integer.size());
    out.at_half.reserve(mu.near_half.size());
    for (std::size_t k = 0; k < mu.near_integer.size(); ++k)
        out.at_integer.push_back(eval(mu.near_integer[k], static_cast<int>(k) + 1, 0));
    for (std::size_t k = 0; k < mu.near_half.size(); ++k)
        out.at_half.push_back(eval(mu.near_half[k], static_cast<int>(k) + 1, 1));
    return out;
}

struct InverseSystem {
    Eigen::MatrixXd matrix;  // (2K+1) x (2K+1)
    Eigen::VectorXd rhs;
    int cos_terms = 0;  // K+1 cosine coefficients n_0..n_K
    int sin_terms = 0;  // K sine coefficients w_1..w_K
};

namespace detail {

inline Real cos_cos_integral(Real mu, int m) {  // integral_0^pi cos(m x) cos(mu x) dx
    return 0.5 * (sin_pi_over(mu + m) + sin_pi_over(mu - m));
}

inline Real sin_sin_integral(Real mu, Real m) {  // integral_0^pi sin(m x) sin(mu x) dx
    return 0.5 * (sin_pi_over(mu - m) - sin_pi_over(mu + m));
}

}  // namespace detail

// Discretizes the moment equations in the reference bases {cos m x} and
// {sin (m - 1/2) x}; the half-integer sine frequencies are the ones the
// second kernel is quadratically close to, and they carry its boundary
// behavior (zero at 0, free at pi).
// Row (k,0):  I_N(mu) - (mu/g) I_W(mu)  = -mu sin(mu pi) + (mu^2/g) cos(mu pi)
// Row (k,1): (g/mu) I_N(mu) - I_W(mu)   = -g sin(mu pi)  + mu cos(mu pi)
// plus one row pinning integral of the cosine kernel to zero. The unscaled
// variant divides row (k,j) through by mu^2/g and mu respectively.
inline InverseSystem assemble_kernel_system(const RatioSequences& g, const EigenSubsequences& mu,
                                            int K, bool rescaled = true) {
    if (K < 1) throw InputError("system order K must be positive");
    if (static_cast<std::size_t>(K) > mu.near_integer.size() ||
        static_cast<std::size_t>(K) > mu.near_half.size() ||
        static_cast<std::size_t>(K) > g.at_integer.size() ||
        static_cast<std::size_t>(K) > g.at_half.size())
        throw InputError("system order K exceeds the available eigenvalue data");

    InverseSystem sys;
    sys.cos_terms = K + 1;
    sys.sin_terms = K;
    const int cols = 2 * K + 1;
    sys.matrix = Eigen::MatrixXd::Zero(cols, cols);
    sys.rhs = Eigen::VectorXd::Zero(cols);

    int row = 0;
    for (int k = 0; k < K; ++k) {
        {  // near-integer row
            const Real m = mu.near_integer[k];
            const Real gk = g.at_integer[k];
            Real cn = 1.0, cw = -m / gk;
            Real rhs = -m * std::sin(m * kPi) + m * m / gk * std::cos(m * kPi);
            if (!rescaled) {
                const Real s = gk / (m * m);
                cn *= s;
                cw *= s;
                rhs *= s;
            }
            for (int c = 0; c < sys.cos_terms; ++c)
                sys.matrix(row, c) = cn * detail::cos_cos_integral(m, c);
            for (int c = 0; c < sys.sin_terms; ++c)
                sys.matrix(row, sys.cos_terms + c) =
                    cw * detail::sin_sin_integral(m, c + 0.5);
            sys.rhs(row) = rhs;
            ++row;
        }
        {  // near-half-integer row
            const Real m = mu.near_half[k];
            const Real gk = g.at_half[k];
            Real cn = gk / m, cw = -1.0;
            Real rhs = -gk * std::sin(m * kPi) + m * std::cos(m * kPi);
            if (!rescaled) {
                const Real s = 1.0 / m;
                cn *= s;
                cw *= s;
                rhs *= s;
            }
            for (int c = 0; c < sys.cos_terms; ++c)
                sys.matrix(row, c) = cn * detail::cos_cos_integral(m, c);
            for (int c = 0; c < sys.sin_terms; ++c)
                sys.matrix(row, sys.cos_terms + c) =
                    cw * detail::sin_sin_integral(m, c + 0.5);
            sys.rhs(row) = rhs;
            ++row;
        }
    }
    // zero-mean constraint on the cosine kernel
    sys.matrix(row, 0) = kPi;
    sys.rhs(row) = 0.0;
    return sys;
}

struct KernelSolveInfo {
    Real residual = 0;
    Real condition_estimate = 0;
    bool ill_conditioned = false;
};

inline KernelPair solve_kernel_system(const InverseSystem& sys, int M_out,
                                      KernelSolveInfo* info = nullptr) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys.matrix);
    const Eigen::VectorXd sol = qr.solve(sys.rhs);
    KernelSolveInfo local;
    local.residual = (sys.matrix * sol - sys.rhs).norm();
    const auto& r = qr.matrixR();
    const int nr = static_cast<int>(std::min(r.rows(), r.cols()));
    const Real r0 = std::abs(r(0, 0));
    const Real rn = std::abs(r(nr - 1, nr - 1));
    local.condition_estimate = (rn > 0) ? r0 / rn : std::numeric_limits<Real>::infinity();
    local.ill_conditioned = local.condition_estimate > 1e8;
    if (info) *info = local;

    std::vector<Real> nc(sys.cos_terms), ws(sys.sin_terms);
    for (int i = 0; i < sys.cos_terms; ++i) nc[i] = sol(i);
    for (int i = 0; i < sys.sin_terms; ++i) ws[i] = sol(sys.cos_terms + i);

    KernelPair pair;
    pair.trig_coeffs = std::make_pair(nc, ws);
    const int n_nodes = M_out + 1;
    pair.cos_kernel.resize(n_nodes);
    pair.sin_kernel.resize(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        const Real x = kPi * static_cast<Real>(i) / M_out;
        Real nv = 0, wv = 0;
        for (int m = 0; m < sys.cos_terms; ++m) nv += nc[m] * std::cos(m * x);
        for (int m = 0; m < sys.sin_terms; ++m) wv += ws[m] * std::sin((m + 0.5) * x);
        pair.cos_kernel[i] = nv;
        pair.sin_kernel[i] = wv;
    }
    return pair;
}

struct SineCoefficients {
    std::vector<Real> c;       // c_n, zero where skipped
    std::vector<int> skipped;  // 1-based mode indices with |sum_k sin(n a_k)| below threshold
};

// c_n = (integral of cos_kernel(t) cos(n t) dt) / sum_k sin(n a_k) for the
// modes where the denominator stays above tau; the rest are reported.
inline SineCoefficients potential_sine_coefficients(const KernelPair& pair,
                                                    std::span<const Real> frozen_args, int D,
                                                    Real tau_per_arg = 1e-6) {
    if (frozen_args.empty()) throw InputError("sine coefficients need a nonempty frozen set");
    if (D < 1) throw InputError("need at least one sine mode");
    const std::size_t max_d = (pair.cos_kernel.size() - 1) / 4;
    if (static_cast<std::size_t>(D) > max_d)
        throw InputError("mode count D exceeds grid resolution/4");
    const Real tau = tau_per_arg * static_cast<Real>(frozen_args.size());
    SineCoefficients out;
    out.c.assign(D, 0.0);
    for (int n = 1; n <= D; ++n) {
        Real denom = 0;
        for (Real a : frozen_args) denom += std::sin(n * a);
        if (std::abs(denom) < tau) {
            out.skipped.push_back(n);
            continue;
        }
        out.c[n - 1] = pair.weight_cos(static_cast<Real>(n)) / denom;
    }
    if (out.skipped.size() == static_cast<std::size_t>(D))
        throw AssumptionViolation(
            "assumption (iii) violated: sin-sum denominator vanishes for every requested mode");
    return out;
}

inline SineCoefficients potential_sine_coefficients(std::span<const Real> cos_kernel_grid,
                                                    std::span<const Real> frozen_args, int D,
                                                    Real tau_per_arg = 1e-6) {
    KernelPair pair;
    pair.cos_kernel.assign(cos_kernel_grid.begin(), cos_kernel_grid.end());
    pair.sin_kernel.assign(cos_kernel_grid.size(), 0.0);
    return potential_sine_coefficients(pair, frozen_args, D, tau_per_arg);
}

// Finite sine series over the non-skipped modes.
inline PotentialFn reconstruct_potential(std::span<const Real> c, std::span<const int> skipped,
                                         int M) {
    std::vector<Real> coeffs(c.begin(), c.end());
    for (int n : skipped)
        if (n >= 1 && n <= static_cast<int>(coeffs.size())) coeffs[n - 1] = 0.0;
    if (coeffs.empty()) return PotentialFn::zero(M);
    return sine_series_potential(coeffs, M);
}

struct ReconstructionResult {
    PotentialFn potential;
    std::vector<Real> coefficients;
    std::vector<int> skipped;
    KernelPair kernels;
    KernelSolveInfo solve_info;
    Real self_consistency = 0;  // representation defect of the solved pair vs the result
};

// The four reconstruction steps end to end, with the assumption proxies
// validated along the way.
inline ReconstructionResult invert(std::span<const EdgeSpec> known,
                                   std::span<const Real> unknown_frozen_args,
                                   const EigenSubsequences& mu, const InverseOptions& opt = {}) {
    if (known.empty()) throw InputError("need at least one known edge");
    if (unknown_frozen_args.empty())
        throw InputError("reconstruction requires a nonempty frozen set on the unknown edge");
    const int K = std::min<int>({opt.K, static_cast<int>(mu.near_integer.size()),
                                 static_cast<int>(mu.near_half.size())});
    if (K < opt.K_min)
        throw InputError("insufficient eigenvalue data: K=" + std::to_string(K) +
                         " below minimum " + std::to_string(opt.K_min));

    EigenSubsequences mu_used = mu;
    mu_used.near_integer.resize(K);
    mu_used.near_half.resize(K);

    const RatioSequences g = charfn_ratio_sequence(known, mu_used, opt);
    const InverseSystem sys = assemble_kernel_system(g, mu_used, K, opt.rescaled_rows);
    ReconstructionResult res;
    res.kernels = solve_kernel_system(sys, opt.M, &res.solve_info);

    const int D = opt.D > 0 ? opt.D : std::max(1, K / 2);
    SineCoefficients sc =
        potential_sine_coefficients(res.kernels, unknown_frozen_args, D, opt.tau_sin_per_arg);
    res.coefficients = sc.c;
    res.skipped = sc.skipped;
    res.potential = reconstruct_potential(sc.c, sc.skipped, opt.M);

    std::vector<Real> frozen(unknown_frozen_args.begin(), unknown_frozen_args.end());
    const EdgeSpec reconstructed_edge(res.potential, frozen, 0);
    std::vector<Real> rho_probe;
    for (int i = 0; i < 40; ++i) rho_probe.push_back(0.7 + 0.45 * i);
    res.self_consistency = kernel_representation_check(reconstructed_edge, res.kernels, rho_probe);
    return res;
}

}  // namespace starsl

#endif
