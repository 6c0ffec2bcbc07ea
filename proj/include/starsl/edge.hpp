#ifndef STARSL_EDGE_HPP
#define STARSL_EDGE_HPP

// Per-edge characteristic functions. A frozen-argument edge reduces to a 2x2
// determinant in the potential transforms; an ordinary edge is integrated as
// an initial value problem. Everything is entire in lambda and supports
// complex lambda (used by the root finder's cluster diagnostics).

#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "starsl/common.hpp"
#include "starsl/potential.hpp"
#include "starsl/quadrature.hpp"

namespace starsl {

// Value at x of the free solution matching the order-gamma boundary condition
// at 0: sin(rho x)/rho for gamma = 0, cos(rho x) for gamma = 1.
inline Complex free_solution(int gamma, Real x, Complex rho) {
    if (gamma == 0) return x * sinc(rho * x);
    return std::cos(rho * x);
}

inline Complex free_solution_derivative(int gamma, Real x, Complex rho) {
    if (gamma == 0) return std::cos(rho * x);
    return -rho * std::sin(rho * x);
}

// Characteristic values of one edge at the inner vertex: the canonical
// solution's value and derivative at pi. Zeros of value_pi are the
// (alpha, Dirichlet) spectrum of the edge, zeros of deriv_pi the
// (alpha, Neumann) one.
struct EdgeCharValues {
    Complex value_pi;
    Complex deriv_pi;
    Complex lambda;
    Complex rho;  // principal square root of lambda
};

namespace detail {

// Fixed-step RK4 on the oscillation-factored variables (u, v) with
// y = u cos(rho x) + v sin(rho x)/rho. Exact when q = 0 and uniformly
// accurate in rho, unlike RK4 on the raw (y, y') pair. Steps are a multiple
// of the potential grid so stages never straddle interpolation kinks.
template <typename Scalar>
std::pair<Scalar, Scalar> integrate_free_factored(const PotentialFn& q, Scalar rho, int alpha) {
    const int M = q.grid_cells();
    const Real abs_rho = std::abs(rho);
    const long want = std::max<long>(2048, 64 * static_cast<long>(std::ceil(abs_rho)));
    const long per_cell = (want + M - 1) / M;
    const long n = static_cast<long>(M) * per_cell;
    if (n > (1L << 22))
        throw NumericError("ordinary-edge integration needs " + std::to_string(want) +
                           " steps; raise the potential grid M");

    Scalar u = (alpha == 0) ? Scalar(0) : Scalar(1);
    Scalar v = (alpha == 0) ? Scalar(1) : Scalar(0);
    const Real h = kPi / static_cast<Real>(n);

    auto rhs = [&](Real x, Scalar uu, Scalar vv, Scalar& du, Scalar& dv) {
        const Scalar phc = std::cos(rho * x);
        const Scalar phs = x * sinc(rho * x);
        const Scalar qy = q.value(x) * (uu * phc + vv * phs);
        du = -phs * qy;
        dv = phc * qy;
    };

    for (long i = 0; i < n; ++i) {
        const Real x = static_cast<Real>(i) * h;
        Scalar k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
        rhs(x, u, v, k1u, k1v);
        rhs(x + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v, k2u, k2v);
        rhs(x + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v, k3u, k3v);
        rhs(x + h, u + h * k3u, v + h * k3v, k4u, k4v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }

    const Scalar phc = std::cos(rho * kPi);
    const Scalar phs = kPi * sinc(rho * kPi);
    const Scalar dphc = -rho * std::sin(rho * kPi);
    const Scalar dphs = phc;
    return {u * phc + v * phs, u * dphc + v * dphs};
}

inline std::pair<Complex, Complex> integrate_ordinary(const PotentialFn& q, Complex rho,
                                                      int alpha) {
    if (q.is_zero()) {
        // RK4 stages vanish identically; skip the walk.
        return {free_solution(alpha, kPi, rho), free_solution_derivative(alpha, kPi, rho)};
    }
    if (rho.imag() == 0.0) {
        auto [y, yp] = integrate_free_factored<Real>(q, rho.real(), alpha);
        return {Complex(y), Complex(yp)};
    }
    return integrate_free_factored<Complex>(q, rho, alpha);
}

}  // namespace detail

// 2x2 reduced determinant of a frozen-argument edge:
//   | sum_j phi_alpha(a_j)   sum_j w_q(a_j) - 1 |
//   | phi_alpha^{(beta)}(pi) w_q^{(beta)}(pi)   |
inline Complex frozen_edge_charfn(const EdgeSpec& edge, Complex lambda, int beta) {
    if (edge.ordinary()) throw InputError("frozen_edge_charfn needs a nonempty frozen set");
    const Complex rho = std::sqrt(lambda);
    Complex sum_phi = 0, sum_w = 0;
    const bool qz = edge.q.is_zero();
    for (Real a : edge.frozen_args) {
        sum_phi += free_solution(edge.alpha, a, rho);
        if (!qz) sum_w += potential_sine_transform(edge.q, a, rho);
    }
    Complex bottom_phi, bottom_w;
    if (beta == 0) {
        bottom_phi = free_solution(edge.alpha, kPi, rho);
        bottom_w = qz ? Complex(0) : potential_sine_transform(edge.q, kPi, rho);
    } else {
        bottom_phi = free_solution_derivative(edge.alpha, kPi, rho);
        bottom_w = qz ? Complex(0) : potential_cosine_transform(edge.q, kPi, rho);
    }
    return sum_phi * bottom_w - (sum_w - 1.0) * bottom_phi;
}

// Ordinary edge: value (beta=0) or derivative (beta=1) at pi of the canonical
// solution with y^{(alpha)}(0) = 0 normalized through the free initial data.
inline Complex ordinary_edge_charfn(const EdgeSpec& edge, Complex lambda, int beta) {
    if (!edge.ordinary()) throw InputError("ordinary_edge_charfn needs an empty frozen set");
    const Complex rho = std::sqrt(lambda);
    auto [y, yp] = detail::integrate_ordinary(edge.q, rho, edge.alpha);
    return beta == 0 ? y : yp;
}

inline EdgeCharValues edge_charfn_values(const EdgeSpec& edge, Complex lambda) {
    const Complex rho = std::sqrt(lambda);
    EdgeCharValues out;
    out.lambda = lambda;
    out.rho = rho;
    if (edge.ordinary()) {
        auto [y, yp] = detail::integrate_ordinary(edge.q, rho, edge.alpha);
        out.value_pi = y;
        out.deriv_pi = yp;
        return out;
    }
    Complex sum_phi = 0, sum_w = 0;
    const bool qz = edge.q.is_zero();
    for (Real a : edge.frozen_args) {
        sum_phi += free_solution(edge.alpha, a, rho);
        if (!qz) sum_w += potential_sine_transform(edge.q, a, rho);
    }
    const Complex top_right = sum_w - 1.0;
    const Complex w_pi = qz ? Complex(0) : potential_sine_transform(edge.q, kPi, rho);
    const Complex dw_pi = qz ? Complex(0) : potential_cosine_transform(edge.q, kPi, rho);
    out.value_pi = sum_phi * w_pi - top_right * free_solution(edge.alpha, kPi, rho);
    out.deriv_pi = sum_phi * dw_pi - top_right * free_solution_derivative(edge.alpha, kPi, rho);
    return out;
}

// Node values of the nonlocal solution on a frozen edge: solve W u = -D v
// with W = w 1^T - I (row k constant off-diagonal). D is 1 when v lies in the
// column space of W, otherwise 0 with u a null vector.
struct FrozenNodeSolution {
    Real free_coefficient = 1.0;       // the D constant, 0 or 1
    std::vector<Complex> node_values;  // solution values at the frozen arguments
    bool degenerate = false;           // W singular yet v still in its column space
};

inline FrozenNodeSolution frozen_node_values(const EdgeSpec& edge, Complex lambda) {
    if (edge.ordinary()) throw InputError("frozen_node_values needs a nonempty frozen set");
    const Complex rho = std::sqrt(lambda);
    const int n = edge.n_frozen();

    Eigen::MatrixXcd W(n, n);
    Eigen::VectorXcd v(n);
    for (int k = 0; k < n; ++k) {
        const Real a = edge.frozen_args[k];
        const Complex w = potential_sine_transform(edge.q, a, rho);
        for (int j = 0; j < n; ++j) W(k, j) = (j == k) ? w - 1.0 : w;
        v(k) = free_solution(edge.alpha, a, rho);
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(W, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Real sigma_max = svd.singularValues()(0);
    // the -I part of W fixes the natural entry scale at >= 1
    const Real cutoff = 1e-10 * std::max(sigma_max, Real(1));
    int rank = 0;
    for (int i = 0; i < n; ++i)
        if (svd.singularValues()(i) > cutoff) ++rank;

    FrozenNodeSolution out;
    out.node_values.resize(n);
    if (rank == n) {
        Eigen::VectorXcd u = svd.solve(-v);
        out.free_coefficient = 1.0;
        for (int i = 0; i < n; ++i) out.node_values[i] = u(i);
        return out;
    }

    // Rank-deficient: decide by whether -v lies in the numerical column space.
    const Eigen::MatrixXcd u_range = svd.matrixU().leftCols(rank);
    const Eigen::VectorXcd b = -v;
    const Eigen::VectorXcd coeffs = u_range.adjoint() * b;
    const Real residual = (b - u_range * coeffs).norm();
    if (residual <= 1e-9 * std::max(v.norm(), Real(1e-300))) {
        Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
        for (int i = 0; i < rank; ++i)
            u += svd.matrixV().col(i) * (coeffs(i) / svd.singularValues()(i));
        out.free_coefficient = 1.0;
        out.degenerate = true;
        for (int i = 0; i < n; ++i) out.node_values[i] = u(i);
        return out;
    }
    Eigen::VectorXcd null_vec = svd.matrixV().col(n - 1);
    int imax = 0;
    for (int i = 1; i < n; ++i)
        if (std::abs(null_vec(i)) > std::abs(null_vec(imax))) imax = i;
    null_vec /= null_vec(imax);
    out.free_coefficient = 0.0;
    for (int i = 0; i < n; ++i) out.node_values[i] = null_vec(i);
    return out;
}

}  // namespace starsl

#endif
