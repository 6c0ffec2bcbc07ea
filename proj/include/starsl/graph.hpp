#ifndef STARSL_GRAPH_HPP
#define STARSL_GRAPH_HPP

// The characteristic function of the star-graph problem, computed three
// independent ways: the sum-of-products formula, the peel-one-edge recursion,
// and the full bordered block determinant assembled from the continuity,
// matching and flux rows. The three must agree; tests enforce it.

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>

#include "starsl/common.hpp"
#include "starsl/edge.hpp"
#include "starsl/potential.hpp"

namespace starsl {

struct GraphCharSample {
    Complex lambda;
    Complex value_product;
    std::optional<Complex> value_determinant;
};

namespace detail {

inline std::vector<EdgeCharValues> all_edge_values(const GraphSpec& graph, Complex lambda) {
    const int p = graph.size();
    std::vector<EdgeCharValues> vals(p);
    for (int j = 0; j < p; ++j) {
        const int src = graph.duplicate_of[j];
        vals[j] = (src == j) ? edge_charfn_values(graph.edges[j], lambda) : vals[src];
    }
    return vals;
}

}  // namespace detail

// sum_k deriv_k * prod_{j != k} value_j via prefix/suffix products (no division)
inline Complex graph_charfn(const GraphSpec& graph, Complex lambda) {
    const auto vals = detail::all_edge_values(graph, lambda);
    const int p = graph.size();
    std::vector<Complex> prefix(p + 1), suffix(p + 1);
    prefix[0] = 1.0;
    suffix[p] = 1.0;
    for (int j = 0; j < p; ++j) prefix[j + 1] = prefix[j] * vals[j].value_pi;
    for (int j = p - 1; j >= 0; --j) suffix[j] = suffix[j + 1] * vals[j].value_pi;
    Complex acc = 0;
    for (int k = 0; k < p; ++k) acc += vals[k].deriv_pi * prefix[k] * suffix[k + 1];
    return acc;
}

// Peels the last edge: D_p = value_p * D_{p-1} + deriv_p * prod_{k<p} value_k,
// with the single-edge base case D_1 = deriv_1.
inline Complex graph_charfn_recursive(const GraphSpec& graph, Complex lambda) {
    const auto vals = detail::all_edge_values(graph, lambda);
    Complex d = vals[0].deriv_pi;
    Complex value_prod = vals[0].value_pi;
    for (int k = 1; k < graph.size(); ++k) {
        d = vals[k].value_pi * d + vals[k].deriv_pi * value_prod;
        value_prod *= vals[k].value_pi;
    }
    return d;
}

namespace detail {

// Matrix entries one edge contributes to the block assembly.
struct EdgeBlock {
    bool ordinary;
    int n;                       // frozen-argument count (0 for ordinary)
    std::vector<Complex> phi_a;  // phi_alpha at each frozen argument
    std::vector<Complex> w_a;    // sine transform at each frozen argument
    Complex phi_pi, w_pi;        // value-row entries at pi
    Complex dphi_pi, dw_pi;      // derivative-row entries at pi
    Complex z_pi, dz_pi;         // ordinary-edge solution value/derivative at pi
};

inline EdgeBlock edge_block(const EdgeSpec& edge, Complex lambda) {
    const Complex rho = std::sqrt(lambda);
    EdgeBlock b;
    b.ordinary = edge.ordinary();
    b.n = edge.n_frozen();
    if (b.ordinary) {
        auto [y, yp] = detail::integrate_ordinary(edge.q, rho, edge.alpha);
        b.z_pi = y;
        b.dz_pi = yp;
        return b;
    }
    const bool qz = edge.q.is_zero();
    b.phi_a.resize(b.n);
    b.w_a.resize(b.n);
    for (int k = 0; k < b.n; ++k) {
        b.phi_a[k] = free_solution(edge.alpha, edge.frozen_args[k], rho);
        b.w_a[k] = qz ? Complex(0) : potential_sine_transform(edge.q, edge.frozen_args[k], rho);
    }
    b.phi_pi = free_solution(edge.alpha, kPi, rho);
    b.w_pi = qz ? Complex(0) : potential_sine_transform(edge.q, kPi, rho);
    b.dphi_pi = free_solution_derivative(edge.alpha, kPi, rho);
    b.dw_pi = qz ? Complex(0) : potential_cosine_transform(edge.q, kPi, rho);
    return b;
}

// Assembles the chained block matrix. Row layout per edge j: its continuity
// rows, then a matching row carrying edge j's pi-entries positive and edge
// j+1's negative. The final row is either the plain pi-row of the last edge
// (the block-product identity) or the Kirchhoff derivative row across all
// edges (the graph characteristic function).
inline Eigen::MatrixXcd assemble_block_matrix(const GraphSpec& graph, Complex lambda,
                                              bool kirchhoff_last_row) {
    const int p = graph.size();
    int dim = 0;
    for (const EdgeSpec& e : graph.edges) dim += e.ordinary() ? 1 : e.n_frozen() + 1;
    if (dim > 64)
        throw NumericError("block determinant limited to total size 64, got " +
                           std::to_string(dim));

    std::vector<EdgeBlock> blocks;
    blocks.reserve(p);
    std::vector<int> col0(p);
    int c = 0;
    for (int j = 0; j < p; ++j) {
        blocks.push_back(edge_block(graph.edges[j], lambda));
        col0[j] = c;
        c += blocks[j].ordinary ? 1 : blocks[j].n + 1;
    }

    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    // Writes the pi-row entries of edge j (value or derivative flavor).
    auto put_pi_row = [&](int row, int j, Complex sign, bool deriv) {
        const EdgeBlock& b = blocks[j];
        if (b.ordinary) {
            m(row, col0[j]) = sign * (deriv ? b.dz_pi : b.z_pi);
        } else {
            m(row, col0[j]) = sign * (deriv ? b.dphi_pi : b.phi_pi);
            for (int k = 0; k < b.n; ++k)
                m(row, col0[j] + 1 + k) = sign * (deriv ? b.dw_pi : b.w_pi);
        }
    };

    int row = 0;
    for (int j = 0; j < p; ++j) {
        const EdgeBlock& b = blocks[j];
        if (!b.ordinary) {
            for (int k = 0; k < b.n; ++k) {
                m(row, col0[j]) = b.phi_a[k];
                for (int i = 0; i < b.n; ++i)
                    m(row, col0[j] + 1 + i) = (i == k) ? b.w_a[k] - 1.0 : b.w_a[k];
                ++row;
            }
        }
        if (j + 1 < p) {
            put_pi_row(row, j, Complex(1), false);
            put_pi_row(row, j + 1, Complex(-1), false);
            ++row;
        }
    }
    if (kirchhoff_last_row) {
        for (int j = 0; j < p; ++j) put_pi_row(row, j, Complex(1), true);
    } else {
        put_pi_row(row, p - 1, Complex(1), false);
    }
    return m;
}

}  // namespace detail

// Full bordered determinant; equals graph_charfn (same sign) in exact
// arithmetic, evaluated by partial-pivoting LU.
inline Complex graph_charfn_determinant(const GraphSpec& graph, Complex lambda) {
    const Eigen::MatrixXcd m = detail::assemble_block_matrix(graph, lambda, true);
    return Eigen::PartialPivLU<Eigen::MatrixXcd>(m).determinant();
}

// Chained block matrix with the plain pi-row last: its determinant equals the
// product of the per-edge value_pi characteristic functions.
inline Complex block_product_determinant(const GraphSpec& graph, Complex lambda) {
    const Eigen::MatrixXcd m = detail::assemble_block_matrix(graph, lambda, false);
    return Eigen::PartialPivLU<Eigen::MatrixXcd>(m).determinant();
}

inline GraphCharSample graph_charfn_sample(const GraphSpec& graph, Complex lambda,
                                           bool with_determinant = false) {
    GraphCharSample s;
    s.lambda = lambda;
    s.value_product = graph_charfn(graph, lambda);
    if (with_determinant) s.value_determinant = graph_charfn_determinant(graph, lambda);
    return s;
}

}  // namespace starsl

#endif
