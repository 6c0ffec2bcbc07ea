#ifndef STARSL_FD_HPP
#define STARSL_FD_HPP

// Independent finite-difference discretization of the nonlocal graph
// operator. Each edge gets the 3-point stencil on N-1 interior nodes plus a
// shared vertex value; frozen terms add a rank-one block per edge through
// linear interpolation at the frozen arguments. Eigenvalues come from a dense
// nonsymmetric eigensolve when the matrix is small and from a determinant
// bisection of the sparse pencil (A - lambda B) otherwise.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "starsl/common.hpp"
#include "starsl/potential.hpp"
#include "starsl/spectrum.hpp"

namespace starsl {

struct FdMatrix {
    int p = 0;       // edge count
    int n = 0;       // cells per edge; interior nodes per edge = n-1
    Real h = 0;      // mesh width pi/n
    Eigen::SparseMatrix<Real> a;  // size (p(n-1)+1)^2; last row is the flux constraint
    // B is the identity except for a zero in the constraint row.

    int size() const { return p * (n - 1) + 1; }
    int vertex_index() const { return p * (n - 1); }

    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(a); }

    // Standard eigenproblem with the vertex value eliminated through the
    // lambda-free constraint row; spectrum is unchanged.
    Eigen::MatrixXd reduced_dense() const {
        const int nI = size() - 1;
        const int V = vertex_index();
        Eigen::MatrixXd full = dense();
        const Real pivot = full(V, V);
        Eigen::MatrixXd red = full.topLeftCorner(nI, nI);
        red.noalias() -= full.topLeftCorner(nI, V + 1).col(V) * (full.row(V).head(nI) / pivot);
        return red;
    }
};

inline FdMatrix build_fd_matrix(const GraphSpec& graph, int n_cells) {
    if (n_cells < 100) throw InputError("finite-difference grid needs N >= 100");
    FdMatrix fd;
    fd.p = graph.size();
    fd.n = n_cells;
    fd.h = kPi / static_cast<Real>(n_cells);
    const int interior = n_cells - 1;
    const int V = fd.p * interior;
    const Real h2 = fd.h * fd.h;

    std::vector<Eigen::Triplet<Real>> trip;
    trip.reserve(static_cast<std::size_t>(fd.p) * interior * 6);

    for (int j = 0; j < fd.p; ++j) {
        const EdgeSpec& edge = graph.edges[j];
        const int base = j * interior;
        const bool neumann0 = edge.alpha == 1;
        for (int i = 1; i <= interior; ++i) {
            const int row = base + i - 1;
            // 3-point Laplacian; alpha=1 folds in the one-sided second-order
            // boundary rule y0 = (4 y1 - y2)/3.
            if (i == 1) {
                if (neumann0) {
                    trip.emplace_back(row, base + 0, 2.0 / (3.0 * h2));
                    trip.emplace_back(row, base + 1, -2.0 / (3.0 * h2));
                } else {
                    trip.emplace_back(row, base + 0, 2.0 / h2);
                    trip.emplace_back(row, base + 1, -1.0 / h2);
                }
            } else {
                trip.emplace_back(row, base + i - 2, -1.0 / h2);
                trip.emplace_back(row, base + i - 1, 2.0 / h2);
                const int right = (i == interior) ? V : base + i;
                trip.emplace_back(row, right, -1.0 / h2);
            }
            const Real qi = edge.q.value(i * fd.h);
            if (edge.ordinary()) {
                trip.emplace_back(row, base + i - 1, qi);
            } else {
                for (Real aarg : edge.frozen_args) {
                    const Real pos = aarg / fd.h;
                    int idx = static_cast<int>(pos);
                    if (idx >= n_cells) idx = n_cells - 1;
                    const Real th = pos - idx;
                    // interpolation weights at nodes idx, idx+1
                    const std::pair<int, Real> parts[2] = {{idx, 1.0 - th}, {idx + 1, th}};
                    for (auto [node, wgt] : parts) {
                        if (wgt == 0.0) continue;
                        const Real val = qi * wgt;
                        if (node == 0) {
                            if (neumann0) {
                                trip.emplace_back(row, base + 0, val * 4.0 / 3.0);
                                trip.emplace_back(row, base + 1, -val / 3.0);
                            }
                            // Dirichlet end contributes nothing
                        } else if (node == n_cells) {
                            trip.emplace_back(row, V, val);
                        } else {
                            trip.emplace_back(row, base + node - 1, val);
                        }
                    }
                }
            }
        }
        // Kirchhoff flux row: (3 Y - 4 y_{N-1} + y_{N-2}) / (2h) per edge
        trip.emplace_back(V, V, 3.0 / (2.0 * fd.h));
        trip.emplace_back(V, base + interior - 1, -4.0 / (2.0 * fd.h));
        trip.emplace_back(V, base + interior - 2, 1.0 / (2.0 * fd.h));
    }

    fd.a.resize(V + 1, V + 1);
    fd.a.setFromTriplets(trip.begin(), trip.end());
    fd.a.makeCompressed();
    return fd;
}

struct FdSpectrum {
    std::vector<Real> values;               // smallest real eigenvalues, ascending
    std::vector<Complex> complex_findings;  // eigenvalues with a genuine imaginary part
};

namespace detail {

inline FdSpectrum fd_spectrum_dense(const FdMatrix& fd, int count) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(fd.reduced_dense());
    if (es.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
    FdSpectrum out;
    std::vector<Complex> eigs(es.eigenvalues().data(),
                              es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(eigs.begin(), eigs.end(),
              [](Complex a, Complex b) { return a.real() < b.real(); });
    for (const Complex& ev : eigs) {
        if (static_cast<int>(out.values.size()) >= count) break;
        if (std::abs(ev.imag()) <= 1e-8 * std::max(Real(1), std::abs(ev.real())))
            out.values.push_back(ev.real());
        else
            out.complex_findings.push_back(ev);
    }
    return out;
}

// sign and log|det(A - lambda B)| via sparse LU. The sparsity pattern is the
// same at every lambda, so the symbolic analysis is shared across the scan.
class FdDetEvaluator {
public:
    explicit FdDetEvaluator(const FdMatrix& fd) : fd_(fd), work_(fd.a) {
        lu_.analyzePattern(work_);
    }

    SignValue operator()(Real rho) {
        const Real lambda = rho * rho;
        const int nI = fd_.size() - 1;
        std::copy(fd_.a.valuePtr(), fd_.a.valuePtr() + fd_.a.nonZeros(), work_.valuePtr());
        for (int i = 0; i < nI; ++i) work_.coeffRef(i, i) -= lambda;
        lu_.factorize(work_);
        if (lu_.info() != Eigen::Success)
            return {0, -std::numeric_limits<Real>::infinity()};  // singular pivot: on a root
        const Real logabs = lu_.logAbsDeterminant();
        const int sign = static_cast<int>(lu_.signDeterminant());
        return {sign, logabs};
    }

private:
    const FdMatrix& fd_;
    Eigen::SparseMatrix<Real> work_;
    Eigen::SparseLU<Eigen::SparseMatrix<Real>> lu_;
};

inline FdSpectrum fd_spectrum_scan(const FdMatrix& fd, int count) {
    FdDetEvaluator eval(fd);
    const SignFn f = [&eval](Real rho) { return eval(rho); };
    Real lo = 0.05;
    Real hi = static_cast<Real>(count) / fd.p + 1.3;
    ScanOptions opt;
    opt.cluster_dip = 1e-7;
    opt.bisect_width = 1e-9;
    FdSpectrum out;
    Real last_rho = -1;
    for (int attempt = 0; attempt < 6; ++attempt) {
        const RootScan scan = scan_sign_roots(f, ClusterProbeFn(), lo, hi, 0.006, opt);
        for (std::size_t i = 0; i < scan.roots.size(); ++i) {
            if (static_cast<int>(out.values.size()) >= count) break;
            if (scan.roots[i] <= last_rho + 1e-7 && !(i > 0 && scan.cluster[i])) continue;
            last_rho = scan.roots[i];
            out.values.push_back(scan.roots[i] * scan.roots[i]);
        }
        if (static_cast<int>(out.values.size()) >= count) return out;
        lo = hi - 0.006;  // overlap one step so boundary roots are kept
        hi += 1.2;
    }
    return out;
}

}  // namespace detail

// Smallest `count` eigenvalues of the discretized operator.
inline FdSpectrum fd_spectrum(const FdMatrix& fd, int count) {
    if (count < 1 || count > 30) throw InputError("fd_spectrum count must be in [1, 30]");
    if (fd.size() <= 801) return detail::fd_spectrum_dense(fd, count);
    return detail::fd_spectrum_scan(fd, count);
}

struct SpectrumComparison {
    Real max_rel_deviation = 0;
    int matched = 0;  // pairs within tolerance
    int compared = 0;
    int unmatched_analytic = 0;
    int unmatched_fd = 0;
    std::vector<Real> deviations;
};

// Index-wise greedy match of the two sorted eigenvalue lists (both carry
// multiplicity); deviations are relative to the analytic value.
inline SpectrumComparison compare_spectra(const Spectrum& analytic, std::span<const Real> fd,
                                          Real tol) {
    std::vector<Real> lam;
    for (std::size_t j = 0; j < analytic.branches.size(); ++j)
        for (Real r : analytic.branches[j]) lam.push_back(r * r);
    std::sort(lam.begin(), lam.end());
    std::vector<Real> fds(fd.begin(), fd.end());
    std::sort(fds.begin(), fds.end());

    SpectrumComparison rep;
    const std::size_t n = std::min(lam.size(), fds.size());
    rep.compared = static_cast<int>(n);
    rep.unmatched_analytic = static_cast<int>(lam.size() - n);
    rep.unmatched_fd = static_cast<int>(fds.size() - n);
    for (std::size_t i = 0; i < n; ++i) {
        const Real dev = std::abs(lam[i] - fds[i]) / std::max(std::abs(lam[i]), Real(1e-12));
        rep.deviations.push_back(dev);
        rep.max_rel_deviation = std::max(rep.max_rel_deviation, dev);
        if (dev <= tol) ++rep.matched;
    }
    return rep;
}

}  // namespace starsl

#endif
