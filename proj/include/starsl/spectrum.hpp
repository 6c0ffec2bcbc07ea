#ifndef STARSL_SPECTRUM_HPP
#define STARSL_SPECTRUM_HPP

// Real zeros of the graph characteristic function, classified into the p
// asymptotic branches: one sequence near k - 1/2 (shifted by A_l/k) and p-1
// sequences near k. Even-multiplicity clusters (|Delta| dips without a sign
// change) are counted by a winding-number contour in the complex plane.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "starsl/common.hpp"
#include "starsl/graph.hpp"
#include "starsl/potential.hpp"

namespace starsl {

inline Real default_scan_step(int p) { return std::min(0.01, 1.0 / (40.0 * p)); }

struct RootScan {
    std::vector<Real> roots;    // sorted ascending, repeated per multiplicity
    std::vector<bool> cluster;  // near-multiple root detected
};

namespace detail {

struct SignValue {
    int sign;     // -1, 0, +1
    Real logabs;  // log|f|, -inf allowed at exact zeros
};

using SignFn = std::function<SignValue(Real)>;

struct ClusterInfo {
    int count = 0;    // zeros inside the probe disk, with multiplicity
    Real center = 0;  // their centroid
};
using ClusterProbeFn = std::function<ClusterInfo(Real center, Real radius)>;

inline Real bisect_sign_change(const SignFn& f, Real lo, Real hi, SignValue flo, SignValue fhi,
                               Real width = 1e-12) {
    for (int it = 0; it < 200 && hi - lo > width; ++it) {
        const Real mid = 0.5 * (lo + hi);
        const SignValue fm = f(mid);
        if (fm.sign == 0) return mid;
        if (fm.sign == flo.sign) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    // one secant polish on scale-normalized values
    const Real ref = std::max(flo.logabs, fhi.logabs);
    const Real a = flo.sign * std::exp(flo.logabs - ref);
    const Real b = fhi.sign * std::exp(fhi.logabs - ref);
    if (b != a) {
        const Real s = (lo * b - hi * a) / (b - a);
        if (s > lo && s < hi) return s;
    }
    return 0.5 * (lo + hi);
}

// Golden-section refinement of a local minimum of log|f|.
inline Real refine_minimum(const SignFn& f, Real lo, Real hi) {
    const Real gr = 0.5 * (std::sqrt(5.0) - 1.0);
    Real a = lo, b = hi;
    Real x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    Real f1 = f(x1).logabs, f2 = f(x2).logabs;
    for (int it = 0; it < 90 && b - a > 1e-11; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1).logabs;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2).logabs;
        }
    }
    return 0.5 * (a + b);
}

struct ScanOptions {
    Real cluster_dip = 1e-8;   // |f| at a refined minimum below dip*scale flags a cluster
    int fine_factor = 64;      // local re-scan density for near-multiple pairs
    Real bisect_width = 1e-12;
};

// Grid scan for sign-change roots plus dip clusters. `probe`, when given,
// counts the zeros inside a complex disk (with multiplicity) and locates
// their centroid; without it a dip is reported as a double at the minimum.
inline RootScan scan_sign_roots(const SignFn& f, const ClusterProbeFn& probe, Real lo, Real hi,
                                Real step, const ScanOptions& opt = {}) {
    RootScan out;
    auto push = [&](Real r, bool cl) {
        out.roots.push_back(r);
        out.cluster.push_back(cl);
    };

    const long n = std::lround(std::ceil((hi - lo) / step));
    if (n < 2) return out;
    std::vector<Real> xs(n + 1);
    std::vector<SignValue> fs(n + 1);
    for (long i = 0; i <= n; ++i) {
        xs[i] = std::min(lo + static_cast<Real>(i) * step, hi);
        fs[i] = f(xs[i]);
    }

    for (long i = 0; i < n; ++i) {
        if (fs[i].sign == 0) {
            if (i == 0 || fs[i - 1].sign != 0) push(xs[i], false);
            continue;
        }
        if (fs[i + 1].sign != 0 && fs[i].sign != fs[i + 1].sign)
            push(bisect_sign_change(f, xs[i], xs[i + 1], fs[i], fs[i + 1], opt.bisect_width),
                 false);
    }

    // Dip clusters: interior local minima of log|f| with uniform sign around.
    // The reference scale is the largest |f| within a quarter-unit window;
    // adjacent grid values are themselves suppressed near a multiple root.
    const long scale_w = std::max<long>(2, std::lround(std::ceil(0.25 / step)));
    for (long i = 1; i < n; ++i) {
        if (fs[i].sign == 0 || fs[i - 1].sign != fs[i].sign || fs[i].sign != fs[i + 1].sign)
            continue;
        if (!(fs[i].logabs < fs[i - 1].logabs && fs[i].logabs <= fs[i + 1].logabs)) continue;

        Real scale_log = -std::numeric_limits<Real>::infinity();
        for (long j = std::max<long>(0, i - scale_w); j <= std::min(n, i + scale_w); ++j)
            scale_log = std::max(scale_log, fs[j].logabs);
        // quick reject: minimum cannot dip anywhere near the threshold
        if (fs[i].logabs > scale_log + std::log(opt.cluster_dip) + 14.0) continue;

        // a fine re-scan splits genuinely separated near-multiple pairs
        const Real fstep = (xs[i + 1] - xs[i - 1]) / (2.0 * opt.fine_factor);
        bool split = false;
        SignValue prev = fs[i - 1];
        Real prev_x = xs[i - 1];
        for (int k = 1; k <= 2 * opt.fine_factor; ++k) {
            const Real x = xs[i - 1] + k * fstep;
            const SignValue cur = f(x);
            if (cur.sign != 0 && prev.sign != 0 && cur.sign != prev.sign) {
                push(bisect_sign_change(f, prev_x, x, prev, cur, opt.bisect_width), true);
                split = true;
            }
            prev = cur;
            prev_x = x;
        }
        if (split) continue;

        const Real m = refine_minimum(f, xs[i - 1], xs[i + 1]);
        const SignValue fm = f(m);
        if (fm.logabs > scale_log + std::log(opt.cluster_dip)) continue;
        if (probe) {
            const ClusterInfo info = probe(m, 0.75 * step);
            for (int k = 0; k < info.count; ++k) push(info.center, true);
        } else {
            push(m, true);
            push(m, true);
        }
    }

    // zip-sort roots with flags
    std::vector<std::size_t> order(out.roots.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return out.roots[a] < out.roots[b]; });
    RootScan sorted;
    for (std::size_t i : order) {
        sorted.roots.push_back(out.roots[i]);
        sorted.cluster.push_back(out.cluster[i]);
    }
    return sorted;
}

inline SignFn graph_sign_fn(const GraphSpec& graph) {
    return [&graph](Real rho) -> SignValue {
        const Complex d = graph_charfn(graph, Complex(rho * rho, 0.0));
        const Real v = d.real();
        if (v == 0.0) return {0, -std::numeric_limits<Real>::infinity()};
        return {v > 0 ? 1 : -1, std::log(std::abs(v))};
    };
}

// Zero count and centroid of the characteristic function inside a rho-plane
// disk, from the winding of log Delta and the Stieltjes sum of rho dlog Delta.
// Trapezoid sums of analytic periodic data converge spectrally, so the
// centroid localizes even a flat multiple root to near machine precision.
inline ClusterProbeFn graph_cluster_probe(const GraphSpec& graph) {
    return [&graph](Real center, Real radius) -> ClusterInfo {
        const int samples = 192;
        Real winding = 0;
        Complex weighted = 0;
        Complex prev_rho;
        Real prev_arg = 0;
        Real prev_logabs = 0;
        bool have_prev = false;
        for (int k = 0; k <= samples; ++k) {
            const Real th = 2.0 * kPi * k / samples;
            const Complex rho = Complex(center + radius * std::cos(th), radius * std::sin(th));
            const Complex val = graph_charfn(graph, rho * rho);
            if (std::abs(val) == 0.0) return {2, center};
            const Real a = std::arg(val);
            const Real la = std::log(std::abs(val));
            if (have_prev) {
                Real d = a - prev_arg;
                while (d > kPi) d -= 2.0 * kPi;
                while (d <= -kPi) d += 2.0 * kPi;
                winding += d;
                const Complex dlog(la - prev_logabs, d);
                weighted += 0.5 * (rho + prev_rho) * dlog;
            }
            prev_rho = rho;
            prev_arg = a;
            prev_logabs = la;
            have_prev = true;
        }
        ClusterInfo info;
        info.count = static_cast<int>(std::lround(winding / (2.0 * kPi)));
        info.center = center;
        if (info.count > 0) {
            const Complex centroid = weighted / Complex(0, 2.0 * kPi) / Real(info.count);
            if (std::abs(centroid.real() - center) < radius) info.center = centroid.real();
        }
        return info;
    };
}

}  // namespace detail

// Sign-change bracketing of rho -> Delta(rho^2) on (0.05, rho_max].
inline RootScan scan_real_roots(const GraphSpec& graph, Real rho_max, Real step) {
    if (!(step > 0.0 && step <= 0.01)) throw InputError("scan step must be in (0, 0.01]");
    if (rho_max <= 0.06) throw InputError("rho_max too small to scan");
    return detail::scan_sign_roots(detail::graph_sign_fn(graph),
                                   detail::graph_cluster_probe(graph), 0.05, rho_max, step);
}

// Bisection to width 1e-12 plus one secant polish; requires a sign change.
inline Real refine_root(const GraphSpec& graph, Real lo, Real hi) {
    const auto f = detail::graph_sign_fn(graph);
    const auto flo = f(lo), fhi = f(hi);
    if (flo.sign == 0) return lo;
    if (fhi.sign == 0) return hi;
    if (flo.sign == fhi.sign)
        throw InputError("refine_root bracket carries no sign change");
    return detail::bisect_sign_change(f, lo, hi, flo, fhi);
}

struct Spectrum {
    std::vector<std::vector<Real>> branches;      // branches[j][k-1] = rho_{k,j}
    std::vector<std::vector<bool>> cluster_flags;  // parallel to branches
    Real ordinary_mean_sum = 0;                   // A_l, sum of means over ordinary edges
    int k_max = 0;
};

// Shifted branch: k - 1/2 + A_l/(p pi k), near-integer branches: k. The
// 1/k coefficient follows from expanding the characteristic function near
// the half-integers: p cos(rho pi) sin^{p-1}(rho pi)/rho^{p-1} balances the
// A_l sin^{p-2}(rho pi)/rho^p correction, leaving eps = A_l/(p pi rho).
inline Real asymptotic_guess(const GraphSpec& graph, int k, int j) {
    if (k < 1) throw InputError("asymptotic_guess needs k >= 1");
    if (j == 0) {
        Real a_l = 0;
        for (const EdgeSpec& e : graph.edges)
            if (e.ordinary()) a_l += potential_mean(e.q);
        return static_cast<Real>(k) - 0.5 +
               a_l / (graph.size() * kPi * static_cast<Real>(k));
    }
    return static_cast<Real>(k);
}

// Groups the sorted roots p at a time (one unit window each). Inside a group
// the root nearest the shifted-branch guess becomes branch 0; the rest fill
// branches 1..p-1 in increasing order. A root straddling its unit window
// means the scan missed roots and is reported as a classification error.
inline Spectrum classify_spectrum(const RootScan& scan, const GraphSpec& graph) {
    const int p = graph.size();
    Spectrum spec;
    spec.branches.resize(p);
    spec.cluster_flags.resize(p);
    Real a_l = 0;
    for (const EdgeSpec& e : graph.edges)
        if (e.ordinary()) a_l += potential_mean(e.q);
    spec.ordinary_mean_sum = a_l;

    const std::size_t groups = scan.roots.size() / p;
    for (std::size_t g = 0; g < groups; ++g) {
        const int k = static_cast<int>(g) + 1;
        const std::size_t base = g * p;
        for (std::size_t i = base; i < base + p; ++i)
            if (scan.roots[i] <= k - 0.85 || scan.roots[i] >= k + 0.45)
                throw NumericError(
                    "spectrum classification failed in window k=" + std::to_string(k) +
                    ": root " + std::to_string(scan.roots[i]) + " outside (" +
                    std::to_string(k - 0.85) + ", " + std::to_string(k + 0.45) + ")");
        const Real guess0 =
            static_cast<Real>(k) - 0.5 + a_l / (p * kPi * static_cast<Real>(k));
        std::size_t pick = base;
        for (std::size_t i = base; i < base + p; ++i)
            if (std::abs(scan.roots[i] - guess0) < std::abs(scan.roots[pick] - guess0)) pick = i;
        spec.branches[0].push_back(scan.roots[pick]);
        spec.cluster_flags[0].push_back(scan.cluster[pick]);
        int j = 1;
        for (std::size_t i = base; i < base + p; ++i) {
            if (i == pick) continue;
            spec.branches[j].push_back(scan.roots[i]);
            spec.cluster_flags[j].push_back(scan.cluster[i]);
            ++j;
        }
    }
    spec.k_max = static_cast<int>(groups);
    return spec;
}

inline Spectrum classify_spectrum(const std::vector<Real>& roots, const GraphSpec& graph) {
    RootScan scan;
    scan.roots = roots;
    scan.cluster.assign(roots.size(), false);
    return classify_spectrum(scan, graph);
}

// The two subsequences the reconstruction consumes: mu_{k,0} ~= k from the
// first near-integer branch, mu_{k,1} ~= k - 1/2 from the shifted branch.
struct EigenSubsequences {
    std::vector<Real> near_integer;  // mu_{k,0}
    std::vector<Real> near_half;     // mu_{k,1}
    int integer_branch = 1;          // provenance
    int half_branch = 0;
};

inline EigenSubsequences extract_subsequences(const Spectrum& spec) {
    if (spec.branches.size() < 2 || spec.k_max < 1)
        throw InputError("spectrum must hold at least two classified branches");
    EigenSubsequences out;
    out.near_integer = spec.branches[1];
    out.near_half = spec.branches[0];
    const std::size_t n = std::min(out.near_integer.size(), out.near_half.size());
    out.near_integer.resize(n);
    out.near_half.resize(n);
    for (Real v : out.near_integer)
        if (!(v > 0.0)) throw AssumptionViolation("nonpositive eigenvalue in spectral data");
    for (Real v : out.near_half)
        if (!(v > 0.0)) throw AssumptionViolation("nonpositive eigenvalue in spectral data");
    return out;
}

}  // namespace starsl

#endif
