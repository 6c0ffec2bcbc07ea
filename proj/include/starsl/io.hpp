#ifndef STARSL_IO_HPP
#define STARSL_IO_HPP

// Configuration parsing, command dispatch and result serialization. JSON for
// structured data, CSV with 17-significant-digit floats for numeric tables;
// identical inputs produce byte-identical outputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "starsl/common.hpp"
#include "starsl/fd.hpp"
#include "starsl/inverse.hpp"
#include "starsl/kernels.hpp"
#include "starsl/potential.hpp"
#include "starsl/spectrum.hpp"

namespace starsl {

using Json = nlohmann::ordered_json;

inline std::string format_real(Real v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline void reject_unknown_keys(const Json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw InputError("unknown key \"" + it.key() + "\" in " + where);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open file for writing: " + path);
    out << contents;
    if (!out) throw InputError("write failed: " + path);
}

}  // namespace detail

// --- potential / edge / graph serialization ------------------------------

inline Json potential_to_json(const PotentialFn& q) {
    Json j;
    j["grid"] = q.grid;
    if (q.sine_coeffs)
        j["sine_coeffs"] = *q.sine_coeffs;
    else
        j["sine_coeffs"] = nullptr;
    j["M"] = q.grid_cells();
    return j;
}

inline PotentialFn potential_from_json(const Json& j, int default_M = 2048) {
    if (!j.is_object()) throw InputError("potential must be a JSON object");
    detail::reject_unknown_keys(
        j, {"grid", "sine_coeffs", "M", "constant", "affine", "sine_series"}, "potential");
    if (j.contains("constant")) {
        const int M = j.contains("M") ? j.at("M").get<int>() : default_M;
        return PotentialFn::constant(j.at("constant").get<Real>(), M);
    }
    if (j.contains("affine")) {
        const int M = j.contains("M") ? j.at("M").get<int>() : default_M;
        const auto ab = j.at("affine").get<std::vector<Real>>();
        if (ab.size() != 2) throw InputError("\"affine\" takes [offset, slope]");
        return PotentialFn::from_function([&](Real t) { return ab[0] + ab[1] * t; }, M);
    }
    if (j.contains("sine_series")) {
        const int M = j.contains("M") ? j.at("M").get<int>() : default_M;
        const std::vector<Real> c = j.at("sine_series").get<std::vector<Real>>();
        return sine_series_potential(c, M);
    }
    if (!j.contains("grid") || !j.contains("M"))
        throw InputError("potential object needs \"grid\" and \"M\" (or a shorthand form)");
    const int M = j.at("M").get<int>();
    std::vector<Real> grid = j.at("grid").get<std::vector<Real>>();
    if (static_cast<int>(grid.size()) != M + 1)
        throw InputError("potential grid size must equal M+1");
    PotentialFn q = PotentialFn::from_grid(std::move(grid));
    if (j.contains("sine_coeffs") && !j.at("sine_coeffs").is_null()) {
        const std::vector<Real> c = j.at("sine_coeffs").get<std::vector<Real>>();
        const PotentialFn regen = sine_series_potential(c, M);
        for (int i = 0; i <= M; ++i)
            if (std::abs(regen.grid[i] - q.grid[i]) > 1e-12)
                throw InputError("potential grid disagrees with its sine_coeffs");
        q.sine_coeffs = c;
    }
    return q;
}

inline Json edge_to_json(const EdgeSpec& e) {
    Json j;
    j["potential"] = potential_to_json(e.q);
    j["frozen_args"] = e.frozen_args;
    j["alpha"] = e.alpha;
    return j;
}

inline EdgeSpec edge_from_json(const Json& j, int default_M = 2048) {
    if (!j.is_object()) throw InputError("edge must be a JSON object");
    detail::reject_unknown_keys(j, {"potential", "frozen_args", "alpha"}, "edge");
    if (!j.contains("potential")) throw InputError("edge needs a \"potential\"");
    PotentialFn q = potential_from_json(j.at("potential"), default_M);
    std::vector<Real> frozen;
    if (j.contains("frozen_args")) frozen = j.at("frozen_args").get<std::vector<Real>>();
    const int alpha = j.contains("alpha") ? j.at("alpha").get<int>() : 0;
    return EdgeSpec(std::move(q), std::move(frozen), alpha);
}

inline Json graph_to_json(const GraphSpec& g) {
    Json j;
    Json edges = Json::array();
    for (const EdgeSpec& e : g.edges) edges.push_back(edge_to_json(e));
    j["edges"] = edges;
    return j;
}

inline GraphSpec graph_from_json(const Json& j, int default_M = 2048) {
    if (!j.is_object()) throw InputError("graph must be a JSON object");
    detail::reject_unknown_keys(j, {"edges"}, "graph");
    if (!j.contains("edges") || !j.at("edges").is_array())
        throw InputError("graph needs an \"edges\" array");
    std::vector<EdgeSpec> edges;
    for (const Json& je : j.at("edges")) edges.push_back(edge_from_json(je, default_M));
    if (edges.size() < 2) throw InputError("graph needs p >= 2 edges");
    return GraphSpec(std::move(edges));
}

// --- run configuration ----------------------------------------------------

struct RunConfig {
    std::string command;  // forward, charfn, kernels, invert, roundtrip, oracle
    std::string graph_path;
    Json graph_inline;  // used when non-null
    std::string eigenvalues_path;
    std::string out_dir = ".";
    int M = 2048;
    int K = 40;
    int D = 0;
    int k_max = 20;
    int fd_N = 2000;
    int count = 8;
    Real rho_max = 0;  // 0: derived as k_max + 1
    Real step = 0;     // 0: default_scan_step(p)
    InverseOptions thresholds;
    bool verbose = false;
};

inline RunConfig parse_config(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw InputError("config must be a JSON object");
    detail::reject_unknown_keys(
        j,
        {"command", "graph", "eigenvalues", "out", "M", "K", "D", "k_max", "fd_N", "count",
         "rho_max", "step", "thresholds"},
        "config");
    RunConfig cfg;
    if (j.contains("command")) {
        cfg.command = j.at("command").get<std::string>();
        static const std::set<std::string> cmds = {"forward", "charfn",    "kernels",
                                                   "invert",  "roundtrip", "oracle"};
        if (!cmds.count(cfg.command))
            throw InputError("unknown command \"" + cfg.command +
                             "\"; expected forward|charfn|kernels|invert|roundtrip|oracle");
    }
    if (j.contains("graph")) {
        if (j.at("graph").is_string())
            cfg.graph_path = j.at("graph").get<std::string>();
        else
            cfg.graph_inline = j.at("graph");
    }
    if (j.contains("eigenvalues")) cfg.eigenvalues_path = j.at("eigenvalues").get<std::string>();
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();

    auto get_int = [&](const char* key, int lo, int hi, int dflt) {
        if (!j.contains(key)) return dflt;
        const int v = j.at(key).get<int>();
        if (v < lo || v > hi)
            throw InputError(std::string("key \"") + key + "\" must be in [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return v;
    };
    cfg.M = get_int("M", 64, 1 << 20, cfg.M);
    cfg.K = get_int("K", 1, 512, cfg.K);
    cfg.D = get_int("D", 0, 512, cfg.D);
    cfg.k_max = get_int("k_max", 1, 200, cfg.k_max);
    cfg.fd_N = get_int("fd_N", 100, 20000, cfg.fd_N);
    cfg.count = get_int("count", 1, 30, cfg.count);
    if (j.contains("rho_max")) {
        cfg.rho_max = j.at("rho_max").get<Real>();
        if (!(cfg.rho_max > 0.1 && cfg.rho_max <= 250))
            throw InputError("key \"rho_max\" must be in (0.1, 250]");
    }
    if (j.contains("step")) {
        cfg.step = j.at("step").get<Real>();
        if (!(cfg.step > 0 && cfg.step <= 0.01))
            throw InputError("key \"step\" must be in (0, 0.01]");
    }
    if (j.contains("thresholds")) {
        const Json& t = j.at("thresholds");
        detail::reject_unknown_keys(t, {"d00_rel", "tau_sin", "g_zero"}, "thresholds");
        if (t.contains("d00_rel")) cfg.thresholds.d00_rel_threshold = t.at("d00_rel").get<Real>();
        if (t.contains("tau_sin")) cfg.thresholds.tau_sin_per_arg = t.at("tau_sin").get<Real>();
        if (t.contains("g_zero")) cfg.thresholds.g_zero_threshold = t.at("g_zero").get<Real>();
    }
    cfg.thresholds.M = cfg.M;
    cfg.thresholds.K = cfg.K;
    if (cfg.D > 0) cfg.thresholds.D = cfg.D;
    return cfg;
}

// --- CSV ------------------------------------------------------------------

inline void write_spectrum_csv(const std::string& path, const Spectrum& spec) {
    std::string out = "k,j,rho,lambda,cluster\n";
    for (int k = 1; k <= spec.k_max; ++k)
        for (std::size_t jb = 0; jb < spec.branches.size(); ++jb) {
            const Real rho = spec.branches[jb][k - 1];
            out += std::to_string(k) + "," + std::to_string(jb) + "," + format_real(rho) + "," +
                   format_real(rho * rho) + "," + (spec.cluster_flags[jb][k - 1] ? "1" : "0") +
                   "\n";
        }
    detail::write_file(path, out);
}

inline void write_charfn_csv(const std::string& path, const GraphSpec& graph, Real rho_max,
                             Real step) {
    std::string out = "rho,delta\n";
    for (Real rho = 0.05; rho <= rho_max + 1e-12; rho += step) {
        const Complex d = graph_charfn(graph, Complex(rho * rho, 0.0));
        out += format_real(rho) + "," + format_real(d.real()) + "\n";
    }
    detail::write_file(path, out);
}

inline void write_kernels_csv(const std::string& path, const KernelPair& pair) {
    std::string out = "t,N,W\n";
    const std::size_t n = pair.cos_kernel.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Real t = kPi * static_cast<Real>(i) / static_cast<Real>(n - 1);
        out += format_real(t) + "," + format_real(pair.cos_kernel[i]) + "," +
               format_real(pair.sin_kernel[i]) + "\n";
    }
    detail::write_file(path, out);
}

// eigenvalue CSV: header k,j,mu; j=0 rows are the near-integer sequence
inline EigenSubsequences read_eigenvalues_csv(const std::string& path) {
    std::istringstream in(detail::read_file(path));
    std::string line;
    std::map<int, Real> mu0, mu1;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first && line.find("mu") != std::string::npos) {
            first = false;
            continue;
        }
        first = false;
        std::istringstream ls(line);
        std::string tok;
        std::vector<std::string> toks;
        while (std::getline(ls, tok, ',')) toks.push_back(tok);
        if (toks.size() != 3) throw InputError("eigenvalue CSV rows must be k,j,mu");
        const int k = std::stoi(toks[0]);
        const int jj = std::stoi(toks[1]);
        const Real mu = std::stod(toks[2]);
        if (k < 1) throw InputError("eigenvalue CSV: k must be >= 1");
        if (jj == 0)
            mu0[k] = mu;
        else if (jj == 1)
            mu1[k] = mu;
        else
            throw InputError("eigenvalue CSV: j must be 0 or 1");
    }
    EigenSubsequences out;
    for (int k = 1; mu0.count(k) && mu1.count(k); ++k) {
        out.near_integer.push_back(mu0[k]);
        out.near_half.push_back(mu1[k]);
    }
    if (out.near_integer.empty())
        throw InputError("eigenvalue CSV holds no complete (k, j=0/1) pairs");
    return out;
}

inline void write_eigenvalues_csv(const std::string& path, const EigenSubsequences& mu) {
    std::string out = "k,j,mu\n";
    for (std::size_t k = 0; k < mu.near_integer.size(); ++k)
        out += std::to_string(k + 1) + ",0," + format_real(mu.near_integer[k]) + "\n";
    for (std::size_t k = 0; k < mu.near_half.size(); ++k)
        out += std::to_string(k + 1) + ",1," + format_real(mu.near_half[k]) + "\n";
    detail::write_file(path, out);
}

// --- command dispatch -------------------------------------------------------

namespace detail {

inline GraphSpec load_graph(const RunConfig& cfg) {
    if (!cfg.graph_inline.is_null()) return graph_from_json(cfg.graph_inline, cfg.M);
    if (cfg.graph_path.empty()) throw InputError("config needs a \"graph\" (path or object)");
    Json j;
    try {
        j = Json::parse(read_file(cfg.graph_path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("graph file is not valid JSON: ") + e.what());
    }
    return graph_from_json(j, cfg.M);
}

inline std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

inline Json diagnostics_to_json(const ReconstructionResult& res) {
    Json d;
    d["solve_residual"] = res.solve_info.residual;
    d["condition_estimate"] = res.solve_info.condition_estimate;
    d["ill_conditioned"] = res.solve_info.ill_conditioned;
    d["self_consistency"] = res.self_consistency;
    d["skipped_modes"] = res.skipped;
    d["coefficients"] = res.coefficients;
    return d;
}

inline Real l2_distance(const PotentialFn& a, const PotentialFn& b) {
    const int M = a.grid_cells();
    Real acc = 0;
    for (int i = 0; i <= M; ++i) {
        const Real x = kPi * static_cast<Real>(i) / M;
        const Real d = a.value(x) - b.value(x);
        const Real w = (i == 0 || i == M) ? 0.5 : 1.0;
        acc += w * d * d;
    }
    return std::sqrt(acc * a.spacing());
}

inline Real l2_norm(const PotentialFn& a) {
    return l2_distance(a, PotentialFn::zero(a.grid_cells()));
}

}  // namespace detail

// Executes the configured command; returns the process exit status.
inline int run(const RunConfig& cfg) {
    if (cfg.command.empty()) throw InputError("no command given (config key \"command\")");
    std::filesystem::create_directories(cfg.out_dir);
    const GraphSpec graph = detail::load_graph(cfg);
    const int p = graph.size();
    const Real step = cfg.step > 0 ? cfg.step : default_scan_step(p);
    const Real rho_max = cfg.rho_max > 0 ? cfg.rho_max : static_cast<Real>(cfg.k_max) + 1.0;

    auto forward_spectrum = [&]() {
        const RootScan scan = scan_real_roots(graph, rho_max, step);
        return classify_spectrum(scan, graph);
    };

    if (cfg.command == "forward") {
        const Spectrum spec = forward_spectrum();
        write_spectrum_csv(detail::join_path(cfg.out_dir, "spectrum.csv"), spec);
        if (cfg.verbose)
            std::cout << "forward: " << spec.k_max << " windows, A_l=" << spec.ordinary_mean_sum
                      << "\n";
        return 0;
    }

    if (cfg.command == "charfn") {
        write_charfn_csv(detail::join_path(cfg.out_dir, "charfn.csv"), graph, rho_max,
                         cfg.step > 0 ? cfg.step : 0.01);
        return 0;
    }

    if (cfg.command == "kernels") {
        const EdgeSpec& last = graph.unknown_edge();
        if (last.ordinary())
            throw InputError("kernels command needs a frozen unknown (last) edge");
        const KernelPair pair = edge_kernels(last.q, last.frozen_args, cfg.M);
        write_kernels_csv(detail::join_path(cfg.out_dir, "kernels.csv"), pair);
        return 0;
    }

    if (cfg.command == "invert" || cfg.command == "roundtrip") {
        const EdgeSpec& last = graph.unknown_edge();
        if (last.ordinary())
            throw InputError("reconstruction needs a frozen unknown (last) edge");
        EigenSubsequences mu;
        if (cfg.command == "invert") {
            if (cfg.eigenvalues_path.empty())
                throw InputError("invert needs an \"eigenvalues\" CSV path");
            mu = read_eigenvalues_csv(cfg.eigenvalues_path);
        } else {
            const Spectrum spec = forward_spectrum();
            mu = extract_subsequences(spec);
            write_eigenvalues_csv(detail::join_path(cfg.out_dir, "eigenvalues.csv"), mu);
        }
        InverseOptions opt = cfg.thresholds;
        std::vector<EdgeSpec> known(graph.edges.begin(), graph.edges.end() - 1);
        const ReconstructionResult res = invert(known, last.frozen_args, mu, opt);
        detail::write_file(detail::join_path(cfg.out_dir, "potential.json"),
                           potential_to_json(res.potential).dump(2) + "\n");
        Json diag = detail::diagnostics_to_json(res);
        write_kernels_csv(detail::join_path(cfg.out_dir, "kernels.csv"), res.kernels);
        if (cfg.command == "roundtrip") {
            const Real err = detail::l2_distance(res.potential, last.q);
            const Real scale = std::max(detail::l2_norm(last.q), Real(1e-12));
            Json report;
            report["l2_error"] = err;
            report["l2_error_relative"] = err / scale;
            report["k_pairs_used"] = std::min<int>(opt.K, static_cast<int>(mu.near_integer.size()));
            report["diagnostics"] = diag;
            detail::write_file(detail::join_path(cfg.out_dir, "report.json"),
                               report.dump(2) + "\n");
            if (cfg.verbose) std::cout << "roundtrip: L2 error " << err << "\n";
        }
        detail::write_file(detail::join_path(cfg.out_dir, "diagnostics.json"),
                           diag.dump(2) + "\n");
        return res.skipped.empty() ? 0 : 3;
    }

    if (cfg.command == "oracle") {
        const FdMatrix fd = build_fd_matrix(graph, cfg.fd_N);
        const FdSpectrum fds = fd_spectrum(fd, cfg.count);
        const Real needed_rho = std::sqrt(fds.values.empty() ? 4.0 : fds.values.back()) + 0.6;
        const RootScan scan = scan_real_roots(graph, std::max(rho_max, needed_rho), step);
        const Spectrum spec = classify_spectrum(scan, graph);
        const SpectrumComparison cmp = compare_spectra(spec, fds.values, 2e-3);
        Json rep;
        rep["fd_N"] = cfg.fd_N;
        rep["fd_eigenvalues"] = fds.values;
        rep["complex_findings"] = Json::array();
        for (const Complex& c : fds.complex_findings)
            rep["complex_findings"].push_back({{"re", c.real()}, {"im", c.imag()}});
        rep["max_rel_deviation"] = cmp.max_rel_deviation;
        rep["compared"] = cmp.compared;
        rep["matched"] = cmp.matched;
        rep["unmatched_analytic"] = cmp.unmatched_analytic;
        rep["unmatched_fd"] = cmp.unmatched_fd;
        detail::write_file(detail::join_path(cfg.out_dir, "oracle.json"), rep.dump(2) + "\n");
        return 0;
    }

    throw InputError("unknown command \"" + cfg.command + "\"");
}

}  // namespace starsl

#endif
