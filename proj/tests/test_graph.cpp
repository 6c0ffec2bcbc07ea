#include <catch2/catch.hpp>

#include <random>

#include "starsl/graph.hpp"

#include "helpers.hpp"

using namespace starsl;

namespace {

GraphSpec free_graph(int p, int M = 2048) {
    std::vector<EdgeSpec> edges;
    for (int j = 0; j < p; ++j) edges.emplace_back(PotentialFn::zero(M), std::vector<Real>{}, 0);
    return GraphSpec(std::move(edges));
}

// the worked p=4 shape: one singleton frozen set, one doubleton, two ordinary
GraphSpec worked_p4(std::mt19937& rng) {
    std::vector<EdgeSpec> edges;
    edges.emplace_back(testutil::random_trig_potential(rng), std::vector<Real>{1.1}, 0);
    edges.emplace_back(testutil::random_trig_potential(rng), std::vector<Real>{0.8, 2.3}, 0);
    edges.emplace_back(testutil::random_trig_potential(rng), std::vector<Real>{}, 0);
    edges.emplace_back(testutil::random_trig_potential(rng), std::vector<Real>{}, 0);
    return GraphSpec(std::move(edges));
}

Real rel_diff(Complex a, Complex b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), Real(1e-30)});
}

}  // namespace

TEST_CASE("free graphs have the product closed form", "[graph]") {
    {
        const GraphSpec g = free_graph(3);
        const Real rho = 1.7;
        const Real want = 3.0 * std::cos(rho * kPi) * std::pow(std::sin(rho * kPi) / rho, 2);
        CHECK(graph_charfn(g, Complex(rho * rho, 0)).real() == Approx(want).margin(1e-12));
    }
    {
        const GraphSpec g = free_graph(2);
        CHECK(std::abs(graph_charfn(g, Complex(0.25, 0))) < 1e-12);
        const Real rho = 0.77;
        CHECK(graph_charfn_recursive(g, Complex(rho * rho, 0)).real() ==
              Approx(std::sin(2 * rho * kPi) / rho).margin(1e-12));
    }
}

TEST_CASE("recursion agrees with the product formula", "[graph]") {
    std::mt19937 rng(101);
    std::uniform_real_distribution<Real> lam(0.1, 50.0);
    for (int inst = 0; inst < 4; ++inst) {
        const GraphSpec g = testutil::random_graph(rng, 2 + inst % 3, 3, 0.4, 512);
        for (int t = 0; t < 25; ++t) {
            const Complex lambda(lam(rng), 0);
            const Complex a = graph_charfn(g, lambda);
            const Complex b = graph_charfn_recursive(g, lambda);
            CHECK(rel_diff(a, b) < 1e-11);
        }
    }
}

TEST_CASE("full determinant agrees on the worked p=4 shape", "[graph]") {
    std::mt19937 rng(55);
    const GraphSpec g = worked_p4(rng);
    std::uniform_real_distribution<Real> lam(0.1, 50.0);
    for (int t = 0; t < 12; ++t) {
        const Complex lambda(lam(rng), 0);
        const Complex prod = graph_charfn(g, lambda);
        const Complex det = graph_charfn_determinant(g, lambda);
        CHECK(rel_diff(prod, det) < 1e-9);
    }
    // sum-of-products expansion, formed term by term from the edge values
    const Complex lambda(7.31, 0);
    std::vector<EdgeCharValues> vals;
    for (const EdgeSpec& e : g.edges) vals.push_back(edge_charfn_values(e, lambda));
    Complex sum = 0;
    for (int k = 0; k < 4; ++k) {
        Complex term = vals[k].deriv_pi;
        for (int j = 0; j < 4; ++j)
            if (j != k) term *= vals[j].value_pi;
        sum += term;
    }
    CHECK(rel_diff(sum, graph_charfn(g, lambda)) < 1e-12);
}

TEST_CASE("free determinant closed form", "[graph]") {
    for (int p : {2, 3, 5}) {
        const GraphSpec g = free_graph(p, 256);
        const Real rho = 1.31;
        const Real want =
            p * std::cos(rho * kPi) * std::pow(std::sin(rho * kPi) / rho, p - 1);
        CHECK(graph_charfn_determinant(g, Complex(rho * rho, 0)).real() ==
              Approx(want).margin(1e-10));
    }
}

TEST_CASE("block determinant with a plain last row is the product of edge values",
          "[graph]") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<Real> lam(0.1, 40.0);
    for (int inst = 0; inst < 4; ++inst) {
        const GraphSpec g = testutil::random_graph(rng, 2 + inst, 3, 0.4, 512);
        for (int t = 0; t < 6; ++t) {
            const Complex lambda(lam(rng), 0);
            Complex prod = 1;
            for (const EdgeSpec& e : g.edges) prod *= edge_charfn_values(e, lambda).value_pi;
            const Complex det = block_product_determinant(g, lambda);
            CHECK(rel_diff(prod, det) < 1e-10);
        }
    }
}

TEST_CASE("triple agreement on random instances", "[graph]") {
    std::mt19937 rng(202);
    std::uniform_real_distribution<Real> lam(0.1, 50.0);
    for (int p : {2, 3, 4, 5}) {
        const GraphSpec g = testutil::random_graph(rng, p, 3, 0.4, 512);
        for (int t = 0; t < 8; ++t) {
            const Complex lambda(lam(rng), 0);
            const Complex a = graph_charfn(g, lambda);
            const Complex b = graph_charfn_recursive(g, lambda);
            const Complex c = graph_charfn_determinant(g, lambda);
            CHECK(rel_diff(a, b) < 1e-9);
            CHECK(rel_diff(a, c) < 1e-9);
        }
    }
}

TEST_CASE("permuting the first p-1 edges leaves the value unchanged", "[graph]") {
    std::mt19937 rng(303);
    const GraphSpec g = testutil::random_graph(rng, 4, 2, 0.4, 512);
    std::vector<EdgeSpec> perm = {g.edges[2], g.edges[0], g.edges[1], g.edges[3]};
    const GraphSpec gp(std::move(perm));
    std::uniform_real_distribution<Real> lam(0.1, 40.0);
    for (int t = 0; t < 20; ++t) {
        const Complex lambda(lam(rng), 0);
        CHECK(rel_diff(graph_charfn(g, lambda), graph_charfn(gp, lambda)) < 1e-11);
    }
}

TEST_CASE("graph characteristic function approaches the free leading term", "[graph]") {
    // one ordinary edge with nonzero mean keeps the next-order term alive
    std::vector<EdgeSpec> edges;
    edges.emplace_back(PotentialFn::constant(1.0, 2048), std::vector<Real>{}, 0);
    edges.emplace_back(PotentialFn::constant(0.5, 2048), std::vector<Real>{1.2}, 0);
    const GraphSpec g(std::move(edges));
    const int p = 2;
    std::vector<Real> lx, ly;
    for (int bin = 15; bin < 60; bin += 3) {
        Real m = 0;
        for (int i = 0; i < 10; ++i) {
            const Real rho = bin + 0.3 * i;
            const Real lead =
                p * std::cos(rho * kPi) * std::pow(std::sin(rho * kPi) / rho, p - 1);
            const Real val = graph_charfn(g, Complex(rho * rho, 0)).real();
            m = std::max(m, std::abs(val - lead));
        }
        lx.push_back(std::log(bin + 1.5));
        ly.push_back(std::log(m));
    }
    Real sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(lx.size());
    for (int i = 0; i < n; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const Real slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope <= -p + 0.4);
}

TEST_CASE("sample helper carries both evaluation routes", "[graph]") {
    std::mt19937 rng(505);
    const GraphSpec g = testutil::random_graph(rng, 3, 2, 0.3, 512);
    const GraphCharSample s = graph_charfn_sample(g, Complex(7.7, 0), true);
    REQUIRE(s.value_determinant.has_value());
    CHECK(rel_diff(s.value_product, *s.value_determinant) < 1e-9);
    const GraphCharSample lean = graph_charfn_sample(g, Complex(7.7, 0));
    CHECK_FALSE(lean.value_determinant.has_value());
    CHECK(lean.value_product == s.value_product);
}

TEST_CASE("real on the real axis", "[graph]") {
    std::mt19937 rng(404);
    const GraphSpec g = testutil::random_graph(rng, 3, 3, 0.4, 512);
    for (Real lambda : {0.2, 3.0, 27.0, 400.0})
        CHECK(std::abs(graph_charfn(g, Complex(lambda, 0)).imag()) < 1e-12);
}

TEST_CASE("oversized block assembly is refused", "[graph]") {
    std::vector<Real> many;
    for (int i = 1; i <= 40; ++i) many.push_back(0.07 * i);
    std::vector<EdgeSpec> edges;
    edges.emplace_back(PotentialFn::zero(64), many, 0);
    edges.emplace_back(PotentialFn::zero(64), many, 0);
    const GraphSpec g(std::move(edges));
    CHECK_THROWS_AS(graph_charfn_determinant(g, Complex(1.0, 0)), NumericError);
}
