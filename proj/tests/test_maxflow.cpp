#include "doctest.h"

#include "blockctm/error.hpp"
#include "blockctm/maxflow.hpp"
#include "support.hpp"

using namespace blockctm;
using namespace blockctm::graphcut;

TEST_CASE("four-node hand graph") {
    // s->a:3, s->b:2, a->b:1, a->t:2, b->t:3
    FlowGraph g(2);
    g.add_terminal(0, 3, 2);
    g.add_terminal(1, 2, 3);
    g.add_edge(0, 1, 1);
    const FlowResult r = max_flow_min_cut(g);
    CHECK(r.flow_value == 5.0);
    CHECK(g.cut_capacity(r.side) == 5.0);
    const std::vector<oracle::Arc> arcs{{0, 1, 3}, {0, 2, 2}, {1, 2, 1}, {1, 3, 2}, {2, 3, 3}};
    CHECK(oracle::min_cut_enumerated(4, arcs) == 5.0);
    CHECK(oracle::edmonds_karp(4, arcs) == 5.0);
}

TEST_CASE("zero-capacity graph puts every node on the sink side") {
    FlowGraph g(4);
    g.add_terminal(0, 0, 0);
    const FlowResult r = max_flow_min_cut(g);
    CHECK(r.flow_value == 0.0);
    for (Side s : r.side) CHECK(s == Side::Sink);
}

TEST_CASE("random 3x3 lattices equal the exhaustive minimum exactly") {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        testing::LatticeCase c = testing::random_lattice(rng);
        const FlowResult r = max_flow_min_cut(c.graph);
        const double best = oracle::min_cut_enumerated(11, c.arcs);
        CHECK(r.flow_value == best);
        CHECK(c.graph.cut_capacity(r.side) == best);
    }
}

TEST_CASE("random real-valued graphs agree with Edmonds-Karp") {
    Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(25));
        FlowGraph g(n);
        std::vector<oracle::Arc> arcs;
        for (int v = 0; v < n; ++v) {
            const double s = rng.uniform() < 0.4 ? rng.uniform(0, 5) : 0.0;
            const double t = rng.uniform() < 0.4 ? rng.uniform(0, 5) : 0.0;
            g.add_terminal(v, s, t);
            arcs.push_back({0, v + 1, s});
            arcs.push_back({v + 1, n + 1, t});
        }
        const int m = static_cast<int>(rng.below(4 * n));
        for (int e = 0; e < m; ++e) {
            const int a = static_cast<int>(rng.below(n));
            int b = static_cast<int>(rng.below(n));
            if (a == b) continue;
            const double cap = rng.uniform(0, 3);
            const double rev = rng.uniform() < 0.5 ? rng.uniform(0, 3) : 0.0;
            g.add_edge(a, b, cap, rev);
            arcs.push_back({a + 1, b + 1, cap});
            arcs.push_back({b + 1, a + 1, rev});
        }
        const FlowResult r = max_flow_min_cut(g);
        const double ek = oracle::edmonds_karp(n + 2, arcs);
        CHECK(r.flow_value == doctest::Approx(ek).epsilon(1e-9));
        CHECK(g.cut_capacity(r.side) == doctest::Approx(r.flow_value).epsilon(1e-9));
    }
}

TEST_CASE("max flow is deterministic") {
    Rng a(9), b(9);
    testing::LatticeCase x = testing::random_lattice(a);
    testing::LatticeCase y = testing::random_lattice(b);
    const FlowResult rx = max_flow_min_cut(x.graph);
    const FlowResult ry = max_flow_min_cut(y.graph);
    CHECK(rx.flow_value == ry.flow_value);
    CHECK(rx.side == ry.side);
}

TEST_CASE("invalid capacities are rejected") {
    FlowGraph g(2);
    CHECK_THROWS_AS(g.add_edge(0, 1, -1.0), PreconditionError);
    CHECK_THROWS_AS(g.add_terminal(0, std::numeric_limits<double>::infinity(), 0), PreconditionError);
    CHECK_THROWS(g.add_edge(0, 0, 1.0));
    CHECK_THROWS(g.add_edge(0, 5, 1.0));
}
