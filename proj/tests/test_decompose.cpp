#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "peg/decompose.hpp"
#include "peg/histogram.hpp"
#include "peg/path_index.hpp"
#include "support.hpp"

using namespace peg;
using testsupport::tiny_pgd;
using testsupport::tiny_query;

namespace {

// A graph whose single entity per label makes any query bindable; the
// decomposition itself only looks at the query structure.
EntityGraph label_universe() {
    Pgd p;
    p.labels = {"a", "b", "c"};
    p.references.push_back({"r0", {{"a", 1.0}}});
    p.references.push_back({"r1", {{"b", 1.0}}});
    p.references.push_back({"r2", {{"c", 1.0}}});
    return build_entity_graph(p);
}

Histogram empty_hist() {
    Histogram h;
    h.points = default_histogram_points();
    return h;
}

QueryGraph path_with_spur() {
    // q0 - q1 - q2 - q3 in a line, q4 attached to q1 and q2.
    QueryGraph q;
    q.nodes = {{"q0", "a"}, {"q1", "b"}, {"q2", "a"}, {"q3", "b"}, {"q4", "c"}};
    q.edges = {{0, 1}, {1, 2}, {2, 3}, {1, 4}, {2, 4}};
    q.alpha = 0.5;
    return q;
}

}  // namespace

TEST_CASE("path context: off-path neighbor positions") {
    EntityGraph g = label_universe();
    QueryGraph q = path_with_spur();
    auto bq = bind_query(q, g);
    REQUIRE(bq);
    PathContext ctx = compute_path_context(*bq, QPath{{0, 1, 2, 3}});
    REQUIRE(ctx.gamma_nodes == std::vector<uint32_t>{4});
    REQUIRE(ctx.rv.size() == 1);
    CHECK(ctx.rv[0] == std::vector<uint32_t>({1, 2}));
    for (const auto& c : ctx.cyc)
        CHECK(c.empty());
    // Degrees 1, 3, 3, 1 minus two per step leaves 2 outward stubs.
    CHECK(ctx.degree == 2);
    // 3 query edges among 4 path nodes.
    CHECK(ctx.density == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("path context: chords are cycle predicates at the lower position") {
    EntityGraph g = label_universe();
    QueryGraph q;
    q.nodes = {{"q0", "a"}, {"q1", "b"}, {"q2", "c"}};
    q.edges = {{0, 1}, {0, 2}, {1, 2}};
    q.alpha = 0.5;
    auto bq = bind_query(q, g);
    REQUIRE(bq);
    PathContext ctx = compute_path_context(*bq, QPath{{0, 1, 2}});
    CHECK(ctx.gamma_nodes.empty());
    REQUIRE(ctx.cyc.size() == 3);
    CHECK(ctx.cyc[0] == std::vector<uint32_t>{2});  // chord q0 - q2
    CHECK(ctx.cyc[1].empty());
    CHECK(ctx.cyc[2].empty());
    CHECK(ctx.density == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ctx.degree == 2);
}

TEST_CASE("single-node query decomposes to one trivial path") {
    EntityGraph g = label_universe();
    QueryGraph q;
    q.nodes = {{"q0", "a"}};
    q.alpha = 0.5;
    auto bq = bind_query(q, g);
    REQUIRE(bq);
    Decomposition d = decompose_query(*bq, empty_hist(), 3, 0.5);
    REQUIRE(d.paths.size() == 1);
    CHECK(d.paths[0].nodes == std::vector<uint32_t>{0});
    CHECK(d.cv == std::vector<std::vector<uint32_t>>{{0}});
    CHECK(d.ce[0].empty());
    CHECK(d.joins.empty());
    CHECK(join_order(d) == std::vector<uint32_t>{0});
}

TEST_CASE("cover is a partition of nodes and edges") {
    for (uint64_t seed = 0; seed < 60; ++seed) {
        Pgd pgd = tiny_pgd(seed, false);
        EntityGraph g = build_entity_graph(pgd);
        QueryGraph q = tiny_query(seed, pgd.labels);
        auto bq = bind_query(q, g);
        REQUIRE(bq);
        for (size_t L : {1, 3}) {
            Decomposition d = decompose_query(*bq, empty_hist(), L, 0.5);
            CAPTURE(seed);
            CAPTURE(L);

            std::set<uint32_t> nodes_seen, edges_seen;
            for (size_t i = 0; i < d.paths.size(); ++i) {
                const QPath& p = d.paths[i];
                CHECK(p.length() <= std::min(L, q.nodes.size() - 1));
                // Consecutive nodes are real query edges; the path is simple.
                std::set<uint32_t> uniq(p.nodes.begin(), p.nodes.end());
                CHECK(uniq.size() == p.nodes.size());
                for (size_t j = 0; j + 1 < p.nodes.size(); ++j)
                    CHECK(bq->has_edge(p.nodes[j], p.nodes[j + 1]));
                for (uint32_t n : d.cv[i])
                    CHECK(nodes_seen.insert(n).second);
                for (uint32_t e : d.ce[i])
                    CHECK(edges_seen.insert(e).second);
            }
            CHECK(nodes_seen.size() == q.nodes.size());
            CHECK(edges_seen.size() == q.edges.size());

            // Join predicates name genuinely shared nodes, symmetrically.
            for (const auto& jp : d.joins) {
                CHECK(jp.a < jp.b);
                CHECK(!jp.positions.empty());
                for (auto [pa, pb] : jp.positions)
                    CHECK(d.paths[jp.a].nodes[pa] == d.paths[jp.b].nodes[pb]);
                CHECK(std::count(d.partners[jp.a].begin(), d.partners[jp.a].end(), jp.b) == 1);
                CHECK(std::count(d.partners[jp.b].begin(), d.partners[jp.b].end(), jp.a) == 1);
            }

            // Join order visits every partition, each sharing a node with
            // an earlier one.
            std::vector<uint32_t> order = join_order(d);
            REQUIRE(order.size() == d.paths.size());
            std::set<uint32_t> placed_nodes;
            for (size_t oi = 0; oi < order.size(); ++oi) {
                const QPath& p = d.paths[order[oi]];
                if (oi > 0) {
                    bool shares = false;
                    for (uint32_t n : p.nodes)
                        shares |= placed_nodes.count(n) > 0;
                    CHECK(shares);
                }
                placed_nodes.insert(p.nodes.begin(), p.nodes.end());
            }
        }
    }
}

TEST_CASE("join order starts at the cheapest partition") {
    EntityGraph g = label_universe();
    QueryGraph q = path_with_spur();
    auto bq = bind_query(q, g);
    REQUIRE(bq);
    Decomposition d = decompose_query(*bq, empty_hist(), 2, 0.5);
    REQUIRE(d.paths.size() >= 2);
    std::vector<uint32_t> order = join_order(d);
    for (uint32_t i = 0; i < d.paths.size(); ++i)
        CHECK(d.cost[order[0]] <= d.cost[i]);
}

TEST_CASE("path cost follows the histogram estimate") {
    EntityGraph g = label_universe();
    QueryGraph q;
    q.nodes = {{"q0", "a"}, {"q1", "b"}};
    q.edges = {{0, 1}};
    q.alpha = 0.5;
    auto bq = bind_query(q, g);
    REQUIRE(bq);

    LabelId a = *g.label_by_name("a");
    LabelId b = *g.label_by_name("b");
    Histogram h;
    h.points = {0.5};
    LabelSeq seq = canonical_label_seq({a, b});
    h.counts[seq] = {40};

    // Two-node path: degree 0 -> divisor 1, density 1, cost = estimate.
    QPath p{{0, 1}};
    CHECK(path_cost(*bq, h, p, 0.5) == doctest::Approx(40.0).epsilon(1e-12));
    // Unknown sequences estimate 0 and cost bottoms out at the floor.
    Histogram none = empty_hist();
    CHECK(path_cost(*bq, none, p, 0.5) == doctest::Approx(1e-12).epsilon(1e-6));

    Decomposition d = decompose_query(*bq, h, 3, 0.5);
    CHECK(d.ss0 == doctest::Approx(40.0).epsilon(1e-12));
}

TEST_CASE("greedy prefers covering more edges per cost") {
    // Square q0-q1-q2-q3-q0: with L=3 a single 3-step path covers 3 edges
    // and one more partition covers the rest; L=1 needs all 4 singles.
    EntityGraph g = label_universe();
    QueryGraph q;
    q.nodes = {{"q0", "a"}, {"q1", "b"}, {"q2", "a"}, {"q3", "b"}};
    q.edges = {{0, 1}, {0, 3}, {1, 2}, {2, 3}};
    q.alpha = 0.5;
    auto bq = bind_query(q, g);
    REQUIRE(bq);
    Decomposition d3 = decompose_query(*bq, empty_hist(), 3, 0.5);
    CHECK(d3.paths.size() == 2);
    Decomposition d1 = decompose_query(*bq, empty_hist(), 1, 0.5);
    CHECK(d1.paths.size() == 4);
    for (const QPath& p : d1.paths)
        CHECK(p.length() == 1);
}
