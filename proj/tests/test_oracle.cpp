#include <doctest.h>

#include <vector>

#include "peg/datagen.hpp"
#include "peg/oracle.hpp"
#include "support.hpp"

using namespace peg;
using testsupport::anchor_pgd;
using testsupport::tiny_pgd;

namespace {

// Reference implementation of the reference implementation: scores every
// injective mapping with no pruning at all.
std::vector<Match> all_mappings_filtered(const EntityGraph& g, const QueryGraph& q,
                                         double alpha) {
    std::vector<Match> out;
    auto bq = bind_query(q, g);
    if (!bq)
        return out;
    std::vector<NodeId> mapping(q.nodes.size());
    std::vector<uint8_t> used(g.nodes.size(), 0);
    auto walk = [&](auto&& self, size_t i) -> void {
        if (i == mapping.size()) {
            Match m = match_probability(g, *bq, mapping);
            if (m.probability >= alpha && m.probability > 0.0)
                out.push_back(std::move(m));
            return;
        }
        for (NodeId v = 0; v < g.nodes.size(); ++v) {
            if (used[v])
                continue;
            used[v] = 1;
            mapping[i] = v;
            self(self, i + 1);
            used[v] = 0;
        }
    };
    walk(walk, 0);
    sort_matches(g, out);
    return out;
}

bool same_matches(const std::vector<Match>& a, const std::vector<Match>& b) {
    if (a.size() != b.size())
        return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].mapping != b[i].mapping)
            return false;
        if (a[i].probability != doctest::Approx(b[i].probability).epsilon(1e-12))
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("anchor query: one match at low threshold, none at 0.25") {
    EntityGraph g = build_entity_graph(anchor_pgd());
    QueryGraph q;
    q.nodes = {{"q0", "r"}, {"q1", "a"}, {"q2", "i"}};
    q.edges = {{0, 1}, {1, 2}};
    q.alpha = 0.05;

    auto low = oracle_subgraph_match(g, q, 0.05);
    REQUIRE(low.size() == 1);
    CHECK(g.nodes[low[0].mapping[0]].id == "r3");
    CHECK(g.nodes[low[0].mapping[1]].id == "r2");
    CHECK(g.nodes[low[0].mapping[2]].id == "r4");
    CHECK(low[0].probability == doctest::Approx(0.1).epsilon(1e-9));

    // The merged assignment (s34, r2, r4) reuses r4 and scores 0.
    auto cut = oracle_subgraph_match(g, q, 0.25);
    CHECK(cut.empty());
}

TEST_CASE("oracle equals the unpruned exhaustive filter") {
    for (uint64_t seed = 0; seed < 30; ++seed) {
        bool corr = seed % 2 == 1;
        Pgd pgd = tiny_pgd(seed, corr);
        EntityGraph g = build_entity_graph(pgd);
        QueryGraph q = testsupport::tiny_query(seed, pgd.labels);
        for (double alpha : {1e-9, 0.05, 0.3, 0.7}) {
            auto got = oracle_subgraph_match(g, q, alpha);
            auto want = all_mappings_filtered(g, q, alpha);
            CAPTURE(seed);
            CAPTURE(alpha);
            CHECK(same_matches(got, want));
        }
    }
}

TEST_CASE("results are sorted by probability then mapped ids") {
    for (uint64_t seed = 0; seed < 12; ++seed) {
        Pgd pgd = tiny_pgd(seed, false);
        EntityGraph g = build_entity_graph(pgd);
        QueryGraph q = generate_query(3, 2, pgd.labels, 0.5, seed);
        auto ms = oracle_subgraph_match(g, q, 0.01);
        for (size_t i = 1; i < ms.size(); ++i) {
            CHECK(ms[i - 1].probability >= ms[i].probability);
            if (ms[i - 1].probability == ms[i].probability) {
                std::vector<std::string> a, b;
                for (NodeId v : ms[i - 1].mapping)
                    a.push_back(g.nodes[v].id);
                for (NodeId v : ms[i].mapping)
                    b.push_back(g.nodes[v].id);
                CHECK(a <= b);
            }
        }
        for (const Match& m : ms) {
            CHECK(m.probability > 0.0);
            CHECK(m.probability <= 1.0 + 1e-12);
            CHECK(m.probability ==
                  doctest::Approx(m.pr_le * m.pr_n).epsilon(1e-12));
        }
    }
}

TEST_CASE("unknown query label yields an empty answer") {
    EntityGraph g = build_entity_graph(anchor_pgd());
    QueryGraph q;
    q.nodes = {{"q0", "zzz"}};
    q.alpha = 0.5;
    CHECK(oracle_subgraph_match(g, q, 0.3).empty());
}
