#include "peg/oracle.hpp"

namespace peg {

namespace {

struct Backtracker {
    const EntityGraph& g;
    const BoundQuery& bq;
    double alpha;
    std::vector<Match>* out;
    std::vector<NodeId> mapping;
    std::vector<uint8_t> used;

    // Places query nodes in index order over every label-compatible entity.
    void place(size_t n) {
        if (n == bq.size()) {
            Match m = match_probability(g, bq, mapping);
            if (m.probability >= alpha && m.probability > 0.0)
                out->push_back(std::move(m));
            return;
        }
        for (NodeId v = 0; v < g.nodes.size(); ++v) {
            if (used[v])
                continue;
            if (g.nodes[v].label_dist[bq.label[n]] <= 0.0)
                continue;
            // Query edges to already placed nodes must exist in the graph.
            bool ok = true;
            for (uint32_t m : bq.adj[n]) {
                if (m < n && !g.edge_between(mapping[m], v)) {
                    ok = false;
                    break;
                }
            }
            if (!ok)
                continue;
            used[v] = 1;
            mapping[n] = v;
            place(n + 1);
            used[v] = 0;
        }
    }
};

}  // namespace

std::vector<Match> oracle_subgraph_match(const EntityGraph& g, const QueryGraph& q,
                                         double alpha) {
    auto bq = bind_query(q, g);
    std::vector<Match> out;
    if (!bq)
        return out;
    Backtracker bt{g, *bq, alpha, &out, {}, {}};
    bt.mapping.assign(bq->size(), 0);
    bt.used.assign(g.nodes.size(), 0);
    bt.place(0);
    sort_matches(g, out);
    return out;
}

}  // namespace peg
