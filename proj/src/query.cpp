#include "peg/query.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace peg {

void check_query(const QueryGraph& q) {
    if (q.nodes.empty())
        throw Error("query has no nodes");
    if (!(q.alpha > 0.0) || q.alpha > 1.0)
        throw Error("query alpha must lie in (0, 1]");
    std::unordered_set<std::string> ids;
    for (const auto& n : q.nodes)
        if (!ids.insert(n.id).second)
            throw Error("query node id '" + n.id + "' declared twice");
    std::set<std::pair<uint32_t, uint32_t>> seen;
    for (auto [u, v] : q.edges) {
        if (u >= q.nodes.size() || v >= q.nodes.size())
            throw Error("query edge names an undeclared node");
        if (u == v)
            throw Error("query edge (" + q.nodes[u].id + ", " + q.nodes[u].id + ") is a self loop");
        if (!seen.insert({std::min(u, v), std::max(u, v)}).second)
            throw Error("query edge (" + q.nodes[u].id + ", " + q.nodes[v].id + ") declared twice");
    }
    // Connectivity.
    std::vector<std::vector<uint32_t>> adj(q.nodes.size());
    for (auto [u, v] : q.edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<uint8_t> vis(q.nodes.size(), 0);
    std::vector<uint32_t> stack{0};
    vis[0] = 1;
    size_t reached = 1;
    while (!stack.empty()) {
        uint32_t x = stack.back();
        stack.pop_back();
        for (uint32_t y : adj[x])
            if (!vis[y]) {
                vis[y] = 1;
                ++reached;
                stack.push_back(y);
            }
    }
    if (reached != q.nodes.size())
        throw Error("query graph is not connected");
}

bool BoundQuery::has_edge(uint32_t a, uint32_t b) const {
    return edge_index(a, b).has_value();
}

std::optional<uint32_t> BoundQuery::edge_index(uint32_t a, uint32_t b) const {
    for (size_t i = 0; i < adj[a].size(); ++i)
        if (adj[a][i] == b)
            return adj_edge[a][i];
    return std::nullopt;
}

std::optional<BoundQuery> bind_query(const QueryGraph& q, const EntityGraph& g) {
    check_query(q);
    BoundQuery bq;
    bq.q = &q;
    bq.alpha = q.alpha;
    bq.label.reserve(q.nodes.size());
    for (const auto& n : q.nodes) {
        auto l = g.label_by_name(n.label);
        if (!l)
            return std::nullopt;
        bq.label.push_back(*l);
    }
    bq.adj.assign(q.nodes.size(), {});
    bq.adj_edge.assign(q.nodes.size(), {});
    for (size_t e = 0; e < q.edges.size(); ++e) {
        auto [u, v] = q.edges[e];
        bq.adj[u].push_back(v);
        bq.adj_edge[u].push_back(static_cast<uint32_t>(e));
        bq.adj[v].push_back(u);
        bq.adj_edge[v].push_back(static_cast<uint32_t>(e));
    }
    // Sorted adjacency keeps traversal orders independent of edge input
    // order.
    for (size_t n = 0; n < q.nodes.size(); ++n) {
        std::vector<std::pair<uint32_t, uint32_t>> tmp(bq.adj[n].size());
        for (size_t i = 0; i < tmp.size(); ++i)
            tmp[i] = {bq.adj[n][i], bq.adj_edge[n][i]};
        std::sort(tmp.begin(), tmp.end());
        for (size_t i = 0; i < tmp.size(); ++i) {
            bq.adj[n][i] = tmp[i].first;
            bq.adj_edge[n][i] = tmp[i].second;
        }
    }
    return bq;
}

Match match_probability(const EntityGraph& g, const BoundQuery& bq,
                        const std::vector<NodeId>& mapping) {
    Match m;
    m.mapping = mapping;
    if (mapping.size() != bq.size())
        throw Error("match_probability: mapping arity mismatch");

    // Reference-disjointness across all mapped entities (this also rejects
    // repeated entities).
    std::vector<RefId> used;
    for (NodeId v : mapping)
        for (RefId r : g.nodes[v].refs)
            used.push_back(r);
    std::sort(used.begin(), used.end());
    if (std::adjacent_find(used.begin(), used.end()) != used.end()) {
        m.pr_le = m.pr_n = m.probability = 0.0;
        return m;
    }

    std::vector<double> factors;
    factors.reserve(mapping.size() + bq.q->edges.size());
    for (size_t i = 0; i < mapping.size(); ++i)
        factors.push_back(g.nodes[mapping[i]].label_dist[bq.label[i]]);
    for (auto [u, v] : bq.q->edges) {
        auto e = g.edge_index_between(mapping[u], mapping[v]);
        if (!e) {
            factors.push_back(0.0);
            break;
        }
        factors.push_back(g.edge_pr(*e, mapping[u], bq.label[u], bq.label[v]));
    }
    m.pr_le = product_of(factors);
    m.pr_n = node_existence_marginal(g, mapping);
    m.probability = m.pr_le * m.pr_n;
    return m;
}

void sort_matches(const EntityGraph& g, std::vector<Match>& ms) {
    std::sort(ms.begin(), ms.end(), [&g](const Match& a, const Match& b) {
        if (a.probability != b.probability)
            return a.probability > b.probability;
        for (size_t i = 0; i < a.mapping.size(); ++i) {
            if (a.mapping[i] != b.mapping[i])
                return g.nodes[a.mapping[i]].id < g.nodes[b.mapping[i]].id;
        }
        return false;
    });
}

}  // namespace peg
