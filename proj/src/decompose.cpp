#include "peg/decompose.hpp"

#include <algorithm>

#include "peg/common.hpp"

namespace peg {

namespace {

// Candidate counts of 0 would make every efficiency ratio infinite; the
// floor keeps the greedy ranking finite while still preferring such paths.
constexpr double kCostFloor = 1e-12;

// All simple paths of length 1..maxlen, one orientation each (smaller
// endpoint first). Enumeration order is deterministic.
std::vector<QPath> enumerate_paths(const BoundQuery& bq, size_t maxlen) {
    std::vector<QPath> pool;
    size_t n = bq.size();
    std::vector<uint32_t> cur;
    std::vector<uint8_t> used(n, 0);
    auto dfs = [&](auto&& self) -> void {
        uint32_t tail = cur.back();
        if (cur.size() >= 2 && cur.front() < tail)
            pool.push_back({cur});
        if (cur.size() > maxlen)
            return;
        for (uint32_t w : bq.adj[tail]) {
            if (used[w])
                continue;
            used[w] = 1;
            cur.push_back(w);
            self(self);
            cur.pop_back();
            used[w] = 0;
        }
    };
    for (uint32_t v = 0; v < n; ++v) {
        used[v] = 1;
        cur.assign(1, v);
        dfs(dfs);
        used[v] = 0;
    }
    return pool;
}

}  // namespace

QueryStats compute_query_stats(const BoundQuery& bq, size_t nlabels) {
    QueryStats st;
    st.nlabels = nlabels;
    st.c.assign(bq.size() * nlabels, 0);
    for (uint32_t n = 0; n < bq.size(); ++n)
        for (uint32_t w : bq.adj[n])
            ++st.c[n * nlabels + bq.label[w]];
    return st;
}

PathContext compute_path_context(const BoundQuery& bq, const QPath& path) {
    PathContext ctx;
    size_t plen = path.nodes.size() - 1;
    std::vector<uint32_t> pos(bq.size(), kInvalidId);
    for (uint32_t p = 0; p <= plen; ++p)
        pos[path.nodes[p]] = p;

    ctx.cyc.assign(plen + 1, {});
    uint32_t degsum = 0;
    uint32_t inner_edges = 0;
    for (uint32_t p = 0; p <= plen; ++p) {
        uint32_t n = path.nodes[p];
        degsum += static_cast<uint32_t>(bq.adj[n].size());
        for (uint32_t w : bq.adj[n]) {
            uint32_t q = pos[w];
            if (q == kInvalidId)
                continue;
            if (q > p) {
                ++inner_edges;
                if (q != p + 1)
                    ctx.cyc[p].push_back(q);
            }
        }
    }
    ctx.degree = degsum - 2 * static_cast<uint32_t>(plen);

    size_t m = plen + 1;
    ctx.density = m > 1 ? 2.0 * inner_edges / (static_cast<double>(m) * (m - 1)) : 1.0;

    for (uint32_t w = 0; w < bq.size(); ++w) {
        if (pos[w] != kInvalidId)
            continue;
        std::vector<uint32_t> rv;
        for (uint32_t nb : bq.adj[w])
            if (pos[nb] != kInvalidId)
                rv.push_back(pos[nb]);
        if (rv.empty())
            continue;
        std::sort(rv.begin(), rv.end());
        ctx.gamma_nodes.push_back(w);
        ctx.rv.push_back(std::move(rv));
    }
    return ctx;
}

double path_cost(const BoundQuery& bq, const Histogram& h, const QPath& path, double alpha) {
    LabelSeq seq(path.nodes.size());
    for (size_t i = 0; i < path.nodes.size(); ++i)
        seq[i] = bq.label[path.nodes[i]];
    double est = estimate_count(h, seq, alpha);
    PathContext ctx = compute_path_context(bq, path);
    double c = est / (std::max<uint32_t>(ctx.degree, 1) * ctx.density);
    return std::max(c, kCostFloor);
}

Decomposition decompose_query(const BoundQuery& bq, const Histogram& h, size_t L,
                              double alpha) {
    Decomposition d;
    size_t nedges = bq.q->edges.size();

    if (nedges == 0) {
        // Single-node query: one length-0 path carries the node.
        QPath p{{0}};
        d.cost.push_back(path_cost(bq, h, p, alpha));
        d.paths.push_back(std::move(p));
        d.ss0 = d.cost[0];
        d.cv.push_back({0});
        d.ce.push_back({});
        d.partners.push_back({});
        return d;
    }

    size_t maxlen = std::min(L, bq.size() - 1);
    std::vector<QPath> pool = enumerate_paths(bq, maxlen);
    std::vector<double> pool_cost(pool.size());
    for (size_t i = 0; i < pool.size(); ++i)
        pool_cost[i] = path_cost(bq, h, pool[i], alpha);

    std::vector<uint8_t> edge_covered(nedges, 0);
    size_t covered = 0;
    auto new_edges = [&](const QPath& p) {
        uint32_t cnt = 0;
        for (size_t i = 0; i + 1 < p.nodes.size(); ++i) {
            uint32_t e = *bq.edge_index(p.nodes[i], p.nodes[i + 1]);
            if (!edge_covered[e])
                ++cnt;
        }
        return cnt;
    };

    std::vector<size_t> picked;
    while (covered < nedges) {
        size_t best = pool.size();
        uint32_t best_new = 0;
        double best_eff = -1.0;
        for (size_t i = 0; i < pool.size(); ++i) {
            uint32_t ne = new_edges(pool[i]);
            if (ne == 0)
                continue;
            double eff = ne / pool_cost[i];
            bool better =
                best == pool.size() || eff > best_eff ||
                (eff == best_eff &&
                 (ne > best_new || (ne == best_new && pool_cost[i] < pool_cost[best])));
            if (better) {
                best = i;
                best_new = ne;
                best_eff = eff;
            }
        }
        if (best == pool.size())
            throw Error("decompose_query: could not cover all query edges");
        picked.push_back(best);
        for (size_t i = 0; i + 1 < pool[best].nodes.size(); ++i) {
            uint32_t e = *bq.edge_index(pool[best].nodes[i], pool[best].nodes[i + 1]);
            if (!edge_covered[e]) {
                edge_covered[e] = 1;
                ++covered;
            }
        }
    }

    // First covering path owns each node's label factor and each path
    // step's edge factor; later paths reuse them only as join structure.
    std::vector<uint8_t> node_owned(bq.size(), 0);
    std::vector<uint8_t> edge_owned(nedges, 0);
    d.ss0 = 1.0;
    for (size_t pi : picked) {
        const QPath& p = pool[pi];
        std::vector<uint32_t> cv, ce;
        for (uint32_t n : p.nodes) {
            if (!node_owned[n]) {
                node_owned[n] = 1;
                cv.push_back(n);
            }
        }
        for (size_t i = 0; i + 1 < p.nodes.size(); ++i) {
            uint32_t e = *bq.edge_index(p.nodes[i], p.nodes[i + 1]);
            if (!edge_owned[e]) {
                edge_owned[e] = 1;
                ce.push_back(e);
            }
        }
        d.paths.push_back(p);
        d.cost.push_back(pool_cost[pi]);
        d.ss0 *= pool_cost[pi];
        d.cv.push_back(std::move(cv));
        d.ce.push_back(std::move(ce));
    }

    // One join predicate per partition pair per shared query node.
    size_t k = d.paths.size();
    d.partners.assign(k, {});
    for (uint32_t a = 0; a < k; ++a) {
        for (uint32_t b = a + 1; b < k; ++b) {
            Decomposition::JoinPair jp;
            jp.a = a;
            jp.b = b;
            for (uint32_t pa = 0; pa < d.paths[a].nodes.size(); ++pa) {
                uint32_t n = d.paths[a].nodes[pa];
                for (uint32_t pb = 0; pb < d.paths[b].nodes.size(); ++pb)
                    if (d.paths[b].nodes[pb] == n)
                        jp.positions.emplace_back(pa, pb);
            }
            if (jp.positions.empty())
                continue;
            d.partners[a].push_back(b);
            d.partners[b].push_back(a);
            d.joins.push_back(std::move(jp));
        }
    }
    return d;
}

std::vector<uint32_t> join_order(const Decomposition& d) {
    size_t k = d.paths.size();
    std::vector<uint32_t> order;
    std::vector<uint8_t> chosen(k, 0);
    std::vector<uint8_t> node_in(0);

    uint32_t first = 0;
    for (uint32_t i = 1; i < k; ++i)
        if (d.cost[i] < d.cost[first])
            first = i;
    order.push_back(first);
    chosen[first] = 1;

    size_t nq = 0;
    for (const QPath& p : d.paths)
        for (uint32_t n : p.nodes)
            nq = std::max(nq, static_cast<size_t>(n) + 1);
    node_in.assign(nq, 0);
    for (uint32_t n : d.paths[first].nodes)
        node_in[n] = 1;

    auto preds_to_chosen = [&](uint32_t i) {
        size_t c = 0;
        for (const auto& jp : d.joins)
            if ((jp.a == i && chosen[jp.b]) || (jp.b == i && chosen[jp.a]))
                c += jp.positions.size();
        return c;
    };

    while (order.size() < k) {
        uint32_t best = kInvalidId;
        size_t best_shared = 0, best_preds = 0;
        for (uint32_t i = 0; i < k; ++i) {
            if (chosen[i])
                continue;
            size_t shared = 0;
            for (uint32_t n : d.paths[i].nodes)
                shared += node_in[n];
            size_t preds = preds_to_chosen(i);
            bool better =
                best == kInvalidId || shared > best_shared ||
                (shared == best_shared &&
                 (preds > best_preds ||
                  (preds == best_preds && d.cost[i] < d.cost[best])));
            if (better) {
                best = i;
                best_shared = shared;
                best_preds = preds;
            }
        }
        if (best_shared == 0)
            throw Error("join_order: partitions do not connect");
        order.push_back(best);
        chosen[best] = 1;
        for (uint32_t n : d.paths[best].nodes)
            node_in[n] = 1;
    }
    return order;
}

}  // namespace peg
