#include "peg/engine.hpp"

#include <algorithm>
#include <chrono>

#include "peg/decompose.hpp"

namespace peg {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double count_product(const std::vector<size_t>& counts) {
    double p = 1.0;
    for (size_t c : counts)
        p *= static_cast<double>(c);
    return counts.empty() ? 0.0 : p;
}

// Probability of the partial match defined by the assigned query nodes:
// label factors, fully assigned query edges (which must exist), and the
// existence marginal. Sound against any completion.
double partial_probability(const EntityGraph& g, const BoundQuery& bq,
                           const std::vector<NodeId>& psi) {
    double pr = 1.0;
    std::vector<NodeId> uni;
    uni.reserve(bq.size());
    for (uint32_t n = 0; n < bq.size(); ++n) {
        if (psi[n] == kInvalidId)
            continue;
        uni.push_back(psi[n]);
        pr *= g.nodes[psi[n]].label_dist[bq.label[n]];
    }
    if (pr <= 0.0)
        return 0.0;
    for (size_t e = 0; e < bq.q->edges.size(); ++e) {
        auto [u, v] = bq.q->edges[e];
        if (psi[u] == kInvalidId || psi[v] == kInvalidId)
            continue;
        auto ei = g.edge_index_between(psi[u], psi[v]);
        if (!ei)
            return 0.0;
        pr *= g.edge_pr(*ei, psi[u], bq.label[u], bq.label[v]);
        if (pr <= 0.0)
            return 0.0;
    }
    return pr * node_existence_marginal(g, uni);
}

}  // namespace

std::vector<Match> enumerate_matches(const EntityGraph& g, const BoundQuery& bq,
                                     const Decomposition& d,
                                     const std::vector<CandidateSet>& cands,
                                     const KPartiteBuild& kb,
                                     const std::vector<uint32_t>& order, double alpha) {
    const KPartiteGraph& kpg = kb.kpg;
    size_t k = order.size();
    std::vector<Match> out;
    if (k == 0)
        return out;
    for (uint32_t p : order)
        if (kpg.alive_count(p) == 0)
            return out;

    std::vector<NodeId> psi(bq.size(), kInvalidId);
    std::vector<uint32_t> chosen(d.paths.size(), kInvalidId);
    std::vector<uint8_t> placed(d.paths.size(), 0);
    double at = alpha - kPruneSlack;

    // Vertex of the first placed partner, and p's slot in its link lists.
    auto driver_links = [&](uint32_t p) -> std::span<const uint32_t> {
        for (uint32_t j : kpg.partners[p]) {
            if (!placed[j])
                continue;
            size_t slot = static_cast<size_t>(
                std::lower_bound(kpg.partners[j].begin(), kpg.partners[j].end(), p) -
                kpg.partners[j].begin());
            return kpg.links[j][slot].of(chosen[j]);
        }
        throw Error("enumerate_matches: partition joins no placed partition");
    };

    std::vector<uint32_t> all0(kpg.part_size(order[0]));
    for (uint32_t v = 0; v < all0.size(); ++v)
        all0[v] = v;

    auto dfs = [&](auto&& self, size_t s) -> void {
        uint32_t p = order[s];
        std::span<const uint32_t> cand =
            s == 0 ? std::span<const uint32_t>(all0) : driver_links(p);
        const QPath& path = d.paths[p];
        for (uint32_t v : cand) {
            if (!kpg.alive[p][v])
                continue;
            const NodeId* rec = cands[p].rec(v);
            // Place the record, rejecting conflicts with the assignment so
            // far: shared nodes must agree, new entities must be
            // reference-disjoint from every assigned one.
            std::vector<uint32_t> fresh;
            bool ok = true;
            for (size_t pos = 0; pos <= cands[p].plen && ok; ++pos) {
                uint32_t qn = path.nodes[pos];
                NodeId ent = rec[pos];
                if (psi[qn] != kInvalidId) {
                    ok = psi[qn] == ent;
                    continue;
                }
                for (uint32_t m = 0; m < bq.size() && ok; ++m)
                    if (psi[m] != kInvalidId)
                        ok = g.refs_disjoint(psi[m], ent);
                if (ok) {
                    psi[qn] = ent;
                    fresh.push_back(qn);
                }
            }
            if (ok && partial_probability(g, bq, psi) >= at) {
                placed[p] = 1;
                chosen[p] = v;
                if (s + 1 == order.size()) {
                    Match m = match_probability(g, bq, psi);
                    // Final emission is exact: no slack, and a match always
                    // has positive probability.
                    if (m.probability >= alpha && m.probability > 0.0)
                        out.push_back(std::move(m));
                } else {
                    self(self, s + 1);
                }
                placed[p] = 0;
                chosen[p] = kInvalidId;
            }
            for (uint32_t qn : fresh)
                psi[qn] = kInvalidId;
        }
    };
    dfs(dfs, 0);
    return out;
}

QueryResult answer_query(const EntityGraph& g, const PathIndex& idx, const Histogram& h,
                         const ContextTable& ctx, const QueryGraph& q,
                         const EngineOptions& opts) {
    if (idx.fingerprint != g.fingerprint)
        throw Error("path index was built for a different graph");
    if (h.fingerprint != idx.fingerprint)
        throw Error("histogram was built for a different index");
    if (ctx.fingerprint != g.fingerprint)
        throw Error("context table was built for a different graph");

    Clock::time_point t0 = Clock::now();
    QueryResult res;
    auto bound = bind_query(q, g);
    if (!bound) {
        // A query label absent from the graph has an empty answer.
        res.stats.ms_total = ms_since(t0);
        return res;
    }
    BoundQuery& bq = *bound;
    double alpha = bq.alpha;

    Clock::time_point td = Clock::now();
    Decomposition d = decompose_query(bq, h, idx.L, alpha);
    res.stats.ms_decompose = ms_since(td);
    res.stats.ss0 = d.ss0;

    Clock::time_point tc = Clock::now();
    QueryStats qstats = compute_query_stats(bq, g.label_count());
    NodeCandidates nc = node_candidates(g, ctx, bq, qstats, alpha);

    size_t k = d.paths.size();
    std::vector<CandidateSet> cands(k);
    res.stats.path_counts.resize(k);
    res.stats.path_ctx_counts.resize(k);
    double a_look = std::max(alpha - kPruneSlack, kPruneSlack);
    for (size_t i = 0; i < k; ++i) {
        LabelSeq seq(d.paths[i].nodes.size());
        for (size_t j = 0; j < seq.size(); ++j)
            seq[j] = bq.label[d.paths[i].nodes[j]];
        LookupResult raw = index_lookup(idx, g, seq, a_look);
        // Palindromic sequences store one record per path; both node
        // orders are candidate assignments.
        bool both = seq.size() > 1 && label_seq_palindromic(seq);
        res.stats.path_counts[i] = raw.count * (both ? 2 : 1);
        PathContext pctx = compute_path_context(bq, d.paths[i]);
        cands[i] = path_candidates(g, ctx, bq, qstats, d.paths[i], pctx, raw, nc, alpha);
        res.stats.path_ctx_counts[i] = cands[i].size();
    }
    res.stats.path_size = count_product(res.stats.path_counts);
    res.stats.path_ctx_size = count_product(res.stats.path_ctx_counts);
    res.stats.ms_candidates = ms_since(tc);

    Clock::time_point tr = Clock::now();
    KPartiteBuild kb = build_kpartite(g, bq, d, cands, alpha);
    joint_reduce(kb.kpg, alpha, opts.threads);
    res.stats.final_counts.resize(k);
    for (size_t i = 0; i < k; ++i)
        res.stats.final_counts[i] = kb.kpg.alive_count(i);
    res.stats.final_size = count_product(res.stats.final_counts);
    res.stats.ms_reduce = ms_since(tr);

    Clock::time_point te = Clock::now();
    std::vector<uint32_t> order = join_order(d);
    res.matches = enumerate_matches(g, bq, d, cands, kb, order, alpha);
    sort_matches(g, res.matches);
    // Record tuples map to assignments bijectively, so duplicates should
    // not arise; drop any defensively.
    res.matches.erase(std::unique(res.matches.begin(), res.matches.end(),
                                  [](const Match& a, const Match& b) {
                                      return a.mapping == b.mapping;
                                  }),
                      res.matches.end());
    res.stats.ms_enumerate = ms_since(te);
    res.stats.ms_total = ms_since(t0);
    return res;
}

}  // namespace peg
