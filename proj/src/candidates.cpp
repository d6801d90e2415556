#include "peg/candidates.hpp"

#include <algorithm>
#include <array>

#include "peg/common.hpp"

namespace peg {

namespace {

constexpr size_t kMaxQueryNodes = 64;

const Decomposition::JoinPair* find_join(const Decomposition& d, uint32_t a, uint32_t b) {
    uint32_t lo = std::min(a, b), hi = std::max(a, b);
    for (const auto& jp : d.joins)
        if (jp.a == lo && jp.b == hi)
            return &jp;
    return nullptr;
}

}  // namespace

size_t NodeCandidates::count(uint32_t n) const {
    size_t c = 0;
    for (uint8_t b : in[n])
        c += b;
    return c;
}

NodeCandidates node_candidates(const EntityGraph& g, const ContextTable& ctx,
                               const BoundQuery& bq, const QueryStats& stats, double alpha) {
    NodeCandidates nc;
    nc.in.assign(bq.size(), std::vector<uint8_t>(g.nodes.size(), 0));
    size_t nl = g.label_count();
    double at = alpha - kPruneSlack;
    for (uint32_t n = 0; n < bq.size(); ++n) {
        LabelId l = bq.label[n];
        for (NodeId v = 0; v < g.nodes.size(); ++v) {
            double pl = g.nodes[v].label_dist[l];
            if (pl <= 0.0)
                continue;
            bool ok = true;
            for (LabelId s = 0; s < nl && ok; ++s) {
                uint32_t need = stats.cn(n, s);
                const ContextCell& cell = ctx.at(v, s);
                if (cell.c < need) {
                    ok = false;
                    break;
                }
                // One neighbor must realize the full factor, the rest at
                // least connect; fpu^c bounds that product.
                double bound = pl;
                for (uint32_t t = 0; t < need; ++t)
                    bound *= cell.fpu;
                ok = bound >= at;
            }
            if (ok)
                nc.in[n][v] = 1;
        }
    }
    return nc;
}

CandidateSet path_candidates(const EntityGraph& g, const ContextTable& ctx,
                             const BoundQuery& bq, const QueryStats& stats, const QPath& path,
                             const PathContext& pctx, const LookupResult& raw,
                             const NodeCandidates& nc, double alpha) {
    (void)stats;
    CandidateSet cs;
    size_t plen = path.nodes.size() - 1;
    cs.plen = static_cast<uint32_t>(plen);
    if (raw.plen != plen)
        throw Error("path_candidates: record arity mismatch");

    LabelSeq seq(plen + 1);
    for (size_t i = 0; i <= plen; ++i)
        seq[i] = bq.label[path.nodes[i]];
    // A palindromic sequence stores one record per undirected path; both
    // node orders are distinct assignments and are screened separately.
    bool both = plen > 0 && label_seq_palindromic(seq);
    double at = alpha - kPruneSlack;

    std::vector<NodeId> rec(plen + 1);
    auto screen = [&](const NodeId* nd, bool rev, double prle, double prn) {
        for (size_t p = 0; p <= plen; ++p)
            rec[p] = rev ? nd[plen - p] : nd[p];
        for (size_t p = 0; p <= plen; ++p)
            if (!nc.contains(path.nodes[p], rec[p]))
                return;

        // Off-path neighbors: one incident edge carries the neighbor's full
        // factor, edges to its other anchors merely exist.
        double pu = 1.0;
        for (size_t k = 0; k < pctx.gamma_nodes.size() && pu > 0.0; ++k) {
            LabelId lm = bq.label[pctx.gamma_nodes[k]];
            const std::vector<uint32_t>& rv = pctx.rv[k];
            double best = -1.0;
            for (size_t i = 0; i < rv.size(); ++i) {
                double term = ctx.at(rec[rv[i]], lm).fpu;
                for (size_t j = 0; j < rv.size() && term > 0.0; ++j)
                    if (j != i)
                        term *= ctx.at(rec[rv[j]], lm).ppu;
                if (best < 0.0 || term < best)
                    best = term;
            }
            pu *= best < 0.0 ? 1.0 : best;
        }

        // Cycle-closing query edges must exist; their exact conditional
        // entries multiply in.
        double cpr = 1.0;
        for (size_t p = 0; p <= plen && cpr > 0.0; ++p) {
            for (uint32_t q : pctx.cyc[p]) {
                auto ei = g.edge_index_between(rec[p], rec[q]);
                if (!ei) {
                    cpr = 0.0;
                    break;
                }
                cpr *= g.edge_pr(*ei, rec[p], seq[p], seq[q]);
            }
        }
        if (cpr <= 0.0 || prle * prn * pu * cpr < at)
            return;
        cs.nodes.insert(cs.nodes.end(), rec.begin(), rec.end());
        cs.pr_le.push_back(prle);
        cs.pr_n.push_back(prn);
    };

    for (size_t i = 0; i < raw.count; ++i) {
        const NodeId* nd = raw.rec(i);
        screen(nd, false, raw.pr_le[i], raw.pr_n[i]);
        if (both)
            screen(nd, true, raw.pr_le[i], raw.pr_n[i]);
    }
    return cs;
}

uint64_t JoinTable::key_of(const NodeId* rec, const std::vector<uint32_t>& positions) {
    uint64_t h = 1469598103934665603ull;
    for (uint32_t p : positions) {
        h ^= static_cast<uint64_t>(rec[p]) + 1;
        h *= 1099511628211ull;
    }
    return h;
}

JoinTable build_join_table(const CandidateSet& cs, const std::vector<uint32_t>& positions) {
    JoinTable t;
    t.positions = positions;
    t.rows.reserve(cs.size());
    for (size_t i = 0; i < cs.size(); ++i)
        t.rows[JoinTable::key_of(cs.rec(i), positions)].push_back(static_cast<uint32_t>(i));
    return t;
}

bool join_compatible(const EntityGraph& g, const BoundQuery& bq, const Decomposition& d,
                     uint32_t pa, const NodeId* ra, uint32_t pb, const NodeId* rb,
                     double alpha) {
    const Decomposition::JoinPair* jp = find_join(d, pa, pb);
    if (!jp)
        throw Error("join_compatible: partitions share no node");
    if (bq.size() > kMaxQueryNodes)
        throw Error("join_compatible: query too large");

    const NodeId* rlo = pa < pb ? ra : rb;
    const NodeId* rhi = pa < pb ? rb : ra;
    for (const auto& [x, y] : jp->positions)
        if (rlo[x] != rhi[y])
            return false;

    // Union assignment over query nodes.
    std::array<NodeId, kMaxQueryNodes> psi;
    psi.fill(kInvalidId);
    const QPath& qa = d.paths[pa];
    const QPath& qb = d.paths[pb];
    for (size_t p = 0; p < qa.nodes.size(); ++p)
        psi[qa.nodes[p]] = ra[p];
    for (size_t p = 0; p < qb.nodes.size(); ++p)
        psi[qb.nodes[p]] = rb[p];

    // Pairwise reference disjointness across the union; each record is
    // already internally disjoint, so only cross pairs need checking.
    // Mapping two query nodes to one entity fails here too, since an
    // entity is never reference-disjoint from itself.
    for (size_t p = 0; p < qb.nodes.size(); ++p) {
        uint32_t n = qb.nodes[p];
        if (std::find(qa.nodes.begin(), qa.nodes.end(), n) != qa.nodes.end())
            continue;  // shared query node, not a cross pair
        for (size_t q = 0; q < qa.nodes.size(); ++q)
            if (!g.refs_disjoint(ra[q], rb[p]))
                return false;
    }

    // Probability of the joined partial match: assigned label factors,
    // assigned query edges (which must exist), and the union's existence
    // marginal.
    double pr = 1.0;
    std::vector<NodeId> uni;
    uni.reserve(qa.nodes.size() + qb.nodes.size());
    for (uint32_t n = 0; n < bq.size(); ++n) {
        if (psi[n] == kInvalidId)
            continue;
        uni.push_back(psi[n]);
        pr *= g.nodes[psi[n]].label_dist[bq.label[n]];
    }
    for (size_t e = 0; e < bq.q->edges.size(); ++e) {
        auto [u, v] = bq.q->edges[e];
        if (psi[u] == kInvalidId || psi[v] == kInvalidId)
            continue;
        auto ei = g.edge_index_between(psi[u], psi[v]);
        if (!ei)
            return false;
        pr *= g.edge_pr(*ei, psi[u], bq.label[u], bq.label[v]);
    }
    if (pr <= 0.0)
        return false;
    pr *= node_existence_marginal(g, uni);
    return pr >= alpha - kPruneSlack;
}

std::vector<uint32_t> join_candidates(const EntityGraph& g, const BoundQuery& bq,
                                      const Decomposition& d, uint32_t pa,
                                      const CandidateSet& ca, size_t ria, uint32_t pb,
                                      const CandidateSet& cb, const JoinTable& tb,
                                      double alpha) {
    const Decomposition::JoinPair* jp = find_join(d, pa, pb);
    if (!jp)
        throw Error("join_candidates: partitions share no node");
    // Key over pa's sides of the shared nodes, in predicate order, matching
    // the order the table was keyed with on pb's side.
    std::vector<uint32_t> apos(jp->positions.size());
    for (size_t i = 0; i < jp->positions.size(); ++i)
        apos[i] = pa < pb ? jp->positions[i].first : jp->positions[i].second;
    const NodeId* ra = ca.rec(ria);
    uint64_t key = JoinTable::key_of(ra, apos);
    auto it = tb.rows.find(key);
    std::vector<uint32_t> out;
    if (it == tb.rows.end())
        return out;
    for (uint32_t rib : it->second)
        if (join_compatible(g, bq, d, pa, ra, pb, cb.rec(rib), alpha))
            out.push_back(rib);
    return out;
}

}  // namespace peg
