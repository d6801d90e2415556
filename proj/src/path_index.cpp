#include "peg/path_index.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "peg/common.hpp"

namespace peg {

namespace {

// -1: seq is strictly smaller than its reverse, 0: palindrome, +1: larger.
int self_order(const LabelSeq& s) {
    size_t n = s.size();
    for (size_t i = 0; i < n; ++i) {
        if (s[i] < s[n - 1 - i])
            return -1;
        if (s[i] > s[n - 1 - i])
            return 1;
    }
    return 0;
}

bool contains_node(std::span<const NodeId> nodes, NodeId w) {
    for (NodeId v : nodes)
        if (v == w)
            return true;
    return false;
}

// prLE folded head to tail along the given orientation: start label factor,
// then one edge factor and one label factor per step. Always folding the
// stored (canonical) orientation keeps record values independent of the
// order paths were discovered in.
double fold_prle(const EntityGraph& g, std::span<const NodeId> nodes, const LabelSeq& seq) {
    double p = g.nodes[nodes[0]].label_dist[seq[0]];
    for (size_t i = 1; i < nodes.size() && p > 0.0; ++i) {
        auto ei = g.edge_index_between(nodes[i - 1], nodes[i]);
        if (!ei)
            return 0.0;
        p *= g.edge_pr(*ei, nodes[i - 1], seq[i - 1], seq[i]);
        p *= g.nodes[nodes[i]].label_dist[seq[i]];
    }
    return p;
}

struct GroupBuild {
    std::vector<NodeId> node_buf;
    std::vector<double> pr_le;
    std::vector<double> pr_n;

    size_t count() const { return pr_le.size(); }
};

using BuildMap = std::map<LabelSeq, GroupBuild>;

void append_record(BuildMap& out, const LabelSeq& seq, std::span<const NodeId> nodes, double prle,
                   double prn) {
    GroupBuild& gb = out[seq];
    gb.node_buf.insert(gb.node_buf.end(), nodes.begin(), nodes.end());
    gb.pr_le.push_back(prle);
    gb.pr_n.push_back(prn);
}

}  // namespace

LabelSeq canonical_label_seq(const LabelSeq& seq) {
    if (self_order(seq) <= 0)
        return seq;
    return LabelSeq(seq.rbegin(), seq.rend());
}

bool label_seq_palindromic(const LabelSeq& seq) {
    return self_order(seq) == 0;
}

size_t PathIndex::nbuckets() const {
    return static_cast<size_t>(std::floor((1.0 - beta) / gamma + 1e-9)) + 1;
}

uint32_t PathIndex::bucket_of(double p) const {
    double k = std::floor((p - beta) / gamma + 1e-9);
    if (k <= 0.0)
        return 0;
    size_t last = nbuckets() - 1;
    if (k >= static_cast<double>(last))
        return static_cast<uint32_t>(last);
    return static_cast<uint32_t>(k);
}

double PathIndex::bucket_value(uint32_t k) const {
    return std::min(1.0, beta + k * gamma);
}

LookupResult PathIndex::lookup(const LabelSeq& seq, double alpha) const {
    if (seq.empty())
        throw Error("lookup: empty label sequence");
    if (seq.size() > L + 1)
        throw Error("lookup: sequence longer than the indexed path length");
    for (LabelId s : seq)
        if (s >= nlabels)
            throw Error("lookup: label out of range");
    if (alpha < beta)
        throw Error("lookup: alpha below index beta; route through index_lookup");

    LookupResult out;
    out.plen = static_cast<uint32_t>(seq.size() - 1);
    LabelSeq canon = canonical_label_seq(seq);
    bool rev = canon != seq;
    uint32_t k0 = bucket_of(alpha);
    const PathGroup* pg = materialized(canon, k0);
    if (!pg)
        return out;
    size_t m = out.plen;
    for (uint64_t ord = pg->bucket_begin[k0]; ord < pg->total(); ++ord) {
        size_t ri = static_cast<size_t>(ord - pg->loaded_base);
        double pr = pg->pr_le[ri] * pg->pr_n[ri];
        if (pr < alpha)
            continue;
        const NodeId* nd = pg->node_buf.data() + ri * (m + 1);
        if (rev)
            for (size_t i = 0; i <= m; ++i)
                out.nodes.push_back(nd[m - i]);
        else
            out.nodes.insert(out.nodes.end(), nd, nd + m + 1);
        out.pr_le.push_back(pg->pr_le[ri]);
        out.pr_n.push_back(pg->pr_n[ri]);
    }
    out.count = out.pr_le.size();
    return out;
}

uint64_t PathIndex::total_records() const {
    uint64_t n = 0;
    if (!groups.empty()) {
        for (const auto& [seq, pg] : groups)
            n += pg.total();
        return n;
    }
    for (const auto& [seq, loc] : locations)
        n += loc.bucket_begin.empty() ? 0 : loc.bucket_begin.back();
    return n;
}

namespace {

// Bucket-sorts a finished group. Stable within a bucket, so record order
// stays the discovery order and is reproducible.
PathGroup finalize_group(const PathIndex& idx, uint32_t plen, GroupBuild&& gb) {
    size_t nb = idx.nbuckets();
    size_t n = gb.count();
    std::vector<uint32_t> bucket(n);
    std::vector<uint64_t> cnt(nb, 0);
    for (size_t i = 0; i < n; ++i) {
        bucket[i] = idx.bucket_of(gb.pr_le[i] * gb.pr_n[i]);
        ++cnt[bucket[i]];
    }
    PathGroup pg;
    pg.plen = plen;
    pg.bucket_begin.assign(nb + 1, 0);
    for (size_t k = 0; k < nb; ++k)
        pg.bucket_begin[k + 1] = pg.bucket_begin[k] + cnt[k];
    pg.node_buf.resize(n * (plen + 1));
    pg.pr_le.resize(n);
    pg.pr_n.resize(n);
    std::vector<uint64_t> cursor(pg.bucket_begin.begin(), pg.bucket_begin.end() - 1);
    for (size_t i = 0; i < n; ++i) {
        uint64_t d = cursor[bucket[i]]++;
        std::copy_n(gb.node_buf.data() + i * (plen + 1), plen + 1,
                    pg.node_buf.data() + d * (plen + 1));
        pg.pr_le[d] = gb.pr_le[i];
        pg.pr_n[d] = gb.pr_n[i];
    }
    return pg;
}

struct LevelSource {
    const LabelSeq* seq;
    const PathGroup* group;
    uint64_t first;  // global record ordinal of the group's first record
};

}  // namespace

PathIndex build_path_index(const EntityGraph& g, size_t L, double beta, double gamma,
                           unsigned threads) {
    if (!(beta > 0.0 && beta <= 1.0))
        throw Error("build_path_index: beta must be in (0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw Error("build_path_index: gamma must be in (0, 1]");
    if (threads == 0)
        threads = 1;

    PathIndex idx;
    idx.L = L;
    idx.beta = beta;
    idx.gamma = gamma;
    idx.nlabels = g.label_count();
    idx.fingerprint = g.fingerprint;

    size_t nn = g.nodes.size();
    // A node is trivial when its component has a single configuration; the
    // joint existence of trivial nodes is exactly 1, skipping table walks.
    std::vector<uint8_t> trivial(nn, 0);
    std::vector<double> node_marg(nn, 0.0);
    for (NodeId v = 0; v < nn; ++v) {
        trivial[v] = g.components[g.nodes[v].component].configs.size() == 1 ? 1 : 0;
        node_marg[v] = node_existence_marginal(g, std::span<const NodeId>(&v, 1));
    }
    double keep_at = beta - kPruneSlack;

    // Length 0: one record per node and supported label.
    {
        BuildMap lvl;
        LabelSeq seq(1);
        for (NodeId v = 0; v < nn; ++v) {
            for (LabelId s : g.nodes[v].support) {
                double prle = g.nodes[v].label_dist[s];
                double prn = node_marg[v];
                if (prle * prn < keep_at)
                    continue;
                seq[0] = s;
                append_record(lvl, seq, std::span<const NodeId>(&v, 1), prle, prn);
            }
        }
        for (auto& [seq2, gb] : lvl)
            idx.groups.emplace(seq2, finalize_group(idx, 0, std::move(gb)));
    }

    for (size_t l = 0; l + 1 <= L; ++l) {
        // Sources: every stored group of path length l, in canonical order.
        std::vector<LevelSource> sources;
        uint64_t total = 0;
        for (const auto& [seq, pg] : idx.groups) {
            if (seq.size() != l + 1)
                continue;
            sources.push_back({&seq, &pg, total});
            total += pg.total();
        }
        if (total == 0)
            break;

        std::mutex parts_mtx;
        std::vector<std::pair<size_t, BuildMap>> parts;

        auto worker = [&](size_t wb, size_t we) {
            BuildMap local;
            std::vector<NodeId> tmp_nodes(l + 2);
            LabelSeq tmp_seq(l + 2);
            LabelSeq rev_seq(l + 1);
            // First source holding ordinal wb.
            size_t si = 0;
            while (si + 1 < sources.size() && sources[si + 1].first <= wb)
                ++si;
            for (uint64_t ord = wb; ord < we; ++ord) {
                while (si + 1 < sources.size() && sources[si + 1].first <= ord)
                    ++si;
                const LabelSeq& seq = *sources[si].seq;
                const PathGroup& pg = *sources[si].group;
                const NodeId* nd = pg.rec_nodes(ord - sources[si].first);
                // A single-node record reads the same in both orientations;
                // extending it twice would duplicate every length-1 path.
                int ndirs = l == 0 ? 1 : 2;
                for (int dir = 0; dir < ndirs; ++dir) {
                    // Oriented record: nodes a(i), labels t(i).
                    auto a = [&](size_t i) { return dir ? nd[l - i] : nd[i]; };
                    const LabelSeq* t = &seq;
                    if (dir) {
                        std::reverse_copy(seq.begin(), seq.end(), rev_seq.begin());
                        t = &rev_seq;
                    }
                    for (size_t i = 0; i <= l; ++i) {
                        tmp_nodes[i] = a(i);
                        tmp_seq[i] = (*t)[i];
                    }
                    NodeId tail = tmp_nodes[l];
                    for (const auto& [w, ei] : g.adj[tail]) {
                        if (contains_node(std::span<const NodeId>(tmp_nodes.data(), l + 1), w))
                            continue;
                        bool disj = true;
                        for (size_t i = 0; i <= l && disj; ++i)
                            disj = g.refs_disjoint(tmp_nodes[i], w);
                        if (!disj)
                            continue;
                        tmp_nodes[l + 1] = w;
                        bool triv = trivial[w];
                        for (size_t i = 0; i <= l && triv; ++i)
                            triv = trivial[tmp_nodes[i]];
                        double prn = -1.0;
                        for (LabelId s : g.nodes[w].support) {
                            tmp_seq[l + 1] = s;
                            // Each undirected path is produced once per
                            // orientation; only the canonical one is kept.
                            int so = self_order(tmp_seq);
                            if (so > 0)
                                continue;
                            if (so == 0 && tmp_nodes[0] > w)
                                continue;
                            if (g.edge_pr(ei, tail, (*t)[l], s) <= 0.0)
                                continue;
                            double prle = fold_prle(g, tmp_nodes, tmp_seq);
                            if (prle <= 0.0)
                                continue;
                            if (prn < 0.0)
                                prn = triv ? 1.0 : node_existence_marginal(g, tmp_nodes);
                            if (prle * prn < keep_at)
                                continue;
                            append_record(local, tmp_seq, tmp_nodes, prle, prn);
                        }
                    }
                }
            }
            std::lock_guard<std::mutex> lk(parts_mtx);
            parts.emplace_back(wb, std::move(local));
        };
        parallel_chunks(static_cast<size_t>(total), threads, worker);

        // Chunks are contiguous record ranges; stitching them back in range
        // order reproduces the single-threaded discovery order exactly.
        std::sort(parts.begin(), parts.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        BuildMap next;
        for (auto& [b, part] : parts) {
            for (auto& [seq, gb] : part) {
                auto it = next.find(seq);
                if (it == next.end()) {
                    next.emplace(seq, std::move(gb));
                } else {
                    GroupBuild& dst = it->second;
                    dst.node_buf.insert(dst.node_buf.end(), gb.node_buf.begin(),
                                        gb.node_buf.end());
                    dst.pr_le.insert(dst.pr_le.end(), gb.pr_le.begin(), gb.pr_le.end());
                    dst.pr_n.insert(dst.pr_n.end(), gb.pr_n.begin(), gb.pr_n.end());
                    gb = GroupBuild{};
                }
            }
            part.clear();
        }
        parts.clear();
        for (auto& [seq, gb] : next)
            idx.groups.emplace(seq, finalize_group(idx, static_cast<uint32_t>(l + 1),
                                                   std::move(gb)));
    }
    return idx;
}

LookupResult on_demand_paths(const EntityGraph& g, const LabelSeq& seq, double alpha) {
    if (seq.empty())
        throw Error("on_demand_paths: empty label sequence");
    for (LabelId s : seq)
        if (s >= g.label_count())
            throw Error("on_demand_paths: label out of range");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw Error("on_demand_paths: alpha must be in (0, 1]");

    size_t m = seq.size() - 1;
    int so = self_order(seq);
    LookupResult out;
    out.plen = static_cast<uint32_t>(m);

    std::vector<NodeId> cur;
    cur.reserve(m + 1);
    std::vector<double> qfold;  // incremental fold along the query orientation
    qfold.reserve(m + 1);
    std::vector<NodeId> canon_nodes(m + 1);
    const LabelSeq canon = canonical_label_seq(seq);
    double prune_at = alpha - kPruneSlack;

    auto emit = [&]() {
        // Palindromic sequences find each path in both directions.
        if (so == 0 && m > 0 && cur.front() > cur.back())
            return;
        // Probabilities fold along the canonical orientation, matching the
        // values an index lookup would return for the same record.
        if (so > 0)
            std::reverse_copy(cur.begin(), cur.end(), canon_nodes.begin());
        else
            std::copy(cur.begin(), cur.end(), canon_nodes.begin());
        double prle = fold_prle(g, canon_nodes, canon);
        if (prle <= 0.0)
            return;
        double prn = node_existence_marginal(g, canon_nodes);
        if (prle * prn < alpha)
            return;
        out.nodes.insert(out.nodes.end(), cur.begin(), cur.end());
        out.pr_le.push_back(prle);
        out.pr_n.push_back(prn);
    };

    auto dfs = [&](auto&& self, size_t pos) -> void {
        if (pos == m + 1) {
            emit();
            return;
        }
        NodeId tail = cur.back();
        for (const auto& [w, ei] : g.adj[tail]) {
            if (contains_node(cur, w))
                continue;
            bool disj = true;
            for (NodeId v : cur) {
                if (!g.refs_disjoint(v, w)) {
                    disj = false;
                    break;
                }
            }
            if (!disj)
                continue;
            double lw = g.nodes[w].label_dist[seq[pos]];
            if (lw <= 0.0)
                continue;
            double ep = g.edge_pr(ei, tail, seq[pos - 1], seq[pos]);
            if (ep <= 0.0)
                continue;
            double f = qfold.back() * ep * lw;
            if (f < prune_at)
                continue;
            cur.push_back(w);
            qfold.push_back(f);
            self(self, pos + 1);
            cur.pop_back();
            qfold.pop_back();
        }
    };

    for (NodeId v = 0; v < g.nodes.size(); ++v) {
        double lv = g.nodes[v].label_dist[seq[0]];
        if (lv <= 0.0 || lv < prune_at)
            continue;
        cur.assign(1, v);
        qfold.assign(1, lv);
        dfs(dfs, 1);
    }
    out.count = out.pr_le.size();
    return out;
}

LookupResult index_lookup(const PathIndex& idx, const EntityGraph& g, const LabelSeq& seq,
                          double alpha) {
    if (alpha < idx.beta)
        return on_demand_paths(g, seq, alpha);
    return idx.lookup(seq, alpha);
}

}  // namespace peg
