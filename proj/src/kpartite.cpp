#include "peg/kpartite.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>

#include "peg/common.hpp"

namespace peg {

size_t KPartiteGraph::alive_count(size_t i) const {
    size_t c = 0;
    for (uint8_t a : alive[i])
        c += a;
    return c;
}

void KPartiteGraph::init_perceptions() {
    percep.assign(k, {});
    for (size_t i = 0; i < k; ++i) {
        percep[i].assign(part_size(i) * k, 1.0);
        for (size_t v = 0; v < part_size(i); ++v)
            percep[i][v * k + i] = w1[i][v];
    }
}

double KPartiteGraph::bound(size_t i, uint32_t v) const {
    double b = w2[i][v];
    for (size_t t = 0; t < k; ++t)
        b *= percep[i][v * k + t];
    return b;
}

KPartiteBuild build_kpartite(const EntityGraph& g, const BoundQuery& bq,
                             const Decomposition& d,
                             const std::vector<CandidateSet>& cands, double alpha) {
    size_t k = d.paths.size();
    if (cands.size() != k)
        throw Error("build_kpartite: candidate set count mismatch");

    KPartiteBuild b;
    KPartiteGraph& kpg = b.kpg;
    kpg.k = k;
    kpg.w1.assign(k, {});
    kpg.w2.assign(k, {});
    kpg.alive.assign(k, {});
    kpg.partners.resize(k);
    kpg.links.resize(k);
    b.vertex_record.assign(k, {});

    for (size_t i = 0; i < k; ++i) {
        const CandidateSet& cs = cands[i];
        const QPath& path = d.paths[i];
        size_t n = cs.size();
        kpg.w1[i].resize(n);
        kpg.w2[i].resize(n);
        kpg.alive[i].assign(n, 1);
        b.vertex_record[i].resize(n);
        std::iota(b.vertex_record[i].begin(), b.vertex_record[i].end(), 0u);

        std::vector<uint32_t> pos(bq.size(), kInvalidId);
        for (uint32_t p = 0; p < path.nodes.size(); ++p)
            pos[path.nodes[p]] = p;
        for (size_t v = 0; v < n; ++v) {
            const NodeId* rec = cs.rec(v);
            // Covered label and edge factors owned by this partition.
            double w = 1.0;
            for (uint32_t qn : d.cv[i])
                w *= g.nodes[rec[pos[qn]]].label_dist[bq.label[qn]];
            for (uint32_t qe : d.ce[i]) {
                auto [u, x] = bq.q->edges[qe];
                auto ei = g.edge_index_between(rec[pos[u]], rec[pos[x]]);
                w = ei ? w * g.edge_pr(*ei, rec[pos[u]], bq.label[u], bq.label[x]) : 0.0;
            }
            kpg.w1[i][v] = w;
            kpg.w2[i][v] = cs.pr_n[v];
        }
        kpg.partners[i] = d.partners[i];
        kpg.links[i].resize(kpg.partners[i].size());
    }

    // Links per join pair, then transposed for the other side.
    for (const auto& jp : d.joins) {
        uint32_t a = jp.a, bb = jp.b;
        std::vector<uint32_t> bpos(jp.positions.size());
        for (size_t i = 0; i < jp.positions.size(); ++i)
            bpos[i] = jp.positions[i].second;
        JoinTable tb = build_join_table(cands[bb], bpos);

        size_t slot_b = static_cast<size_t>(
            std::lower_bound(kpg.partners[a].begin(), kpg.partners[a].end(), bb) -
            kpg.partners[a].begin());
        size_t slot_a = static_cast<size_t>(
            std::lower_bound(kpg.partners[bb].begin(), kpg.partners[bb].end(), a) -
            kpg.partners[bb].begin());

        LinkSet& la = kpg.links[a][slot_b];
        LinkSet& lb = kpg.links[bb][slot_a];
        size_t na = cands[a].size(), nb = cands[bb].size();
        la.off.assign(na + 1, 0);
        std::vector<uint64_t> rev_cnt(nb + 1, 0);
        std::vector<std::pair<uint32_t, uint32_t>> pairs;
        for (size_t va = 0; va < na; ++va) {
            std::vector<uint32_t> ns =
                join_candidates(g, bq, d, a, cands[a], va, bb, cands[bb], tb, alpha);
            la.off[va + 1] = la.off[va] + ns.size();
            for (uint32_t vb : ns) {
                pairs.emplace_back(static_cast<uint32_t>(va), vb);
                ++rev_cnt[vb + 1];
            }
            la.nbr.insert(la.nbr.end(), ns.begin(), ns.end());
        }
        lb.off.assign(nb + 1, 0);
        for (size_t vb = 0; vb < nb; ++vb)
            lb.off[vb + 1] = lb.off[vb] + rev_cnt[vb + 1];
        lb.nbr.resize(pairs.size());
        std::vector<uint64_t> cursor(lb.off.begin(), lb.off.end() - 1);
        for (const auto& [va, vb] : pairs)
            lb.nbr[cursor[vb]++] = va;
    }

    kpg.init_perceptions();
    return b;
}

size_t reduce_structure(KPartiteGraph& kpg) {
    size_t k = kpg.k;
    // Alive-neighbor counts per (partition, partner slot, vertex).
    std::vector<std::vector<std::vector<uint64_t>>> cnt(k);
    std::vector<std::pair<uint32_t, uint32_t>> dead;
    for (size_t i = 0; i < k; ++i) {
        cnt[i].resize(kpg.partners[i].size());
        for (size_t s = 0; s < kpg.partners[i].size(); ++s) {
            uint32_t j = kpg.partners[i][s];
            cnt[i][s].assign(kpg.part_size(i), 0);
            for (uint32_t v = 0; v < kpg.part_size(i); ++v) {
                if (!kpg.alive[i][v])
                    continue;
                uint64_t c = 0;
                for (uint32_t u : kpg.links[i][s].of(v))
                    c += kpg.alive[j][u];
                cnt[i][s][v] = c;
                if (c == 0)
                    dead.emplace_back(static_cast<uint32_t>(i), v);
            }
        }
    }
    // Queued vertices may repeat; the alive flag makes deletion idempotent.
    size_t deaths = 0;
    auto slot_of = [&](uint32_t j, uint32_t i) {
        return static_cast<size_t>(
            std::lower_bound(kpg.partners[j].begin(), kpg.partners[j].end(), i) -
            kpg.partners[j].begin());
    };
    while (!dead.empty()) {
        auto [i, v] = dead.back();
        dead.pop_back();
        if (!kpg.alive[i][v])
            continue;
        kpg.alive[i][v] = 0;
        ++deaths;
        for (size_t s = 0; s < kpg.partners[i].size(); ++s) {
            uint32_t j = kpg.partners[i][s];
            size_t back = slot_of(j, i);
            for (uint32_t u : kpg.links[i][s].of(v)) {
                if (!kpg.alive[j][u])
                    continue;
                if (--cnt[j][back][u] == 0)
                    dead.emplace_back(j, u);
            }
        }
    }
    return deaths;
}

namespace {

// One perception refresh of vertex (i, v) from current neighbor state.
// Returns true when an entry decreased. rowmax is scratch of size k.
bool refresh_vertex(KPartiteGraph& kpg, size_t i, uint32_t v, double* rowmax) {
    size_t k = kpg.k;
    bool changed = false;
    double* row = kpg.percep[i].data() + static_cast<size_t>(v) * k;
    for (size_t s = 0; s < kpg.partners[i].size(); ++s) {
        uint32_t j = kpg.partners[i][s];
        for (size_t t = 0; t < k; ++t)
            rowmax[t] = -1.0;
        for (uint32_t u : kpg.links[i][s].of(v)) {
            if (!kpg.alive[j][u])
                continue;
            const double* urow = kpg.percep[j].data() + static_cast<size_t>(u) * k;
            for (size_t t = 0; t < k; ++t)
                rowmax[t] = std::max(rowmax[t], urow[t]);
        }
        for (size_t t = 0; t < k; ++t) {
            if (t == i)
                continue;
            double m = rowmax[t] < 0.0 ? 0.0 : rowmax[t];
            if (m < row[t]) {
                row[t] = m;
                changed = true;
            }
        }
    }
    return changed;
}

}  // namespace

size_t reduce_upperbounds(KPartiteGraph& kpg, double alpha) {
    size_t k = kpg.k;
    size_t deaths = 0;
    double at = alpha - kPruneSlack;
    std::vector<double> rowmax(k);
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < k; ++i) {
            for (uint32_t v = 0; v < kpg.part_size(i); ++v) {
                if (!kpg.alive[i][v])
                    continue;
                if (refresh_vertex(kpg, i, v, rowmax.data()))
                    changed = true;
                if (kpg.bound(i, v) < at) {
                    kpg.alive[i][v] = 0;
                    ++deaths;
                    changed = true;
                }
            }
        }
    }
    return deaths;
}

size_t joint_reduce(KPartiteGraph& kpg, double alpha, unsigned threads) {
    size_t k = kpg.k;
    size_t total = 0;
    if (threads <= 1) {
        for (;;) {
            size_t d = reduce_structure(kpg);
            d += reduce_upperbounds(kpg, alpha);
            total += d;
            if (d == 0)
                break;
        }
        return total;
    }

    // Parallel: synchronized rounds on a double buffer. Every round reads
    // the previous round's perceptions and alive flags only, so the
    // schedule cannot leak in; deletions commit between rounds. The
    // fixpoint equals the sequential one.
    double at = alpha - kPruneSlack;
    for (;;) {
        size_t d = reduce_structure(kpg);
        std::vector<std::vector<double>> snap = kpg.percep;
        std::vector<uint8_t> any_change(k, 0);
        for (size_t i = 0; i < k; ++i) {
            size_t n = kpg.part_size(i);
            if (n == 0)
                continue;
            uint8_t part_changed = 0;
            std::mutex mtx;
            parallel_chunks(n, threads, [&](size_t vb, size_t ve) {
                std::vector<double> rowmax(k);
                bool ch = false;
                for (size_t v = vb; v < ve; ++v) {
                    if (!kpg.alive[i][v])
                        continue;
                    double* row = snap[i].data() + v * k;
                    for (size_t s = 0; s < kpg.partners[i].size(); ++s) {
                        uint32_t j = kpg.partners[i][s];
                        for (size_t t = 0; t < k; ++t)
                            rowmax[t] = -1.0;
                        for (uint32_t u : kpg.links[i][s].of(v)) {
                            if (!kpg.alive[j][u])
                                continue;
                            const double* urow =
                                kpg.percep[j].data() + static_cast<size_t>(u) * k;
                            for (size_t t = 0; t < k; ++t)
                                rowmax[t] = std::max(rowmax[t], urow[t]);
                        }
                        for (size_t t = 0; t < k; ++t) {
                            if (t == i)
                                continue;
                            double m = rowmax[t] < 0.0 ? 0.0 : rowmax[t];
                            if (m < row[t]) {
                                row[t] = m;
                                ch = true;
                            }
                        }
                    }
                }
                if (ch) {
                    std::lock_guard<std::mutex> lk(mtx);
                    part_changed = 1;
                }
            });
            any_change[i] = part_changed;
        }
        kpg.percep = std::move(snap);
        size_t killed = 0;
        for (size_t i = 0; i < k; ++i) {
            for (uint32_t v = 0; v < kpg.part_size(i); ++v) {
                if (kpg.alive[i][v] && kpg.bound(i, v) < at) {
                    kpg.alive[i][v] = 0;
                    ++killed;
                }
            }
        }
        total += d + killed;
        bool moved = d != 0 || killed != 0;
        for (uint8_t c : any_change)
            moved = moved || c != 0;
        if (!moved)
            break;
    }
    return total;
}

}  // namespace peg
