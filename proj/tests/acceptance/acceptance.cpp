// Acceptance suite: eight end-to-end checks over the full query pipeline,
// printed as one PASS/FAIL line each. Exit status is the number of failed
// checks. Tolerances: probabilities 1e-9, perception bounds 1e-12, stored
// doubles bit-exact.

#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "peg/common.hpp"
#include "peg/datagen.hpp"
#include "peg/engine.hpp"
#include "peg/oracle.hpp"
#include "peg/storage.hpp"
#include "../kp_support.hpp"
#include "../pipeline.hpp"
#include "../support.hpp"

using namespace peg;
using testsupport::Pipeline;
using testsupport::anchor_pgd;
using testsupport::consistent_tuples;
using testsupport::find_record;
using testsupport::random_instance;
using testsupport::set_has_record;
using testsupport::stage_path;
using testsupport::tiny_pgd;
using testsupport::tiny_query;

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// First failure wins; later checks still count toward `done`.
struct Check {
    bool ok = true;
    std::string why;
    size_t done = 0;

    void expect(bool cond, const std::string& msg) {
        ++done;
        if (!cond && ok) {
            ok = false;
            why = msg;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

NodeId need_node(Check& c, const EntityGraph& g, const std::string& id) {
    auto v = g.node_by_id(id);
    c.expect(v.has_value(), "missing entity " + id);
    return v.value_or(0);
}

// ---------------------------------------------------------------- check 1

// Hand-checked document: merging {r3, r4} averages the label distributions
// to {r: .5, i: .5} and the incident edges to .75, and the path query
// r - a - i matches the singleton triple (r3, r2, r4) at probability 0.1.
void check_fixture(Check& c) {
    Pgd p = anchor_pgd();
    Pipeline pl(p, 2);
    const EntityGraph& g = pl.g;

    NodeId s34 = need_node(c, g, "s34");
    NodeId s2 = need_node(c, g, "r2");
    auto lr = g.label_by_name("r");
    auto li = g.label_by_name("i");
    auto la = g.label_by_name("a");
    c.expect(lr && li && la, "label alphabet incomplete");
    if (!c.ok)
        return;
    c.expect(g.nodes[s34].label_dist[*lr] == 0.5, "merged label r is not exactly 0.5");
    c.expect(g.nodes[s34].label_dist[*li] == 0.5, "merged label i is not exactly 0.5");
    c.expect(g.nodes[s34].label_dist[*la] == 0.0, "merged label a is not exactly 0");

    const EdgeDist* ed = g.edge_between(s34, s2);
    c.expect(ed != nullptr, "missing merged edge");
    if (ed)
        c.expect(!ed->correlated && ed->p == 0.75, "merged edge is not exactly 0.75");

    QueryGraph q;
    q.nodes = {{"q0", "r"}, {"q1", "a"}, {"q2", "i"}};
    q.edges = {{0, 1}, {1, 2}};
    q.alpha = 0.05;
    QueryResult res = answer_query(pl.g, pl.idx, pl.h, pl.ctx, q);
    c.expect(res.matches.size() == 1, fmt("expected 1 match, got %zu", res.matches.size()));
    if (res.matches.size() == 1) {
        std::vector<NodeId> want = {need_node(c, g, "r3"), s2, need_node(c, g, "r4")};
        c.expect(res.matches[0].mapping == want, "match is not the singleton triple");
        c.expect(std::fabs(res.matches[0].probability - 0.1) <= 1e-9,
                 fmt("match probability %.12f, expected 0.1", res.matches[0].probability));
    }
}

// ------------------------------------------------------------ checks 2, 4

constexpr std::array<double, 3> kAlphas = {0.05, 0.3, 0.7};

// Engine output equals exhaustive backtracking over the entity graph, as
// sets, probabilities within 1e-9, on 200 documents in both edge modes.
void check_oracle(Check& c) {
    size_t nonempty = 0;
    for (uint64_t seed = 0; seed < 200; ++seed)
        for (bool corr : {false, true}) {
            Pgd p = tiny_pgd(seed, corr);
            Pipeline pl(p, 3);
            QueryGraph q = tiny_query(seed, p.labels);
            for (double alpha : kAlphas) {
                q.alpha = alpha;
                std::vector<Match> want = oracle_subgraph_match(pl.g, q, alpha);
                QueryResult res = answer_query(pl.g, pl.idx, pl.h, pl.ctx, q);
                c.expect(res.matches.size() == want.size(),
                         fmt("seed %llu corr %d alpha %.2f: %zu matches, oracle %zu",
                             (unsigned long long)seed, (int)corr, alpha, res.matches.size(),
                             want.size()));
                if (res.matches.size() != want.size())
                    continue;
                for (size_t i = 0; i < want.size(); ++i) {
                    c.expect(res.matches[i].mapping == want[i].mapping,
                             fmt("seed %llu alpha %.2f: mapping %zu differs",
                                 (unsigned long long)seed, alpha, i));
                    c.expect(std::fabs(res.matches[i].probability - want[i].probability) <= 1e-9,
                             fmt("seed %llu alpha %.2f: probability %zu differs",
                                 (unsigned long long)seed, alpha, i));
                }
                nonempty += !want.empty();
            }
        }
    c.expect(nonempty > 100, fmt("only %zu nonempty answer sets", nonempty));
}

// Every oracle answer's projection survives node pruning, path pruning,
// join candidacy, and the structural plus upper-bound reductions.
void check_stages(Check& c) {
    size_t projected = 0;
    for (uint64_t seed = 0; seed < 200; ++seed)
        for (bool corr : {false, true}) {
            Pgd p = tiny_pgd(seed, corr);
            Pipeline pl(p, 3);
            QueryGraph q = tiny_query(seed, p.labels);
            for (double alpha : kAlphas) {
                q.alpha = alpha;
                std::vector<Match> matches = oracle_subgraph_match(pl.g, q, alpha);
                if (matches.empty())
                    continue;
                auto bq = bind_query(q, pl.g);
                c.expect(bq.has_value(), "bind failed on a query with answers");
                if (!bq)
                    continue;
                QueryStats qs = compute_query_stats(*bq, pl.g.label_count());
                Decomposition d = decompose_query(*bq, pl.h, 3, alpha);
                NodeCandidates nc = node_candidates(pl.g, pl.ctx, *bq, qs, alpha);

                for (const Match& m : matches)
                    for (uint32_t n = 0; n < bq->size(); ++n)
                        c.expect(nc.contains(n, m.mapping[n]),
                                 fmt("seed %llu alpha %.2f: node stage drops query node %u",
                                     (unsigned long long)seed, alpha, n));

                std::vector<CandidateSet> cands;
                for (size_t i = 0; i < d.paths.size(); ++i)
                    cands.push_back(stage_path(pl, *bq, qs, d, i, nc, alpha));

                auto project = [&](const Match& m, size_t i) {
                    std::vector<NodeId> rec;
                    for (uint32_t n : d.paths[i].nodes)
                        rec.push_back(m.mapping[n]);
                    return rec;
                };
                for (const Match& m : matches) {
                    for (size_t i = 0; i < d.paths.size(); ++i) {
                        c.expect(set_has_record(cands[i], project(m, i)),
                                 fmt("seed %llu alpha %.2f: path stage drops partition %zu",
                                     (unsigned long long)seed, alpha, i));
                        ++projected;
                    }
                    for (const auto& jp : d.joins) {
                        std::vector<NodeId> ra = project(m, jp.a);
                        std::vector<NodeId> rb = project(m, jp.b);
                        c.expect(join_compatible(pl.g, *bq, d, jp.a, ra.data(), jp.b,
                                                 rb.data(), alpha),
                                 fmt("seed %llu alpha %.2f: join stage drops pair %u-%u",
                                     (unsigned long long)seed, alpha, jp.a, jp.b));
                    }
                }

                KPartiteBuild kb = build_kpartite(pl.g, *bq, d, cands, alpha);
                joint_reduce(kb.kpg, alpha, 1);
                for (const Match& m : matches)
                    for (size_t i = 0; i < d.paths.size(); ++i) {
                        size_t ridx = find_record(cands[i], project(m, i));
                        if (ridx >= cands[i].size())
                            continue;  // already reported above
                        bool alive = false;
                        for (uint32_t v = 0; v < kb.kpg.part_size(i); ++v)
                            if (kb.vertex_record[i][v] == ridx) {
                                alive = kb.kpg.alive[i][v] != 0;
                                break;
                            }
                        c.expect(alive,
                                 fmt("seed %llu alpha %.2f: reduction kills partition %zu",
                                     (unsigned long long)seed, alpha, i));
                    }
            }
        }
    c.expect(projected > 1000, fmt("only %zu projections exercised", projected));
}

// ---------------------------------------------------------------- check 3

struct GroundRec {
    double pr_le = 0.0;
    double pr_n = 0.0;
};
using Ground = std::map<LabelSeq, std::map<std::vector<NodeId>, GroundRec>>;

int self_order_of(const LabelSeq& s) {
    size_t n = s.size();
    for (size_t i = 0; i < n; ++i) {
        if (s[i] < s[n - 1 - i])
            return -1;
        if (s[i] > s[n - 1 - i])
            return 1;
    }
    return 0;
}

double fold_along(const EntityGraph& g, const std::vector<NodeId>& nodes, const LabelSeq& seq) {
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

// Independent enumeration of the record contract: every simple
// reference-disjoint path of length <= L, one record per label assignment,
// canonical orientation, kept when prLE * prN >= keep_at.
Ground brute_force_paths(const EntityGraph& g, size_t L, double keep_at) {
    Ground out;
    std::vector<NodeId> path;
    LabelSeq seq;

    auto emit_labels = [&](auto&& self, size_t i) -> void {
        if (i == path.size()) {
            int so = self_order_of(seq);
            if (path.size() > 1) {
                if (so > 0)
                    return;  // stored under the reverse orientation
                if (so == 0 && path.front() > path.back())
                    return;  // palindrome: smaller endpoint first
            }
            double prle = fold_along(g, path, seq);
            if (prle <= 0.0)
                return;
            double prn = node_existence_marginal(g, path);
            if (prle * prn < keep_at)
                return;
            out[seq][path] = {prle, prn};
            return;
        }
        for (LabelId l : g.nodes[path[i]].support) {
            seq[i] = l;
            self(self, i + 1);
        }
    };

    auto extend = [&](auto&& self) -> void {
        seq.assign(path.size(), 0);
        emit_labels(emit_labels, 0);
        if (path.size() == L + 1)
            return;
        NodeId tail = path.back();
        for (auto [w, e] : g.adj[tail]) {
            (void)e;
            bool ok = true;
            for (NodeId u : path)
                ok = ok && u != w && g.refs_disjoint(u, w);
            if (!ok)
                continue;
            path.push_back(w);
            self(self);
            path.pop_back();
        }
    };

    for (NodeId v = 0; v < g.nodes.size(); ++v) {
        path.assign(1, v);
        extend(extend);
    }
    return out;
}

Ground index_records(const PathIndex& idx) {
    Ground out;
    idx.for_each_group([&](const LabelSeq& seq, const PathGroup& pg) {
        for (uint64_t i = 0; i < pg.total(); ++i) {
            const NodeId* n = pg.rec_nodes(i);
            std::vector<NodeId> nodes(n, n + pg.plen + 1);
            out[seq][nodes] = {pg.pr_le[i - pg.loaded_base], pg.pr_n[i - pg.loaded_base]};
        }
    });
    return out;
}

// Index contents equal brute force bit for bit; records sit in their
// buckets; reversed lookups return the same records with nodes flipped.
void check_index(Check& c) {
    for (uint64_t i = 0; i < 50; ++i) {
        GenParams gp;
        size_t shape = i % 3;
        if (shape == 0) {
            gp.n_refs = 200 + (i * 7919) % 260;
            gp.uncertain_fraction = 0.25;
        } else if (shape == 1) {
            gp.n_refs = 120 + (i * 7919) % 160;
            gp.uncertain_fraction = 0.5;
        } else {
            gp.n_refs = 60 + (i * 7919) % 80;
            gp.uncertain_fraction = 0.75;
        }
        gp.n_edges = shape == 0 ? gp.n_refs * 5 / 2 : gp.n_refs * 2;
        gp.n_labels = 3;
        gp.k_groups = 3;
        gp.group_size = 8;
        gp.pairs_per_group = 2;
        gp.correlated = i % 5 == 0;
        gp.seed = 7000 + i;
        EntityGraph g = build_entity_graph(generate_pgd(gp));
        c.expect(g.nodes.size() <= 500, "fixture exceeds 500 nodes");

        PathIndex idx = build_path_index(g, 3, 0.1, 0.1);
        Ground want = brute_force_paths(g, 3, 0.1 - kPruneSlack);
        Ground got = index_records(idx);
        c.expect(got.size() == want.size(),
                 fmt("graph %llu: %zu sequences, expected %zu", (unsigned long long)i,
                     got.size(), want.size()));
        if (got.size() == want.size()) {
            auto ia = got.begin();
            auto ib = want.begin();
            for (; ia != got.end(); ++ia, ++ib) {
                bool same = ia->first == ib->first && ia->second.size() == ib->second.size();
                if (same)
                    for (auto ja = ia->second.begin(), jb = ib->second.begin();
                         same && ja != ia->second.end(); ++ja, ++jb)
                        same = ja->first == jb->first && ja->second.pr_le == jb->second.pr_le &&
                               ja->second.pr_n == jb->second.pr_n;
                c.expect(same, fmt("graph %llu: record group differs", (unsigned long long)i));
                if (!same)
                    break;
            }
        }

        idx.for_each_group([&](const LabelSeq& seq, const PathGroup& pg) {
            (void)seq;
            for (size_t k = 0; k + 1 < pg.bucket_begin.size(); ++k)
                for (uint64_t r = pg.bucket_begin[k]; r < pg.bucket_begin[k + 1]; ++r)
                    c.expect(idx.bucket_of(pg.pr_le[r] * pg.pr_n[r]) == k,
                             fmt("graph %llu: record outside its bucket",
                                 (unsigned long long)i));
        });

        for (const auto& [seq, recs] : got) {
            (void)recs;
            LookupResult fwd = idx.lookup(seq, 0.1);
            LabelSeq rev(seq.rbegin(), seq.rend());
            LookupResult bwd = idx.lookup(rev, 0.1);
            c.expect(bwd.count == fwd.count,
                     fmt("graph %llu: reversal changes the count", (unsigned long long)i));
            if (bwd.count != fwd.count)
                continue;
            bool palin = rev == seq;
            std::map<std::vector<NodeId>, std::pair<double, double>> seen;
            for (size_t r = 0; r < bwd.count; ++r)
                seen[{bwd.rec(r), bwd.rec(r) + bwd.plen + 1}] = {bwd.pr_le[r], bwd.pr_n[r]};
            for (size_t r = 0; r < fwd.count; ++r) {
                std::vector<NodeId> nodes(fwd.rec(r), fwd.rec(r) + fwd.plen + 1);
                if (!palin)
                    std::reverse(nodes.begin(), nodes.end());
                auto it = seen.find(nodes);
                c.expect(it != seen.end() && it->second.first == fwd.pr_le[r] &&
                             it->second.second == fwd.pr_n[r],
                         fmt("graph %llu: reversal is not a bijection", (unsigned long long)i));
            }
        }
    }
}

// ---------------------------------------------------------------- check 5

// On abstract instances small enough to enumerate: after reduction, every
// survivor's bound dominates the best full assignment through it, and
// parallel reduction keeps exactly the sequential survivors. A full
// assignment's probability is capped by every partition's existence
// marginal (a superset of nodes cannot exist more often than a subset),
// so its abstract value is min over partitions of w2 times the w1 product.
void check_bounds(Check& c) {
    for (uint64_t seed = 0; seed < 50; ++seed) {
        KPartiteGraph kpg = random_instance(seed + 300, 20);
        double alpha = seed % 2 ? 0.25 : 0.05;

        std::vector<std::vector<double>> best(kpg.k);
        for (size_t i = 0; i < kpg.k; ++i)
            best[i].assign(kpg.part_size(i), 0.0);
        std::vector<uint32_t> pick(kpg.k);
        consistent_tuples(kpg, pick, 0, [&](const std::vector<uint32_t>& t) {
            double w1p = 1.0;
            double w2min = 1.0;
            for (size_t j = 0; j < kpg.k; ++j) {
                w1p *= kpg.w1[j][t[j]];
                w2min = std::min(w2min, kpg.w2[j][t[j]]);
            }
            double full = w2min * w1p;
            for (size_t i = 0; i < kpg.k; ++i)
                best[i][t[i]] = std::max(best[i][t[i]], full);
        });

        KPartiteGraph seq = kpg;
        KPartiteGraph par = kpg;
        joint_reduce(seq, alpha, 1);
        joint_reduce(par, alpha, 4);
        for (size_t i = 0; i < kpg.k; ++i)
            for (uint32_t v = 0; v < kpg.part_size(i); ++v) {
                c.expect(seq.alive[i][v] == par.alive[i][v],
                         fmt("seed %llu: thread counts disagree on survivor (%zu, %u)",
                             (unsigned long long)seed, i, v));
                if (seq.alive[i][v])
                    c.expect(seq.bound(i, v) >= best[i][v] - 1e-12,
                             fmt("seed %llu: bound %.12f under best %.12f at (%zu, %u)",
                                 (unsigned long long)seed, seq.bound(i, v), best[i][v], i, v));
            }
    }
}

// ---------------------------------------------------------------- check 6

// On a 10k-reference graph: per query and depth, the search space shrinks
// monotonically across the lookup, context and reduction stages, and the
// reduced space at depth 3 never exceeds depth 1. The index floor is 0.5:
// queries run at 0.7, so the pruned records can never be answers.
void check_trend(Check& c) {
    GenParams gp;
    gp.n_refs = 10000;
    gp.n_labels = 5;
    gp.seed = 42;
    Pgd p = generate_pgd(gp);
    EntityGraph g = build_entity_graph(p);
    ContextTable ctx = compute_context(g);

    std::vector<QueryGraph> queries;
    for (int i = 0; i < 5; ++i)
        queries.push_back(generate_query(5, 7, p.labels, 0.7, 9000 + i));

    std::array<std::array<double, 3>, 5> finals{};
    for (size_t L = 1; L <= 3; ++L) {
        PathIndex idx = build_path_index(g, L, 0.5, 0.1);
        Histogram h = build_histograms(idx);
        for (int i = 0; i < 5; ++i) {
            QueryResult r = answer_query(g, idx, h, ctx, queries[i]);
            c.expect(r.stats.path_ctx_size <= r.stats.path_size,
                     fmt("L=%zu query %d: context stage grew the space", L, i));
            c.expect(r.stats.final_size <= r.stats.path_ctx_size,
                     fmt("L=%zu query %d: reduction grew the space", L, i));
            finals[i][L - 1] = r.stats.final_size;
        }
    }
    for (int i = 0; i < 5; ++i)
        c.expect(finals[i][2] <= finals[i][0],
                 fmt("query %d: reduced space at L=3 (%.0f) exceeds L=1 (%.0f)", i,
                     finals[i][2], finals[i][0]));
}

// ---------------------------------------------------------------- check 7

// 100k-reference graph: the depth-2 artifact build stays under 30 minutes,
// a 5-node 9-edge query at 0.7 answers in under a minute, and thread
// counts do not change the answer.
void check_scale(Check& c) {
    GenParams gp;
    gp.n_refs = 100000;
    gp.n_labels = 8;
    gp.seed = 11;

    auto t0 = std::chrono::steady_clock::now();
    Pgd p = generate_pgd(gp);
    EntityGraph g = build_entity_graph(p);
    ContextTable ctx = compute_context(g);
    PathIndex idx = build_path_index(g, 2, 0.1, 0.1, 4);
    Histogram h = build_histograms(idx);
    double build_s = seconds_since(t0);
    c.expect(build_s < 1800.0, fmt("build took %.0f s, budget 1800 s", build_s));

    QueryGraph q = generate_query(5, 9, p.labels, 0.7, 77);
    t0 = std::chrono::steady_clock::now();
    QueryResult r1 = answer_query(g, idx, h, ctx, q, EngineOptions{1});
    double query_s = seconds_since(t0);
    c.expect(query_s < 60.0, fmt("query took %.1f s, budget 60 s", query_s));

    QueryResult r4 = answer_query(g, idx, h, ctx, q, EngineOptions{4});
    c.expect(r4.matches.size() == r1.matches.size(),
             fmt("thread counts disagree: %zu vs %zu matches", r1.matches.size(),
                 r4.matches.size()));
    if (r4.matches.size() == r1.matches.size())
        for (size_t i = 0; i < r1.matches.size(); ++i) {
            c.expect(r4.matches[i].mapping == r1.matches[i].mapping,
                     fmt("thread counts disagree on mapping %zu", i));
            c.expect(r4.matches[i].probability == r1.matches[i].probability,
                     fmt("thread counts disagree on probability %zu", i));
        }
}

// ---------------------------------------------------------------- check 8

std::vector<char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Every artifact reloads to an equal in-memory state (the graph also
// re-serializes byte for byte) and 100 random lookups are unchanged after
// reopening the index from disk.
void check_persistence(Check& c) {
    GenParams gp;
    gp.n_refs = 1500;
    gp.n_labels = 4;
    gp.uncertain_fraction = 0.4;
    gp.k_groups = 5;
    gp.seed = 23;
    Pgd p = generate_pgd(gp);
    Pipeline pl(p, 3);

    fs::path dir = fs::temp_directory_path() / ("peg_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto sub = [&](const char* n) { return (dir / n).string(); };

    save_entity_graph(pl.g, sub("graph"));
    save_context(pl.ctx, sub("context"));
    save_path_index(pl.idx, sub("index"));
    save_histogram(pl.h, sub("histogram"));

    EntityGraph g = load_entity_graph(sub("graph"));
    save_entity_graph(g, sub("graph2"));
    c.expect(slurp(sub("graph") + "/data.bin") == slurp(sub("graph2") + "/data.bin"),
             "graph re-serialization differs");
    c.expect(g.fingerprint == pl.g.fingerprint, "graph fingerprint changed");

    ContextTable ctx = load_context(sub("context"), g.fingerprint);
    bool cells_equal = ctx.nlabels == pl.ctx.nlabels && ctx.cells.size() == pl.ctx.cells.size();
    for (size_t i = 0; cells_equal && i < ctx.cells.size(); ++i)
        cells_equal = ctx.cells[i].c == pl.ctx.cells[i].c &&
                      ctx.cells[i].ppu == pl.ctx.cells[i].ppu &&
                      ctx.cells[i].fpu == pl.ctx.cells[i].fpu;
    c.expect(cells_equal, "context cells changed across the round trip");

    PathIndex idx = load_path_index(sub("index"));
    Histogram h = load_histogram(sub("histogram"), idx.fingerprint);
    c.expect(h.points == pl.h.points && h.counts == pl.h.counts,
             "histogram changed across the round trip");
    c.expect(idx.total_records() == pl.idx.total_records(), "record count changed");

    std::vector<LabelSeq> seqs;
    for (const auto& [seq, grp] : pl.idx.groups) {
        (void)grp;
        seqs.push_back(seq);
    }
    c.expect(!seqs.empty(), "index is empty");
    Rng rng(99);
    for (int t = 0; t < 100 && !seqs.empty(); ++t) {
        const LabelSeq& seq = seqs[rng.uniform_int(seqs.size())];
        double alpha = 0.1 + 0.9 * rng.uniform();
        LookupResult a = pl.idx.lookup(seq, alpha);
        LookupResult b = idx.lookup(seq, alpha);
        c.expect(a.plen == b.plen && a.count == b.count && a.nodes == b.nodes &&
                     a.pr_le == b.pr_le && a.pr_n == b.pr_n,
                 fmt("lookup %d differs after reopen", t));
    }
    fs::remove_all(dir);
}

struct Criterion {
    const char* name;
    void (*run)(Check&);
    double budget_s;  // 0: no overall budget
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {"hand-checked fixture: merges and match probability", check_fixture, 1.0},
        {"engine matches the exhaustive oracle", check_oracle, 300.0},
        {"path index equals brute-force enumeration", check_index, 120.0},
        {"true answers survive every pruning stage", check_stages, 0.0},
        {"perception bounds dominate; reductions confluent", check_bounds, 0.0},
        {"search space shrinks across stages and depths", check_trend, 600.0},
        {"large-graph build and query within budget", check_scale, 0.0},
        {"artifacts round-trip and reopen identically", check_persistence, 0.0},
    };

    int failed = 0;
    int n = 0;
    for (const Criterion& cr : criteria) {
        ++n;
        Check c;
        auto t0 = std::chrono::steady_clock::now();
        try {
            cr.run(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        double s = seconds_since(t0);
        if (c.ok && cr.budget_s > 0.0 && s > cr.budget_s)
            c.expect(false, fmt("runtime %.1f s exceeds the %.0f s budget", s, cr.budget_s));
        std::printf("%s  %d. %s (%.1f s, %zu checks)\n", c.ok ? "PASS" : "FAIL", n, cr.name,
                    s, c.done);
        if (!c.ok) {
            std::printf("      first failure: %s\n", c.why.c_str());
            ++failed;
        }
        std::fflush(stdout);
    }
    std::printf("%d/8 criteria passed\n", 8 - failed);
    return failed;
}
