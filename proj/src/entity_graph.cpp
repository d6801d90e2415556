#include "peg/entity_graph.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <unordered_map>

namespace peg {

namespace {

// Union-find over reference indices.
struct DisjointSets {
    std::vector<uint32_t> parent;

    explicit DisjointSets(size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0u);
    }
    uint32_t find(uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(uint32_t a, uint32_t b) { parent[find(a)] = find(b); }
};

struct EdgeContribution {
    bool correlated = false;
    double p = 0.0;
    const std::vector<std::pair<std::pair<std::string, std::string>, double>>* cpt = nullptr;
    bool transposed = false;  // contribution oriented (v-side, u-side)
};

}  // namespace

double EdgeDist::max_entry() const {
    if (!correlated)
        return p;
    double m = 0.0;
    for (double v : cpt)
        m = std::max(m, v);
    return m;
}

const EdgeDist* EntityGraph::edge_between(NodeId a, NodeId b) const {
    auto idx = edge_index_between(a, b);
    return idx ? &edges[*idx].dist : nullptr;
}

std::optional<uint32_t> EntityGraph::edge_index_between(NodeId a, NodeId b) const {
    const auto& row = adj[a];
    auto it = std::lower_bound(row.begin(), row.end(), b,
                               [](const auto& pr, NodeId x) { return pr.first < x; });
    if (it == row.end() || it->first != b)
        return std::nullopt;
    return it->second;
}

double EntityGraph::edge_pr(uint32_t e, NodeId from, LabelId lf, LabelId lt) const {
    const EntityEdge& ed = edges[e];
    if (!ed.dist.correlated)
        return ed.dist.p;
    size_t n = labels.size();
    return from == ed.u ? ed.dist.cpt[static_cast<size_t>(lf) * n + lt]
                        : ed.dist.cpt[static_cast<size_t>(lt) * n + lf];
}

double EntityGraph::edge_pr_max_from(uint32_t e, NodeId from, LabelId lt) const {
    const EntityEdge& ed = edges[e];
    if (!ed.dist.correlated)
        return ed.dist.p;
    size_t n = labels.size();
    double m = 0.0;
    for (size_t lf = 0; lf < n; ++lf)
        m = std::max(m, from == ed.u ? ed.dist.cpt[lf * n + lt]
                                     : ed.dist.cpt[static_cast<size_t>(lt) * n + lf]);
    return m;
}

std::optional<NodeId> EntityGraph::node_by_id(const std::string& id) const {
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id)
            return static_cast<NodeId>(i);
    return std::nullopt;
}

std::optional<LabelId> EntityGraph::label_by_name(const std::string& name) const {
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == name)
            return static_cast<LabelId>(i);
    return std::nullopt;
}

bool EntityGraph::refs_disjoint(NodeId a, NodeId b) const {
    const auto& ra = nodes[a].refs;
    const auto& rb = nodes[b].refs;
    size_t i = 0, j = 0;
    while (i < ra.size() && j < rb.size()) {
        if (ra[i] == rb[j])
            return false;
        if (ra[i] < rb[j])
            ++i;
        else
            ++j;
    }
    return true;
}

namespace {

// All subsets of the component's entities that cover each component
// reference exactly once.
void enumerate_covers(const std::vector<const EntityNode*>& ents,
                      const std::vector<std::vector<uint32_t>>& ent_refs,
                      const std::vector<std::vector<uint32_t>>& holders, size_t nrefs,
                      std::vector<uint32_t>& masks) {
    std::vector<uint8_t> covered(nrefs, 0);
    uint32_t mask = 0;

    // Recursion on the first uncovered reference.
    auto rec = [&](auto&& self, size_t from) -> void {
        size_t r = from;
        while (r < nrefs && covered[r])
            ++r;
        if (r == nrefs) {
            masks.push_back(mask);
            return;
        }
        for (uint32_t ei : holders[r]) {
            bool free = true;
            for (uint32_t rr : ent_refs[ei])
                if (covered[rr]) {
                    free = false;
                    break;
                }
            if (!free)
                continue;
            for (uint32_t rr : ent_refs[ei])
                covered[rr] = 1;
            mask |= 1u << ei;
            self(self, r);
            mask &= ~(1u << ei);
            for (uint32_t rr : ent_refs[ei])
                covered[rr] = 0;
        }
    };
    rec(rec, 0);
    (void)ents;
}

}  // namespace

EntityGraph build_entity_graph(const Pgd& pgd, size_t component_cap) {
    EntityGraph g;
    g.labels = pgd.labels;
    g.merge_labels = pgd.merge_labels;
    g.merge_edges = pgd.merge_edges;
    g.fingerprint = pgd_fingerprint(pgd);
    size_t nl = g.labels.size();

    std::unordered_map<std::string, LabelId> label_idx;
    for (size_t i = 0; i < nl; ++i)
        label_idx.emplace(g.labels[i], static_cast<LabelId>(i));

    std::unordered_map<std::string, RefId> ref_idx;
    g.ref_ids.reserve(pgd.references.size());
    std::vector<std::vector<double>> ref_dist(pgd.references.size());
    for (size_t i = 0; i < pgd.references.size(); ++i) {
        const auto& r = pgd.references[i];
        if (!ref_idx.emplace(r.id, static_cast<RefId>(i)).second)
            throw Error("duplicate reference id '" + r.id + "'");
        g.ref_ids.push_back(r.id);
        auto& d = ref_dist[i];
        d.assign(nl, 0.0);
        for (const auto& [label, p] : r.dist) {
            auto it = label_idx.find(label);
            if (it == label_idx.end())
                throw Error("reference " + r.id + " names unknown label '" + label + "'");
            d[it->second] = p;
        }
    }
    size_t nrefs = g.ref_ids.size();

    // Entities: declared sets first, then implicit singletons for
    // references without a declared singleton.
    std::vector<uint8_t> has_declared_singleton(nrefs, 0);
    for (const auto& s : pgd.sets) {
        EntityNode n;
        n.id = s.id;
        n.declared = true;
        n.set_p = s.p;
        for (const auto& rid : s.refs) {
            auto it = ref_idx.find(rid);
            if (it == ref_idx.end())
                throw Error("reference set " + s.id + " names unknown reference '" + rid + "'");
            n.refs.push_back(it->second);
        }
        if (n.refs.empty())
            throw Error("reference set " + s.id + " lists no references");
        std::sort(n.refs.begin(), n.refs.end());
        if (n.refs.size() == 1)
            has_declared_singleton[n.refs[0]] = 1;
        g.nodes.push_back(std::move(n));
    }
    for (size_t r = 0; r < nrefs; ++r) {
        if (has_declared_singleton[r])
            continue;
        EntityNode n;
        n.id = g.ref_ids[r];
        n.declared = false;
        n.refs = {static_cast<RefId>(r)};
        g.nodes.push_back(std::move(n));
    }

    g.sets_of_ref.assign(nrefs, {});
    for (size_t e = 0; e < g.nodes.size(); ++e)
        for (RefId r : g.nodes[e].refs)
            g.sets_of_ref[r].push_back(static_cast<NodeId>(e));

    // Merged label distributions: arithmetic mean over member references.
    for (auto& n : g.nodes) {
        n.label_dist.assign(nl, 0.0);
        for (RefId r : n.refs)
            for (size_t l = 0; l < nl; ++l)
                n.label_dist[l] += ref_dist[r][l];
        for (size_t l = 0; l < nl; ++l) {
            n.label_dist[l] /= static_cast<double>(n.refs.size());
            if (n.label_dist[l] > 0.0)
                n.support.push_back(static_cast<LabelId>(l));
        }
    }

    // Merged edges: contributions of every declared reference pair between
    // two reference-disjoint entities.
    g.correlated = false;
    for (const auto& e : pgd.edges)
        if (e.dist.correlated)
            g.correlated = true;

    std::map<std::pair<NodeId, NodeId>, std::vector<EdgeContribution>> merged;
    for (const auto& e : pgd.edges) {
        auto iu = ref_idx.find(e.u);
        auto iv = ref_idx.find(e.v);
        if (iu == ref_idx.end() || iv == ref_idx.end())
            throw Error("edge (" + e.u + ", " + e.v + ") names an unknown reference");
        for (NodeId a : g.sets_of_ref[iu->second]) {
            for (NodeId b : g.sets_of_ref[iv->second]) {
                if (a == b || !g.refs_disjoint(a, b))
                    continue;
                NodeId lo = std::min(a, b), hi = std::max(a, b);
                EdgeContribution c;
                c.correlated = e.dist.correlated;
                c.p = e.dist.p;
                c.cpt = &e.dist.cpt;
                // Contribution oriented (u-ref side, v-ref side); transpose
                // when the u reference sits on the hi entity.
                c.transposed = (a != lo);
                merged[{lo, hi}].push_back(c);
            }
        }
    }

    for (auto& [key, contribs] : merged) {
        EdgeDist d;
        d.correlated = g.correlated;
        if (!g.correlated) {
            if (g.merge_edges == MergeKind::Average) {
                double sum = 0.0;
                for (const auto& c : contribs)
                    sum += c.p;
                d.p = sum / static_cast<double>(contribs.size());
            } else {
                double q = 1.0;
                for (const auto& c : contribs)
                    q *= 1.0 - c.p;
                d.p = 1.0 - q;
            }
        } else {
            d.cpt.assign(nl * nl, g.merge_edges == MergeKind::Average ? 0.0 : 1.0);
            for (const auto& c : contribs) {
                std::vector<double> table(nl * nl, 0.0);
                if (!c.correlated) {
                    std::fill(table.begin(), table.end(), c.p);
                } else {
                    for (const auto& [lp, p] : *c.cpt) {
                        auto la = label_idx.find(lp.first);
                        auto lb = label_idx.find(lp.second);
                        if (la == label_idx.end() || lb == label_idx.end())
                            throw Error("edge table names an unknown label");
                        size_t row = la->second, col = lb->second;
                        if (c.transposed)
                            std::swap(row, col);
                        table[row * nl + col] = p;
                    }
                }
                for (size_t i = 0; i < nl * nl; ++i) {
                    if (g.merge_edges == MergeKind::Average)
                        d.cpt[i] += table[i];
                    else
                        d.cpt[i] *= 1.0 - table[i];
                }
            }
            for (size_t i = 0; i < nl * nl; ++i) {
                if (g.merge_edges == MergeKind::Average)
                    d.cpt[i] /= static_cast<double>(contribs.size());
                else
                    d.cpt[i] = 1.0 - d.cpt[i];
            }
        }
        if (d.max_entry() <= 0.0)
            continue;
        EntityEdge edge;
        edge.u = key.first;
        edge.v = key.second;
        edge.dist = std::move(d);
        g.edges.push_back(std::move(edge));
    }

    g.adj.assign(g.nodes.size(), {});
    for (size_t i = 0; i < g.edges.size(); ++i) {
        g.adj[g.edges[i].u].push_back({g.edges[i].v, static_cast<uint32_t>(i)});
        g.adj[g.edges[i].v].push_back({g.edges[i].u, static_cast<uint32_t>(i)});
    }
    for (auto& row : g.adj)
        std::sort(row.begin(), row.end());

    // Identity components: entities connected via shared references.
    DisjointSets ds(nrefs);
    for (const auto& n : g.nodes)
        for (size_t i = 1; i < n.refs.size(); ++i)
            ds.unite(n.refs[0], n.refs[i]);

    std::unordered_map<uint32_t, uint32_t> comp_of_root;
    for (size_t e = 0; e < g.nodes.size(); ++e) {
        uint32_t root = ds.find(g.nodes[e].refs[0]);
        auto [it, fresh] = comp_of_root.emplace(root, static_cast<uint32_t>(g.components.size()));
        if (fresh)
            g.components.emplace_back();
        g.nodes[e].component = it->second;
        g.nodes[e].slot = static_cast<uint32_t>(g.components[it->second].nodes.size());
        g.components[it->second].nodes.push_back(static_cast<NodeId>(e));
    }

    for (auto& comp : g.components) {
        if (comp.nodes.size() > component_cap)
            throw Error("identity component around entity '" + g.nodes[comp.nodes[0]].id +
                        "' has " + std::to_string(comp.nodes.size()) +
                        " entities, above the cap of " + std::to_string(component_cap));
        // Component-local reference numbering.
        std::vector<RefId> comp_refs;
        for (NodeId e : comp.nodes)
            for (RefId r : g.nodes[e].refs)
                comp_refs.push_back(r);
        std::sort(comp_refs.begin(), comp_refs.end());
        comp_refs.erase(std::unique(comp_refs.begin(), comp_refs.end()), comp_refs.end());
        std::unordered_map<RefId, uint32_t> local;
        for (size_t i = 0; i < comp_refs.size(); ++i)
            local.emplace(comp_refs[i], static_cast<uint32_t>(i));

        std::vector<const EntityNode*> ents;
        std::vector<std::vector<uint32_t>> ent_refs(comp.nodes.size());
        std::vector<std::vector<uint32_t>> holders(comp_refs.size());
        for (size_t i = 0; i < comp.nodes.size(); ++i) {
            ents.push_back(&g.nodes[comp.nodes[i]]);
            for (RefId r : g.nodes[comp.nodes[i]].refs) {
                uint32_t lr = local[r];
                ent_refs[i].push_back(lr);
                holders[lr].push_back(static_cast<uint32_t>(i));
            }
        }

        std::vector<uint32_t> masks;
        enumerate_covers(ents, ent_refs, holders, comp_refs.size(), masks);

        // Weight: every declared set in the component is an independent
        // event; a valid cover takes p for members, 1-p for non-members.
        double zn = 0.0;
        comp.configs.clear();
        for (uint32_t mask : masks) {
            double w = 1.0;
            for (size_t i = 0; i < comp.nodes.size(); ++i) {
                const EntityNode& n = g.nodes[comp.nodes[i]];
                if (!n.declared)
                    continue;
                w *= (mask >> i) & 1u ? n.set_p : 1.0 - n.set_p;
            }
            comp.configs.push_back({mask, w});
            zn += w;
        }
        comp.zn = zn;
        if (zn <= 0.0)
            throw Error("identity component around entity '" + g.nodes[comp.nodes[0]].id +
                        "' has zero total probability mass");
        for (auto& cfg : comp.configs)
            cfg.pr /= zn;
    }

    return g;
}

double node_existence_marginal(const EntityGraph& g, std::span<const NodeId> nodes) {
    if (nodes.empty())
        return 1.0;
    // Group queried nodes into per-component masks. Insertion order keeps
    // the factor product deterministic; the stack array covers every
    // realistic path or query size without allocating.
    constexpr size_t kInline = 32;
    std::array<std::pair<uint32_t, uint32_t>, kInline> want;
    size_t nwant = 0;
    for (NodeId v : nodes) {
        if (v >= g.nodes.size())
            throw Error("node_existence_marginal: unknown node index");
        uint32_t comp = g.nodes[v].component;
        uint32_t bit = 1u << g.nodes[v].slot;
        size_t i = 0;
        while (i < nwant && want[i].first != comp)
            ++i;
        if (i == nwant) {
            if (nwant == kInline)
                throw Error("node_existence_marginal: more than 32 distinct components");
            want[nwant++] = {comp, bit};
        } else {
            want[i].second |= bit;
        }
    }
    double pr = 1.0;
    for (size_t i = 0; i < nwant; ++i) {
        const IdentityComponent& comp = g.components[want[i].first];
        // A node present in every configuration adds nothing to the mask's
        // constraint, so single-config components short-circuit below.
        double m = 0.0;
        for (const auto& cfg : comp.configs)
            if ((cfg.mask & want[i].second) == want[i].second)
                m += cfg.pr;
        pr *= m;
        if (pr == 0.0)
            return 0.0;
    }
    return pr;
}

}  // namespace peg
