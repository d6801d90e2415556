#include "peg/worlds.hpp"

#include <algorithm>

namespace peg {

namespace {

struct Walker {
    const EntityGraph& g;
    uint64_t cap;
    uint64_t count = 0;
    bool overflow = false;
    std::vector<PossibleWorld>* out = nullptr;

    std::vector<NodeId> vnodes;
    std::vector<LabelId> vlabels;
    std::vector<std::pair<std::pair<NodeId, NodeId>, uint32_t>> cand_edges;
    std::vector<std::pair<NodeId, NodeId>> chosen_edges;

    void leaf(double pr) {
        if (++count > cap) {
            overflow = true;
            return;
        }
        if (out) {
            PossibleWorld w;
            w.nodes = vnodes;
            w.labels = vlabels;
            w.edges = chosen_edges;
            w.pr = pr;
            out->push_back(std::move(w));
        }
    }

    void walk_edges(size_t i, double pr) {
        if (overflow)
            return;
        if (i == cand_edges.size()) {
            leaf(pr);
            return;
        }
        auto [uv, eidx] = cand_edges[i];
        auto pos_u = std::lower_bound(vnodes.begin(), vnodes.end(), uv.first) - vnodes.begin();
        auto pos_v = std::lower_bound(vnodes.begin(), vnodes.end(), uv.second) - vnodes.begin();
        double p = g.edge_pr(eidx, uv.first, vlabels[pos_u], vlabels[pos_v]);
        if (p > 0.0) {
            chosen_edges.push_back(uv);
            walk_edges(i + 1, pr * p);
            chosen_edges.pop_back();
        }
        if (p < 1.0)
            walk_edges(i + 1, pr * (1.0 - p));
    }

    void walk_labels(size_t i, double pr) {
        if (overflow)
            return;
        if (i == vnodes.size()) {
            walk_edges(0, pr);
            return;
        }
        const EntityNode& n = g.nodes[vnodes[i]];
        for (LabelId l : n.support) {
            vlabels[i] = l;
            walk_labels(i + 1, pr * n.label_dist[l]);
        }
    }

    void at_node_set(double pr) {
        std::sort(vnodes.begin(), vnodes.end());
        cand_edges.clear();
        for (size_t i = 0; i < vnodes.size(); ++i)
            for (size_t j = i + 1; j < vnodes.size(); ++j) {
                auto e = g.edge_index_between(vnodes[i], vnodes[j]);
                if (e)
                    cand_edges.push_back({{vnodes[i], vnodes[j]}, *e});
            }
        vlabels.assign(vnodes.size(), 0);
        walk_labels(0, pr);
    }

    void walk_components(size_t c, double pr) {
        if (overflow)
            return;
        if (c == g.components.size()) {
            std::vector<NodeId> saved = vnodes;
            at_node_set(pr);
            vnodes = std::move(saved);
            return;
        }
        const IdentityComponent& comp = g.components[c];
        for (const auto& cfg : comp.configs) {
            if (cfg.pr <= 0.0)
                continue;
            size_t before = vnodes.size();
            for (size_t i = 0; i < comp.nodes.size(); ++i)
                if ((cfg.mask >> i) & 1u)
                    vnodes.push_back(comp.nodes[i]);
            walk_components(c + 1, pr * cfg.pr);
            vnodes.resize(before);
        }
    }
};

}  // namespace

uint64_t count_possible_worlds(const EntityGraph& g, uint64_t cap) {
    Walker w{g, cap, 0, false, nullptr, {}, {}, {}, {}};
    w.walk_components(0, 1.0);
    return w.overflow ? cap + 1 : w.count;
}

std::vector<PossibleWorld> enumerate_possible_worlds(const EntityGraph& g, uint64_t cap) {
    if (count_possible_worlds(g, cap) > cap)
        throw Error("possible world count exceeds the enumeration cap of " + std::to_string(cap));
    std::vector<PossibleWorld> worlds;
    Walker w{g, cap, 0, false, nullptr, {}, {}, {}, {}};
    w.out = &worlds;
    w.walk_components(0, 1.0);
    return worlds;
}

}  // namespace peg
