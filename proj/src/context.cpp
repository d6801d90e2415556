#include "peg/context.hpp"

namespace peg {

ContextTable compute_context(const EntityGraph& g) {
    ContextTable t;
    t.nlabels = g.label_count();
    t.fingerprint = g.fingerprint;
    t.cells.assign(g.nodes.size() * t.nlabels, {});

    for (NodeId v = 0; v < g.nodes.size(); ++v) {
        ContextCell* row = t.cells.data() + static_cast<size_t>(v) * t.nlabels;
        for (const auto& [w, e] : g.adj[v]) {
            if (!g.refs_disjoint(v, w))
                continue;
            const EntityNode& nb = g.nodes[w];
            for (LabelId s : nb.support) {
                double pe = g.edge_pr_max_from(e, v, s);
                ContextCell& cell = row[s];
                cell.c += 1;
                cell.ppu = std::max(cell.ppu, pe);
                cell.fpu = std::max(cell.fpu, nb.label_dist[s] * pe);
            }
        }
    }
    return t;
}

}  // namespace peg
