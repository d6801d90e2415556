#pragma once

#include <cstdint>
#include <vector>

#include "peg/entity_graph.hpp"

namespace peg {

// Context of node v for label s, over the reference-disjoint neighbors of
// v that carry s in their label support:
//   c    how many such neighbors exist
//   ppu  max existence probability of an edge to one of them
//   fpu  max of (neighbor's probability of s) * (edge existence)
// With label-conditioned edges, existence entries are maximized over the
// labels of v (the neighbor's side is fixed to s).
struct ContextCell {
    uint32_t c = 0;
    double ppu = 0.0;
    double fpu = 0.0;
};

struct ContextTable {
    size_t nlabels = 0;
    std::vector<ContextCell> cells;  // node * nlabels + label
    uint64_t fingerprint = 0;

    const ContextCell& at(NodeId v, LabelId s) const {
        return cells[static_cast<size_t>(v) * nlabels + s];
    }
};

ContextTable compute_context(const EntityGraph& g);

}  // namespace peg
