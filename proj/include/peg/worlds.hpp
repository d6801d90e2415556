#pragma once

#include <cstdint>
#include <vector>

#include "peg/entity_graph.hpp"

namespace peg {

// One possible world: the exact set of existing entities, their labels,
// and the exact edge set among them. Worlds with probability 0 are not
// emitted; emitted probabilities sum to 1.
struct PossibleWorld {
    std::vector<NodeId> nodes;                          // sorted
    std::vector<LabelId> labels;                        // parallel to nodes
    std::vector<std::pair<NodeId, NodeId>> edges;       // (u, v), u < v
    double pr = 0.0;
};

inline constexpr uint64_t kDefaultWorldCap = 1ull << 22;

// Predicted number of worlds; stops counting once `cap` is exceeded and
// returns cap + 1 in that case.
uint64_t count_possible_worlds(const EntityGraph& g, uint64_t cap = kDefaultWorldCap);

// Exhaustive enumeration. Throws Error when the predicted world count
// exceeds cap.
std::vector<PossibleWorld> enumerate_possible_worlds(const EntityGraph& g,
                                                     uint64_t cap = kDefaultWorldCap);

}  // namespace peg
