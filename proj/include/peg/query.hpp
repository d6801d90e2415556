#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "peg/common.hpp"
#include "peg/entity_graph.hpp"

namespace peg {

struct QueryNode {
    std::string id;
    std::string label;
};

// Connected simple query graph with a probability threshold.
struct QueryGraph {
    std::vector<QueryNode> nodes;
    std::vector<std::pair<uint32_t, uint32_t>> edges;  // node indices, u < v
    double alpha = 0.0;
};

// Checks ids, connectivity, simplicity and alpha range; throws Error.
void check_query(const QueryGraph& q);

// Query with labels resolved against a graph's alphabet plus adjacency.
// Resolution fails (nullopt) when a query label is absent from the graph,
// in which case the answer set is empty by definition.
struct BoundQuery {
    const QueryGraph* q = nullptr;
    std::vector<LabelId> label;                        // per query node
    std::vector<std::vector<uint32_t>> adj;            // neighbor node indices
    std::vector<std::vector<uint32_t>> adj_edge;       // parallel: edge indices
    double alpha = 0.0;

    size_t size() const { return label.size(); }
    bool has_edge(uint32_t a, uint32_t b) const;
    std::optional<uint32_t> edge_index(uint32_t a, uint32_t b) const;
};

std::optional<BoundQuery> bind_query(const QueryGraph& q, const EntityGraph& g);

// A match is the mapping itself: mapping[i] is the entity assigned to
// query node i. Distinct mappings over the same node set are distinct
// matches.
struct Match {
    std::vector<NodeId> mapping;
    double pr_le = 0.0;
    double pr_n = 0.0;
    double probability = 0.0;
};

// Exact match probability: label and edge factors times the existence
// marginal of the mapped node set. Mappings that reuse a reference
// (including mapping two query nodes to one entity) score 0; a missing
// graph edge under a query edge scores 0.
Match match_probability(const EntityGraph& g, const BoundQuery& bq,
                        const std::vector<NodeId>& mapping);

// Canonical result order: probability descending, then mapped entity ids.
void sort_matches(const EntityGraph& g, std::vector<Match>& ms);

}  // namespace peg
