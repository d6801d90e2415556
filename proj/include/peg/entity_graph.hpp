#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peg/pgd.hpp"

namespace peg {

// Merged edge existence distribution. Scalar unless the source document
// conditions edges on endpoint labels, in which case cpt holds a dense
// |labels|^2 table oriented (label of u, label of v).
struct EdgeDist {
    bool correlated = false;
    double p = 0.0;
    std::vector<double> cpt;

    double at(LabelId lu, LabelId lv, size_t nlabels) const {
        return correlated ? cpt[static_cast<size_t>(lu) * nlabels + lv] : p;
    }
    double max_entry() const;
};

struct EntityNode {
    std::string id;
    std::vector<RefId> refs;          // sorted
    std::vector<double> label_dist;   // dense over graph labels
    std::vector<LabelId> support;     // labels with positive probability
    bool declared = false;            // carries an explicit set probability
    double set_p = 1.0;
    uint32_t component = 0;
    uint32_t slot = 0;                // bit position inside its component
};

struct EntityEdge {
    NodeId u = 0, v = 0;              // u < v
    EdgeDist dist;
};

struct ComponentConfig {
    uint32_t mask = 0;                // bit i set <=> component.nodes[i] exists
    double pr = 0.0;                  // normalized
};

// Connected component of the node-existence network. configs lists every
// subset of the component's entities that covers each component reference
// exactly once, with its normalized probability.
struct IdentityComponent {
    std::vector<NodeId> nodes;
    std::vector<ComponentConfig> configs;
    double zn = 0.0;                  // pre-normalization mass
};

struct EntityGraph {
    std::vector<std::string> labels;
    std::vector<std::string> ref_ids;
    std::vector<EntityNode> nodes;
    std::vector<EntityEdge> edges;
    // Per node: (neighbor, edge index), sorted by neighbor.
    std::vector<std::vector<std::pair<NodeId, uint32_t>>> adj;
    std::vector<IdentityComponent> components;
    std::vector<std::vector<NodeId>> sets_of_ref;  // reference -> entities containing it
    bool correlated = false;
    MergeKind merge_labels = MergeKind::Average;
    MergeKind merge_edges = MergeKind::Average;
    uint64_t fingerprint = 0;

    size_t label_count() const { return labels.size(); }
    const EdgeDist* edge_between(NodeId a, NodeId b) const;
    std::optional<uint32_t> edge_index_between(NodeId a, NodeId b) const;
    // Existence probability of edge e conditioned on endpoint labels, with
    // `from` naming which endpoint carries label lf.
    double edge_pr(uint32_t e, NodeId from, LabelId lf, LabelId lt) const;
    // Max of edge e's existence entries over the labels of `from`, with the
    // other endpoint's label fixed.
    double edge_pr_max_from(uint32_t e, NodeId from, LabelId lt) const;
    std::optional<NodeId> node_by_id(const std::string& id) const;
    std::optional<LabelId> label_by_name(const std::string& name) const;
    bool refs_disjoint(NodeId a, NodeId b) const;
};

// Materializes the entity graph: one node per reference set (implicit
// singletons included), merged label and edge distributions, and exact
// per-component configuration tables. Components larger than component_cap
// entities are a hard error, as is a component whose total mass is zero.
EntityGraph build_entity_graph(const Pgd& pgd, size_t component_cap = 20);

// Pr(all nodes in `nodes` exist), read from the configuration tables.
// Nodes from the same component that share a reference yield 0.
double node_existence_marginal(const EntityGraph& g, std::span<const NodeId> nodes);

}  // namespace peg
