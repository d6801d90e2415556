#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "peg/context.hpp"
#include "peg/decompose.hpp"
#include "peg/path_index.hpp"

namespace peg {

// Candidate entities per query node, as a bitmap over graph nodes.
struct NodeCandidates {
    std::vector<std::vector<uint8_t>> in;  // [query node][entity]

    bool contains(uint32_t n, NodeId v) const { return in[n][v] != 0; }
    size_t count(uint32_t n) const;
};

// v is a candidate for n iff n's label is in v's support, v dominates n's
// per-label neighbor counts, and for every label s
//   Pr(v.l = l(n)) * fpu(v, s)^c(n, s) >= alpha.
NodeCandidates node_candidates(const EntityGraph& g, const ContextTable& ctx,
                               const BoundQuery& bq, const QueryStats& stats, double alpha);

// Candidate assignments for one decomposition path, node sequences aligned
// to the path's query-node order.
struct CandidateSet {
    uint32_t plen = 0;
    std::vector<NodeId> nodes;
    std::vector<double> pr_le;
    std::vector<double> pr_n;

    size_t size() const { return pr_le.size(); }
    const NodeId* rec(size_t i) const { return nodes.data() + i * (plen + 1); }
};

// Filters raw lookup records: every node must be a node candidate, and
// prLE * prN * pu * cpr must reach alpha, where pu bounds the factors of
// off-path neighbors and cpr multiplies the existence of cycle-closing
// edges (a missing edge discards the record). Records under palindromic
// label sequences contribute both orientations.
CandidateSet path_candidates(const EntityGraph& g, const ContextTable& ctx,
                             const BoundQuery& bq, const QueryStats& stats,
                             const QPath& path, const PathContext& pctx,
                             const LookupResult& raw, const NodeCandidates& nc,
                             double alpha);

// Lookup table over a candidate set, keyed by the entities at the join
// positions shared with one partner path.
struct JoinTable {
    std::vector<uint32_t> positions;  // positions on the owning path
    std::unordered_map<uint64_t, std::vector<uint32_t>> rows;  // key hash -> record idx

    static uint64_t key_of(const NodeId* rec, const std::vector<uint32_t>& positions);
};

JoinTable build_join_table(const CandidateSet& cs, const std::vector<uint32_t>& positions);

// Join compatibility of two candidate records: shared positions agree, all
// distinct nodes of the union are pairwise reference-disjoint, and the
// probability of the joined subgraph reaches alpha.
bool join_compatible(const EntityGraph& g, const BoundQuery& bq, const Decomposition& d,
                     uint32_t pa, const NodeId* ra, uint32_t pb, const NodeId* rb,
                     double alpha);

// cn(P1, P1u, P2): partner records joinable with record `ria` of path pa.
std::vector<uint32_t> join_candidates(const EntityGraph& g, const BoundQuery& bq,
                                      const Decomposition& d, uint32_t pa,
                                      const CandidateSet& ca, size_t ria, uint32_t pb,
                                      const CandidateSet& cb, const JoinTable& tb,
                                      double alpha);

}  // namespace peg
