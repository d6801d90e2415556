#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "peg/candidates.hpp"

namespace peg {

// Links from one partition to one joined partner, CSR over the partition's
// vertices. Links are fixed at construction; deletion is the alive flag.
struct LinkSet {
    std::vector<uint64_t> off;   // size = vertex count + 1
    std::vector<uint32_t> nbr;

    std::span<const uint32_t> of(uint32_t v) const {
        return {nbr.data() + off[v], nbr.data() + off[v + 1]};
    }
};

// k-partite candidate graph: one partition per decomposition path, one
// vertex per surviving candidate assignment. Each vertex carries
//   w1   product of the label/edge factors its path covers
//   w2   existence marginal of its path's nodes
// and a perception vector with one entry per partition: its own entry is
// pinned to w1, the others are upper bounds on what that partition can
// contribute to a completion through this vertex.
struct KPartiteGraph {
    size_t k = 0;
    std::vector<std::vector<double>> w1;
    std::vector<std::vector<double>> w2;
    std::vector<std::vector<uint8_t>> alive;
    std::vector<std::vector<uint32_t>> partners;   // joined partition ids, sorted
    std::vector<std::vector<LinkSet>> links;       // [partition][partner slot]
    std::vector<std::vector<double>> percep;       // [partition][v * k + t]

    size_t part_size(size_t i) const { return w1[i].size(); }
    size_t alive_count(size_t i) const;
    void init_perceptions();
    double bound(size_t i, uint32_t v) const;      // w2 * product of perception row
};

// Builds the k-partite graph over candidate sets; vertices are linked iff
// join-compatible at alpha.
struct KPartiteBuild {
    KPartiteGraph kpg;
    // vertex -> (record index in the candidate set). Identity unless a
    // candidate set was filtered.
    std::vector<std::vector<uint32_t>> vertex_record;
};

KPartiteBuild build_kpartite(const EntityGraph& g, const BoundQuery& bq,
                             const Decomposition& d,
                             const std::vector<CandidateSet>& cands, double alpha);

// Deletes vertices lacking an alive neighbor in some joined partition,
// cascading to a fixpoint. Returns deletions.
size_t reduce_structure(KPartiteGraph& kpg);

// Perception message passing to fixpoint; deletes vertices whose bound
// falls below alpha. Returns deletions.
size_t reduce_upperbounds(KPartiteGraph& kpg, double alpha);

// Alternates both reductions incrementally until nothing changes. The
// survivor set is schedule-independent; threads > 1 runs synchronized
// parallel rounds and yields the same survivors as sequential.
size_t joint_reduce(KPartiteGraph& kpg, double alpha, unsigned threads = 1);

}  // namespace peg
