#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "peg/entity_graph.hpp"

namespace peg {

using LabelSeq = std::vector<LabelId>;

// Lexicographically smaller of seq and its reverse.
LabelSeq canonical_label_seq(const LabelSeq& seq);
bool label_seq_palindromic(const LabelSeq& seq);

// Paths matching one queried label sequence, node sequences oriented to
// the query. Record i occupies nodes[i*(plen+1) .. (i+1)*(plen+1)).
struct LookupResult {
    uint32_t plen = 0;
    size_t count = 0;
    std::vector<NodeId> nodes;
    std::vector<double> pr_le;
    std::vector<double> pr_n;

    const NodeId* rec(size_t i) const { return nodes.data() + i * (plen + 1); }
};

// Records of one canonical label sequence, sorted by bucket then by
// discovery order. Bucket k spans record ordinals bucket_begin[k] ..
// bucket_begin[k+1]; ordinals are absolute, arrays hold the ordinals from
// loaded_base on (0 for fully materialized groups).
struct PathGroup {
    uint32_t plen = 0;
    std::vector<uint64_t> bucket_begin;
    uint64_t loaded_base = 0;
    std::vector<NodeId> node_buf;
    std::vector<double> pr_le;
    std::vector<double> pr_n;

    uint64_t total() const { return bucket_begin.empty() ? 0 : bucket_begin.back(); }
    const NodeId* rec_nodes(uint64_t ordinal) const {
        return node_buf.data() + (ordinal - loaded_base) * (plen + 1);
    }
};

// Backing-segment location of one group, for lazy loads.
struct GroupLocation {
    uint32_t plen = 0;
    uint64_t file_offset = 0;            // byte offset of the group's first record
    std::vector<uint64_t> bucket_begin;  // record ordinals, size nbuckets + 1
};

// Two-level path index: exact match on the canonical label sequence, then
// ordered probability buckets at beta, beta+gamma, ..., 1. Contains every
// simple reference-disjoint path of length <= L whose prLE * prN >= beta,
// stored once per canonical orientation.
class PathIndex {
  public:
    size_t L = 0;
    double beta = 0.1;
    double gamma = 0.1;
    size_t nlabels = 0;
    uint64_t fingerprint = 0;

    std::map<LabelSeq, PathGroup> groups;

    // Lazy backing; record data is pulled from the segment on demand.
    std::string segment_path;
    std::map<LabelSeq, GroupLocation> locations;

    size_t nbuckets() const;
    uint32_t bucket_of(double p) const;
    double bucket_value(uint32_t k) const;

    // alpha must be >= beta; returns records with prLE * prN >= alpha,
    // oriented to `seq` (reversed from storage when seq is stored under
    // its reversal).
    LookupResult lookup(const LabelSeq& seq, double alpha) const;

    // Iterates all groups in canonical order, materializing lazy ones.
    void for_each_group(const std::function<void(const LabelSeq&, const PathGroup&)>& fn) const;

    uint64_t total_records() const;

  private:
    const PathGroup* materialized(const LabelSeq& canon, uint32_t from_bucket) const;
    mutable std::map<LabelSeq, PathGroup> cache_;

    friend PathIndex load_path_index(const std::string& dir);
};

// Level-synchronous construction: length l+1 paths extend length l paths;
// work parallelizes across chunks of the previous level with a barrier
// between lengths. Output is identical for every thread count.
PathIndex build_path_index(const EntityGraph& g, size_t L, double beta, double gamma,
                           unsigned threads = 1);

// Same record contract as PathIndex::lookup, answered by direct graph
// traversal for any alpha > 0. Serves lookups below beta.
LookupResult on_demand_paths(const EntityGraph& g, const LabelSeq& seq, double alpha);

// Routed lookup: the index when alpha >= beta, traversal otherwise.
LookupResult index_lookup(const PathIndex& idx, const EntityGraph& g, const LabelSeq& seq,
                          double alpha);

}  // namespace peg
