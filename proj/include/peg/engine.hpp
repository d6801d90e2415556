#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "peg/candidates.hpp"
#include "peg/histogram.hpp"
#include "peg/kpartite.hpp"
#include "peg/query.hpp"

namespace peg {

// Per-stage search-space sizes (products of per-partition candidate
// counts) and timings.
struct StageStats {
    double ss0 = 0.0;                 // estimated, from decomposition
    double path_size = 0.0;           // after index lookup (oriented assignments)
    double path_ctx_size = 0.0;       // after node/path candidate pruning
    double final_size = 0.0;          // after joint reduction
    std::vector<size_t> path_counts;
    std::vector<size_t> path_ctx_counts;
    std::vector<size_t> final_counts;
    double ms_decompose = 0.0;
    double ms_candidates = 0.0;
    double ms_reduce = 0.0;
    double ms_enumerate = 0.0;
    double ms_total = 0.0;
};

struct QueryResult {
    std::vector<Match> matches;
    StageStats stats;
};

struct EngineOptions {
    unsigned threads = 1;
};

// Full pipeline: decompose, collect candidates (index lookups, falling
// back to direct traversal when alpha < beta), reduce the k-partite graph,
// enumerate, verify exactly, sort canonically.
QueryResult answer_query(const EntityGraph& g, const PathIndex& idx, const Histogram& h,
                         const ContextTable& ctx, const QueryGraph& q,
                         const EngineOptions& opts = {});

// Enumeration over an already-reduced k-partite graph; exposed for tests.
std::vector<Match> enumerate_matches(const EntityGraph& g, const BoundQuery& bq,
                                     const Decomposition& d,
                                     const std::vector<CandidateSet>& cands,
                                     const KPartiteBuild& kb,
                                     const std::vector<uint32_t>& order, double alpha);

}  // namespace peg
