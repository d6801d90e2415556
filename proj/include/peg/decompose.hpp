#pragma once

#include <cstdint>
#include <vector>

#include "peg/histogram.hpp"
#include "peg/query.hpp"

namespace peg {

// One decomposition path: consecutive query node indices.
struct QPath {
    std::vector<uint32_t> nodes;

    uint32_t length() const { return static_cast<uint32_t>(nodes.size()) - 1; }
};

// Per-path pruning context within the query:
//   gamma_nodes  query nodes off the path adjacent to it
//   rv[k]        path positions adjacent to gamma_nodes[k]
//   cyc[p]       positions q > p whose query edge to p is not a path step;
//                each such edge appears once, at its lower position
struct PathContext {
    std::vector<uint32_t> gamma_nodes;
    std::vector<std::vector<uint32_t>> rv;     // parallel to gamma_nodes
    std::vector<std::vector<uint32_t>> cyc;    // indexed by position on path
    uint32_t degree = 0;                       // sum of node degrees - 2*length
    double density = 1.0;                      // 2K / (M(M-1)); 1 when M == 1
};

struct QueryStats {
    // c[n * nlabels + s]: neighbors of query node n labeled s.
    std::vector<uint32_t> c;
    size_t nlabels = 0;

    uint32_t cn(uint32_t n, LabelId s) const { return c[n * nlabels + s]; }
};

QueryStats compute_query_stats(const BoundQuery& bq, size_t nlabels);
PathContext compute_path_context(const BoundQuery& bq, const QPath& path);

struct Decomposition {
    std::vector<QPath> paths;                   // selection order
    std::vector<double> cost;                   // C(P, alpha) per path
    double ss0 = 1.0;                           // product of costs
    std::vector<std::vector<uint32_t>> cv;      // covered query nodes per path
    std::vector<std::vector<uint32_t>> ce;      // covered query edge indices per path
    // Join predicates: for each unordered partner pair (i < j), the
    // positions of shared query nodes on each path.
    struct JoinPair {
        uint32_t a = 0, b = 0;
        std::vector<std::pair<uint32_t, uint32_t>> positions;  // (pos in a, pos in b)
    };
    std::vector<JoinPair> joins;
    std::vector<std::vector<uint32_t>> partners;  // per path: joined path indices
};

// Greedy set cover of the query's edges by simple paths of length <= L,
// ranked by newly covered edges per estimated candidate count C(P, alpha).
// Nodes and edges are assigned to the first covering path.
Decomposition decompose_query(const BoundQuery& bq, const Histogram& h, size_t L,
                              double alpha);

// Estimated candidate count for one path at threshold alpha.
double path_cost(const BoundQuery& bq, const Histogram& h, const QPath& path, double alpha);

// Join order: start at the cheapest partition, then repeatedly take the
// partition with the most nodes shared with the chosen ones, breaking ties
// by join predicate count, then cost, then index.
std::vector<uint32_t> join_order(const Decomposition& d);

}  // namespace peg
