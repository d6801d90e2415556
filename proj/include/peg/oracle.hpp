#pragma once

#include <vector>

#include "peg/query.hpp"

namespace peg {

// Ground-truth matcher: enumerates every injective label-compatible
// mapping of the query into the graph by plain backtracking (no index,
// no pruning machinery) and keeps those whose exact probability is
// >= alpha. Output in canonical result order.
std::vector<Match> oracle_subgraph_match(const EntityGraph& g, const QueryGraph& q,
                                         double alpha);

}  // namespace peg
