#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "peg/pgd.hpp"
#include "peg/query.hpp"

namespace peg {

// Synthetic PGD parameters. Attachment follows preferential attachment
// from a 3-clique; labels get zipf-weighted random distributions; k
// disjoint groups of s references each contribute r disjoint same-entity
// pairs (reference sets of size 2). uncertain_fraction of the references,
// edges and sets carry non-degenerate distributions, the rest are certain.
struct GenParams {
    size_t n_refs = 1000;
    size_t n_edges = 0;           // 0: 5 * n_refs
    size_t n_labels = 3;
    double uncertain_fraction = 0.2;
    size_t k_groups = SIZE_MAX;   // SIZE_MAX: n_refs / 1000
    size_t group_size = 8;        // s
    size_t pairs_per_group = 4;   // r, with 2r <= s
    bool correlated = false;      // same-label edge keeps p, differing labels 0.8p
    uint64_t seed = 1;
};

Pgd generate_pgd(const GenParams& params);

// Random connected simple query: n nodes, m edges (n-1 <= m <= n(n-1)/2),
// labels uniform over `labels`.
QueryGraph generate_query(size_t n, size_t m, const std::vector<std::string>& labels,
                          double alpha, uint64_t seed);

}  // namespace peg
