#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "peg/common.hpp"

namespace peg {

enum class MergeKind { Average, Disjunct };

const char* merge_kind_name(MergeKind k);
MergeKind merge_kind_from_name(const std::string& name);

// Edge existence distribution at the reference level: either a single
// probability or a table conditioned on the (u-label, v-label) pair.
struct PgdEdgeDist {
    bool correlated = false;
    double p = 0.0;
    // Conditional entries keyed by label names, oriented (label of u, label of v).
    std::vector<std::pair<std::pair<std::string, std::string>, double>> cpt;
};

struct PgdReference {
    std::string id;
    // Label distribution as written in the document.
    std::vector<std::pair<std::string, double>> dist;
};

struct PgdEdge {
    std::string u, v;
    PgdEdgeDist dist;
};

struct PgdSet {
    std::string id;
    std::vector<std::string> refs;
    double p = 1.0;
};

// A probabilistic graph description document. Mirrors the JSON format;
// referential integrity is checked by validate_pgd, not the type.
struct Pgd {
    std::vector<std::string> labels;
    std::vector<PgdReference> references;
    std::vector<PgdEdge> edges;
    std::vector<PgdSet> sets;
    MergeKind merge_labels = MergeKind::Average;
    MergeKind merge_edges = MergeKind::Average;
};

struct Violation {
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// Reports every violation found; never throws on content problems.
ValidationReport validate_pgd(const Pgd& pgd);

// Content digest over the canonical JSON serialization (FNV-1a 64).
uint64_t pgd_fingerprint(const Pgd& pgd);

}  // namespace peg
