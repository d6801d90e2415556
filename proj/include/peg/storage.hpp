#pragma once

#include <cstdint>
#include <string>

#include "peg/context.hpp"
#include "peg/entity_graph.hpp"
#include "peg/histogram.hpp"
#include "peg/path_index.hpp"

namespace peg {

inline constexpr uint32_t kFormatVersion = 1;
inline constexpr size_t kDefaultWriteBuffer = 64ull << 20;

// Every artifact is a directory holding manifest.json plus binary data.
// Numeric data is IEEE-754 double little-endian; ids are length-prefixed
// UTF-8. Loads refuse version or fingerprint mismatches and truncations.

void save_entity_graph(const EntityGraph& g, const std::string& dir);
EntityGraph load_entity_graph(const std::string& dir);

void save_context(const ContextTable& t, const std::string& dir);
ContextTable load_context(const std::string& dir, uint64_t expect_fingerprint);

// The index segment is one sorted run keyed by
// (canonical label sequence bytes, bucket as fixed-point u16, ordinal).
void save_path_index(const PathIndex& idx, const std::string& dir,
                     size_t write_buffer = kDefaultWriteBuffer);
// Opens lazily: the manifest and group locations are read, record data is
// pulled per lookup.
PathIndex load_path_index(const std::string& dir);

void save_histogram(const Histogram& h, const std::string& dir);
Histogram load_histogram(const std::string& dir, uint64_t expect_fingerprint);

}  // namespace peg
