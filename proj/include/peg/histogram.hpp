#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "peg/path_index.hpp"

namespace peg {

// Per canonical label sequence: |lookup(seq, p)| at each sample point.
struct Histogram {
    std::vector<double> points;  // ascending, default 0.1 .. 1.0
    std::map<LabelSeq, std::vector<uint64_t>> counts;
    uint64_t fingerprint = 0;
};

std::vector<double> default_histogram_points();

Histogram build_histograms(const PathIndex& idx,
                           std::vector<double> points = default_histogram_points());

// Estimated |lookup(seq, alpha)| for alpha in [points.front(), 1]: exact at
// sample points; between points (c_i, c_j) with both counts positive, the
// exponential count(a) = A * exp(-B a) through the bracketing points;
// linear interpolation when a bracketing count is 0. Unknown sequences
// estimate 0.
double estimate_count(const Histogram& h, const LabelSeq& seq, double alpha);

}  // namespace peg
