#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace peg {

using NodeId = uint32_t;
using RefId = uint32_t;
using LabelId = uint16_t;

inline constexpr uint32_t kInvalidId = 0xffffffffu;

// Chains longer than this switch to log-space accumulation.
inline constexpr size_t kLogSpaceChain = 64;

// Slack applied to intermediate pruning thresholds only. Final answer
// emission always compares the exact match probability against alpha.
inline constexpr double kPruneSlack = 1e-12;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Product of a factor chain. Probabilities are multiplied directly for
// short chains; long chains accumulate in log space to avoid underflow.
inline double product_of(std::span<const double> factors) {
    if (factors.size() <= kLogSpaceChain) {
        double p = 1.0;
        for (double f : factors)
            p *= f;
        return p;
    }
    double lg = 0.0;
    for (double f : factors) {
        if (f <= 0.0)
            return 0.0;
        lg += std::log(f);
    }
    return std::exp(lg);
}

// Runs fn(begin, end) over [0, n) split into contiguous chunks, one chunk
// per worker. Chunk boundaries depend only on n and the worker count, so
// callers that merge per-chunk output in chunk order stay deterministic.
template <typename Fn>
void parallel_chunks(size_t n, unsigned threads, Fn&& fn) {
    if (n == 0)
        return;
    if (threads <= 1 || n == 1) {
        fn(size_t{0}, n);
        return;
    }
    unsigned t = std::min<size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(t);
    size_t chunk = (n + t - 1) / t;
    for (unsigned i = 0; i < t; ++i) {
        size_t b = i * chunk;
        size_t e = std::min(n, b + chunk);
        if (b >= e)
            break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& th : pool)
        th.join();
}

inline unsigned default_threads() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

}  // namespace peg
