#pragma once

// Random k-partite instances small enough to enumerate every consistent
// tuple, shared by the reduction unit tests and the acceptance suite.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "peg/kpartite.hpp"
#include "peg/rng.hpp"

namespace peg::testsupport {

// Random instance: connected partner topology, symmetric links, weights
// in (0, 1]. Partition sizes are 1..max_size.
inline KPartiteGraph random_instance(uint64_t seed, size_t max_size = 5) {
    Rng rng(seed * 0x9e3779b97f4a7c15ull + 17);
    KPartiteGraph kpg;
    kpg.k = 2 + rng.uniform_int(3);
    size_t k = kpg.k;
    std::vector<size_t> sz(k);
    for (size_t i = 0; i < k; ++i)
        sz[i] = 1 + rng.uniform_int(max_size);

    std::vector<std::vector<uint8_t>> joined(k, std::vector<uint8_t>(k, 0));
    for (size_t i = 1; i < k; ++i) {
        size_t j = rng.uniform_int(i);  // spanning tree keeps it connected
        joined[i][j] = joined[j][i] = 1;
    }
    for (size_t i = 0; i < k; ++i)
        for (size_t j = i + 1; j < k; ++j)
            if (rng.chance(0.4))
                joined[i][j] = joined[j][i] = 1;

    kpg.w1.resize(k);
    kpg.w2.resize(k);
    kpg.alive.resize(k);
    kpg.partners.resize(k);
    kpg.links.resize(k);
    for (size_t i = 0; i < k; ++i) {
        kpg.w1[i].resize(sz[i]);
        kpg.w2[i].resize(sz[i]);
        kpg.alive[i].assign(sz[i], 1);
        for (size_t v = 0; v < sz[i]; ++v) {
            kpg.w1[i][v] = 0.05 + 0.95 * rng.uniform();
            kpg.w2[i][v] = 0.05 + 0.95 * rng.uniform();
        }
        for (size_t j = 0; j < k; ++j)
            if (joined[i][j])
                kpg.partners[i].push_back(static_cast<uint32_t>(j));
        kpg.links[i].resize(kpg.partners[i].size());
    }
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = i + 1; j < k; ++j) {
            if (!joined[i][j])
                continue;
            std::vector<std::vector<uint8_t>> link(sz[i], std::vector<uint8_t>(sz[j], 0));
            for (size_t a = 0; a < sz[i]; ++a)
                for (size_t b = 0; b < sz[j]; ++b)
                    link[a][b] = rng.chance(0.6);
            size_t si = std::lower_bound(kpg.partners[i].begin(), kpg.partners[i].end(), j) -
                        kpg.partners[i].begin();
            size_t sj = std::lower_bound(kpg.partners[j].begin(), kpg.partners[j].end(), i) -
                        kpg.partners[j].begin();
            LinkSet& li = kpg.links[i][si];
            LinkSet& lj = kpg.links[j][sj];
            li.off.assign(sz[i] + 1, 0);
            lj.off.assign(sz[j] + 1, 0);
            for (size_t a = 0; a < sz[i]; ++a) {
                li.off[a + 1] = li.off[a];
                for (size_t b = 0; b < sz[j]; ++b)
                    if (link[a][b]) {
                        li.nbr.push_back(static_cast<uint32_t>(b));
                        ++li.off[a + 1];
                    }
            }
            for (size_t b = 0; b < sz[j]; ++b) {
                lj.off[b + 1] = lj.off[b];
                for (size_t a = 0; a < sz[i]; ++a)
                    if (link[a][b]) {
                        lj.nbr.push_back(static_cast<uint32_t>(a));
                        ++lj.off[b + 1];
                    }
            }
        }
    }
    kpg.init_perceptions();
    return kpg;
}

inline bool linked(const KPartiteGraph& kpg, size_t i, uint32_t v, size_t j, uint32_t u) {
    auto it = std::lower_bound(kpg.partners[i].begin(), kpg.partners[i].end(),
                               static_cast<uint32_t>(j));
    if (it == kpg.partners[i].end() || *it != j)
        return true;  // unjoined partitions impose no constraint
    size_t slot = static_cast<size_t>(it - kpg.partners[i].begin());
    auto ns = kpg.links[i][slot].of(v);
    return std::find(ns.begin(), ns.end(), u) != ns.end();
}

// All tuples (one vertex per partition) whose joined pairs are all linked.
inline void consistent_tuples(const KPartiteGraph& kpg, std::vector<uint32_t>& pick, size_t i,
                              const std::function<void(const std::vector<uint32_t>&)>& fn) {
    if (i == kpg.k) {
        fn(pick);
        return;
    }
    for (uint32_t v = 0; v < kpg.part_size(i); ++v) {
        bool ok = true;
        for (size_t j = 0; j < i && ok; ++j)
            ok = linked(kpg, i, v, j, pick[j]) && linked(kpg, j, pick[j], i, v);
        if (!ok)
            continue;
        pick[i] = v;
        consistent_tuples(kpg, pick, i + 1, fn);
    }
}

}  // namespace peg::testsupport
