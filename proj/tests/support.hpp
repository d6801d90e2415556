#pragma once

// Shared fixtures: the hand-checked walkthrough document plus a family of
// tiny random documents small enough for exhaustive ground truth.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "peg/datagen.hpp"
#include "peg/pgd.hpp"
#include "peg/rng.hpp"

namespace peg::testsupport {

inline double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

// Three references r2 (a), r3 (r), r4 (i); edges r3-r2 @1.0, r2-r4 @0.5;
// one candidate set {r3, r4} @0.8; average merges. Hand-checked values:
// merged label {r: .5, i: .5}, merged edge .75, configurations .8 / .2,
// match (r3, r2, r4) probability 0.1.
inline Pgd anchor_pgd() {
    Pgd p;
    p.labels = {"a", "i", "r"};
    p.references.push_back({"r2", {{"a", 1.0}}});
    p.references.push_back({"r3", {{"r", 1.0}}});
    p.references.push_back({"r4", {{"i", 1.0}}});
    PgdEdgeDist certain;
    certain.p = 1.0;
    PgdEdgeDist half;
    half.p = 0.5;
    p.edges.push_back({"r3", "r2", certain});
    p.edges.push_back({"r2", "r4", half});
    p.sets.push_back({"s34", {"r3", "r4"}, 0.8});
    return p;
}

// Random document small enough to enumerate every possible world and every
// injective mapping: <= 8 references, <= 3 labels, <= 2 candidate sets,
// about half of all pairs drawn as edges. Probabilities are rounded to 3
// decimals so serialized round trips reproduce them exactly.
inline Pgd tiny_pgd(uint64_t seed, bool correlated) {
    Rng rng(seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
    Pgd p;
    size_t nl = 1 + rng.uniform_int(3);
    const char* names[3] = {"a", "b", "c"};
    for (size_t i = 0; i < nl; ++i)
        p.labels.push_back(names[i]);

    size_t nr = 3 + rng.uniform_int(6);
    for (size_t i = 0; i < nr; ++i) {
        PgdReference r;
        r.id = "r" + std::to_string(i);
        size_t support = nl > 1 && rng.chance(0.5) ? 2 + rng.uniform_int(nl - 1) : 1;
        if (support == 1) {
            r.dist.emplace_back(p.labels[rng.uniform_int(nl)], 1.0);
        } else {
            std::vector<size_t> ls(nl);
            for (size_t j = 0; j < nl; ++j)
                ls[j] = j;
            for (size_t j = 0; j + 1 < nl; ++j)
                std::swap(ls[j], ls[j + rng.uniform_int(nl - j)]);
            // Rounded weights; the first entry absorbs the remainder so the
            // distribution sums to 1 exactly.
            for (;;) {
                std::vector<double> w(support);
                double rest = 0.0;
                for (size_t j = 1; j < support; ++j) {
                    w[j] = round3(rng.uniform(0.05, 0.9 / support));
                    rest += w[j];
                }
                w[0] = round3(1.0 - rest);
                if (w[0] <= 0.0)
                    continue;
                r.dist.clear();
                for (size_t j = 0; j < support; ++j)
                    r.dist.emplace_back(p.labels[ls[j]], w[j]);
                break;
            }
        }
        p.references.push_back(std::move(r));
    }

    for (size_t i = 0; i < nr; ++i)
        for (size_t j = i + 1; j < nr; ++j) {
            if (!rng.chance(0.45))
                continue;
            PgdEdge e;
            e.u = "r" + std::to_string(i);
            e.v = "r" + std::to_string(j);
            if (correlated) {
                e.dist.correlated = true;
                for (size_t a = 0; a < nl; ++a)
                    for (size_t b = 0; b < nl; ++b) {
                        double q = rng.chance(0.15)   ? 0.0
                                   : rng.chance(0.15) ? 1.0
                                                      : round3(rng.uniform(0.05, 1.0));
                        e.dist.cpt.push_back({{p.labels[a], p.labels[b]}, q});
                    }
            } else {
                e.dist.p = rng.chance(0.3) ? 1.0 : round3(rng.uniform(0.05, 1.0));
            }
            p.edges.push_back(std::move(e));
        }

    size_t nsets = rng.uniform_int(3);
    for (size_t s = 0; s < nsets; ++s) {
        size_t size = rng.chance(0.8) ? 2 : 3;
        if (size > nr)
            size = 2;
        std::vector<size_t> pick(nr);
        for (size_t j = 0; j < nr; ++j)
            pick[j] = j;
        for (size_t j = 0; j < size; ++j)
            std::swap(pick[j], pick[j + rng.uniform_int(nr - j)]);
        PgdSet set;
        set.id = "s" + std::to_string(s);
        for (size_t j = 0; j < size; ++j)
            set.refs.push_back("r" + std::to_string(pick[j]));
        std::sort(set.refs.begin(), set.refs.end());
        bool dup = false;
        for (const auto& other : p.sets)
            dup |= other.refs == set.refs;
        if (dup)
            continue;
        set.p = round3(rng.uniform(0.1, 0.95));
        p.sets.push_back(std::move(set));
    }

    p.merge_edges = rng.chance(0.3) ? MergeKind::Disjunct : MergeKind::Average;
    return p;
}

// Random connected query with 2..4 nodes and a feasible edge count.
inline QueryGraph tiny_query(uint64_t seed, const std::vector<std::string>& labels) {
    Rng rng(seed ^ 0x94d049bb133111ebull);
    size_t n = 2 + rng.uniform_int(3);
    size_t maxm = n * (n - 1) / 2;
    size_t m = (n - 1) + rng.uniform_int(maxm - (n - 1) + 1);
    return generate_query(n, m, labels, 0.5, seed * 31 + 7);
}

}  // namespace peg::testsupport
