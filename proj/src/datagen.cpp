#include "peg/datagen.hpp"

#include <algorithm>
#include <set>

#include "peg/rng.hpp"

namespace peg {

namespace {

std::string label_name(size_t i) {
    return "l" + std::to_string(i);
}

// Random weights damped by a zipf 1/(j+1) decay, normalized, assigned to
// labels in random order. Draws sit in (0, 1], so every label keeps mass.
std::vector<std::pair<std::string, double>> zipf_dist(Rng& rng,
                                                      const std::vector<std::string>& labels) {
    size_t n = labels.size();
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i)
        perm[i] = i;
    for (size_t i = n; i > 1; --i)
        std::swap(perm[i - 1], perm[rng.uniform_int(i)]);
    std::vector<double> w(n);
    double z = 0.0;
    for (size_t j = 0; j < n; ++j) {
        w[j] = (1.0 - rng.uniform()) / static_cast<double>(j + 1);
        z += w[j];
    }
    std::vector<std::pair<std::string, double>> dist(n);
    for (size_t j = 0; j < n; ++j)
        dist[j] = {labels[perm[j]], w[j] / z};
    std::sort(dist.begin(), dist.end());
    return dist;
}

}  // namespace

Pgd generate_pgd(const GenParams& params) {
    size_t n = params.n_refs;
    if (n < 3)
        throw Error("generate_pgd: need at least 3 references");
    if (params.n_labels == 0)
        throw Error("generate_pgd: need at least one label");
    if (!(params.uncertain_fraction >= 0.0 && params.uncertain_fraction <= 1.0))
        throw Error("generate_pgd: uncertain fraction must be in [0, 1]");
    size_t max_edges = n * (n - 1) / 2;
    size_t ne = params.n_edges ? params.n_edges : std::min(5 * n, max_edges);
    if (ne < 3 || ne > max_edges)
        throw Error("generate_pgd: edge count out of range");
    size_t k = params.k_groups == SIZE_MAX ? n / 1000 : params.k_groups;
    size_t s = params.group_size, r = params.pairs_per_group;
    if (k > 0) {
        if (s < 2 || r == 0 || 2 * r > s)
            throw Error("generate_pgd: need 2 * pairs_per_group <= group_size");
        if (k * s > n)
            throw Error("generate_pgd: groups need more references than exist");
    }

    Rng rng(params.seed);
    Pgd pgd;
    pgd.labels.resize(params.n_labels);
    for (size_t i = 0; i < params.n_labels; ++i)
        pgd.labels[i] = label_name(i);

    // References with their label distributions.
    pgd.references.resize(n);
    for (size_t i = 0; i < n; ++i) {
        pgd.references[i].id = "r" + std::to_string(i);
        if (rng.chance(params.uncertain_fraction) && params.n_labels > 1)
            pgd.references[i].dist = zipf_dist(rng, pgd.labels);
        else
            pgd.references[i].dist = {{pgd.labels[rng.uniform_int(params.n_labels)], 1.0}};
    }

    // Preferential attachment from a 3-clique; `bag` holds one entry per
    // edge endpoint, so sampling it is degree-proportional.
    std::set<std::pair<uint32_t, uint32_t>> seen;
    std::vector<uint32_t> bag;
    auto add_edge = [&](uint32_t a, uint32_t b) {
        auto key = std::minmax(a, b);
        if (a == b || !seen.emplace(key).second)
            return false;
        bag.push_back(a);
        bag.push_back(b);
        return true;
    };
    add_edge(0, 1);
    add_edge(0, 2);
    add_edge(1, 2);
    size_t budget = ne - 3;
    for (uint32_t t = 3; t < n; ++t) {
        size_t remaining_nodes = n - t;
        size_t want = (budget + remaining_nodes - 1) / remaining_nodes;
        want = std::min(want, static_cast<size_t>(t));
        for (size_t e = 0; e < want && budget > 0; ++e) {
            bool placed = false;
            for (int attempt = 0; attempt < 64 && !placed; ++attempt)
                placed = add_edge(t, bag[rng.uniform_int(bag.size())]);
            for (uint32_t probe = 0; probe < t && !placed; ++probe)
                placed = add_edge(t, probe);
            if (placed)
                --budget;
        }
    }
    // Fill any shortfall with uniform random edges.
    while (budget > 0) {
        uint32_t a = static_cast<uint32_t>(rng.uniform_int(n));
        uint32_t b = static_cast<uint32_t>(rng.uniform_int(n));
        if (add_edge(a, b))
            --budget;
    }

    pgd.edges.reserve(seen.size());
    for (const auto& [a, b] : seen) {
        PgdEdge e;
        e.u = pgd.references[a].id;
        e.v = pgd.references[b].id;
        double p = rng.chance(params.uncertain_fraction) ? rng.uniform(0.5, 1.0) : 1.0;
        if (params.correlated) {
            e.dist.correlated = true;
            for (const auto& lu : pgd.labels)
                for (const auto& lv : pgd.labels)
                    e.dist.cpt.push_back({{lu, lv}, lu == lv ? p : 0.8 * p});
        } else {
            e.dist.p = p;
        }
        pgd.edges.push_back(std::move(e));
    }

    // Identity groups: disjoint blocks of a shuffled reference list, each
    // contributing disjoint same-entity pairs.
    if (k > 0) {
        std::vector<uint32_t> shuffled(n);
        for (size_t i = 0; i < n; ++i)
            shuffled[i] = static_cast<uint32_t>(i);
        for (size_t i = n; i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng.uniform_int(i)]);
        size_t set_no = 0;
        for (size_t gi = 0; gi < k; ++gi) {
            const uint32_t* grp = shuffled.data() + gi * s;
            for (size_t pi = 0; pi < r; ++pi) {
                PgdSet st;
                st.id = "m" + std::to_string(set_no++);
                st.refs = {pgd.references[grp[2 * pi]].id,
                           pgd.references[grp[2 * pi + 1]].id};
                std::sort(st.refs.begin(), st.refs.end());
                st.p = rng.chance(params.uncertain_fraction) ? rng.uniform(0.5, 1.0) : 1.0;
                pgd.sets.push_back(std::move(st));
            }
        }
    }
    return pgd;
}

QueryGraph generate_query(size_t n, size_t m, const std::vector<std::string>& labels,
                          double alpha, uint64_t seed) {
    if (n == 0)
        throw Error("generate_query: need at least one node");
    if (labels.empty())
        throw Error("generate_query: need at least one label");
    size_t max_edges = n * (n - 1) / 2;
    if ((n > 1 && m < n - 1) || m > max_edges)
        throw Error("generate_query: edge count out of range");

    Rng rng(seed);
    QueryGraph q;
    q.alpha = alpha;
    q.nodes.resize(n);
    for (size_t i = 0; i < n; ++i) {
        q.nodes[i].id = "q" + std::to_string(i);
        q.nodes[i].label = labels[rng.uniform_int(labels.size())];
    }
    std::set<std::pair<uint32_t, uint32_t>> seen;
    // Random spanning tree keeps the query connected, then extra edges.
    for (uint32_t i = 1; i < n; ++i) {
        uint32_t p = static_cast<uint32_t>(rng.uniform_int(i));
        seen.emplace(p, i);
    }
    while (seen.size() < m) {
        uint32_t a = static_cast<uint32_t>(rng.uniform_int(n));
        uint32_t b = static_cast<uint32_t>(rng.uniform_int(n));
        if (a == b)
            continue;
        seen.emplace(std::min(a, b), std::max(a, b));
    }
    q.edges.assign(seen.begin(), seen.end());
    return q;
}

}  // namespace peg
