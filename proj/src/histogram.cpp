#include "peg/histogram.hpp"

#include <algorithm>
#include <cmath>

#include "peg/common.hpp"

namespace peg {

std::vector<double> default_histogram_points() {
    std::vector<double> pts(10);
    for (size_t i = 0; i < 10; ++i)
        pts[i] = (i + 1) / 10.0;
    return pts;
}

Histogram build_histograms(const PathIndex& idx, std::vector<double> points) {
    if (points.empty())
        throw Error("build_histograms: no sample points");
    for (size_t i = 0; i < points.size(); ++i) {
        if (!(points[i] > 0.0 && points[i] <= 1.0))
            throw Error("build_histograms: sample points must be in (0, 1]");
        if (i > 0 && points[i] <= points[i - 1])
            throw Error("build_histograms: sample points must be strictly ascending");
    }
    Histogram h;
    h.points = std::move(points);
    h.fingerprint = idx.fingerprint;
    idx.for_each_group([&](const LabelSeq& seq, const PathGroup& pg) {
        std::vector<uint64_t> cnt(h.points.size(), 0);
        uint64_t n = pg.total();
        for (uint64_t ord = pg.loaded_base; ord < n; ++ord) {
            size_t ri = static_cast<size_t>(ord - pg.loaded_base);
            double pr = pg.pr_le[ri] * pg.pr_n[ri];
            // Largest sample point <= pr; records below the first point
            // appear in no count.
            auto it = std::upper_bound(h.points.begin(), h.points.end(), pr);
            if (it == h.points.begin())
                continue;
            ++cnt[static_cast<size_t>(it - h.points.begin()) - 1];
        }
        for (size_t j = cnt.size() - 1; j-- > 0;)
            cnt[j] += cnt[j + 1];
        h.counts.emplace(seq, std::move(cnt));
    });
    return h;
}

double estimate_count(const Histogram& h, const LabelSeq& seq, double alpha) {
    if (h.points.empty())
        throw Error("estimate_count: empty histogram");
    auto it = h.counts.find(canonical_label_seq(seq));
    if (it == h.counts.end())
        return 0.0;
    const std::vector<uint64_t>& cnt = it->second;
    double a = std::clamp(alpha, h.points.front(), h.points.back());
    size_t j = static_cast<size_t>(
        std::lower_bound(h.points.begin(), h.points.end(), a) - h.points.begin());
    if (h.points[j] == a)
        return static_cast<double>(cnt[j]);
    size_t i = j - 1;
    double pi = h.points[i], pj = h.points[j];
    double ci = static_cast<double>(cnt[i]), cj = static_cast<double>(cnt[j]);
    if (ci <= 0.0)
        return 0.0;
    if (cj <= 0.0) {
        // Exponential fit needs two positive counts; fall back to the line
        // through (pi, ci) and (pj, 0).
        return ci * (pj - a) / (pj - pi);
    }
    double b = std::log(ci / cj) / (pj - pi);
    double amp = ci * std::exp(b * pi);
    return amp * std::exp(-b * a);
}

}  // namespace peg
