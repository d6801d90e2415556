#include "peg/pgd.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace peg {

namespace {

constexpr double kSumTol = 1e-9;

std::string fmt_num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

const char* merge_kind_name(MergeKind k) {
    return k == MergeKind::Average ? "average" : "disjunct";
}

MergeKind merge_kind_from_name(const std::string& name) {
    if (name == "average")
        return MergeKind::Average;
    if (name == "disjunct")
        return MergeKind::Disjunct;
    throw Error("unknown merge function '" + name + "'");
}

ValidationReport validate_pgd(const Pgd& pgd) {
    ValidationReport rep;
    auto add = [&rep](const std::string& code, const std::string& msg) {
        rep.violations.push_back({code, msg});
    };

    if (pgd.labels.empty())
        add("empty-alphabet", "label alphabet is empty");
    std::unordered_set<std::string> labels;
    for (const auto& l : pgd.labels)
        if (!labels.insert(l).second)
            add("duplicate-label", "label '" + l + "' declared twice");

    std::unordered_set<std::string> ref_ids;
    for (const auto& r : pgd.references) {
        if (!ref_ids.insert(r.id).second)
            add("duplicate-reference", "reference '" + r.id + "' declared twice");
        if (r.dist.empty())
            add("empty-distribution", "reference " + r.id + " has an empty label distribution");
        double sum = 0.0;
        std::unordered_set<std::string> seen;
        for (const auto& [label, p] : r.dist) {
            if (!labels.count(label))
                add("dangling-label",
                    "reference " + r.id + " label distribution names unknown label '" + label + "'");
            if (!seen.insert(label).second)
                add("duplicate-entry",
                    "reference " + r.id + " lists label '" + label + "' twice");
            if (p < 0.0 || p > 1.0)
                add("probability-range",
                    "reference " + r.id + " label '" + label + "' probability " + fmt_num(p) +
                        " outside [0, 1]");
            sum += p;
        }
        if (!r.dist.empty() && std::abs(sum - 1.0) > kSumTol)
            add("distribution-sum",
                "reference " + r.id + " label distribution sums to " + fmt_num(sum));
    }

    std::set<std::pair<std::string, std::string>> edge_pairs;
    for (const auto& e : pgd.edges) {
        if (!ref_ids.count(e.u))
            add("dangling-reference", "edge endpoint '" + e.u + "' is not a declared reference");
        if (!ref_ids.count(e.v))
            add("dangling-reference", "edge endpoint '" + e.v + "' is not a declared reference");
        if (e.u == e.v)
            add("self-edge", "edge (" + e.u + ", " + e.v + ") is a self loop");
        auto key = std::minmax(e.u, e.v);
        if (!edge_pairs.insert(key).second)
            add("duplicate-edge", "edge (" + e.u + ", " + e.v + ") declared twice");
        if (!e.dist.correlated) {
            if (e.dist.p < 0.0 || e.dist.p > 1.0)
                add("probability-range", "edge (" + e.u + ", " + e.v + ") probability " +
                                             fmt_num(e.dist.p) + " outside [0, 1]");
        } else {
            std::set<std::pair<std::string, std::string>> keys;
            for (const auto& [lp, p] : e.dist.cpt) {
                if (!labels.count(lp.first))
                    add("dangling-label", "edge (" + e.u + ", " + e.v +
                                              ") conditions on unknown label '" + lp.first + "'");
                if (!labels.count(lp.second))
                    add("dangling-label", "edge (" + e.u + ", " + e.v +
                                              ") conditions on unknown label '" + lp.second + "'");
                if (!keys.insert(lp).second)
                    add("duplicate-entry", "edge (" + e.u + ", " + e.v + ") lists label pair (" +
                                               lp.first + ", " + lp.second + ") twice");
                if (p < 0.0 || p > 1.0)
                    add("probability-range", "edge (" + e.u + ", " + e.v + ") entry (" + lp.first +
                                                 ", " + lp.second + ") probability " + fmt_num(p) +
                                                 " outside [0, 1]");
            }
            if (e.dist.cpt.empty())
                add("empty-distribution",
                    "edge (" + e.u + ", " + e.v + ") has an empty conditional table");
        }
    }

    std::unordered_set<std::string> set_ids;
    std::set<std::vector<std::string>> set_keys;
    for (const auto& s : pgd.sets) {
        if (!set_ids.insert(s.id).second)
            add("duplicate-set", "reference set '" + s.id + "' declared twice");
        if (s.refs.empty())
            add("empty-set", "reference set " + s.id + " lists no references");
        bool self_singleton = s.refs.size() == 1 && s.refs[0] == s.id;
        if (ref_ids.count(s.id) && !self_singleton)
            add("id-collision",
                "reference set id '" + s.id + "' collides with a reference id");
        std::vector<std::string> sorted = s.refs;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            add("duplicate-entry", "reference set " + s.id + " lists a reference twice");
        for (const auto& r : s.refs)
            if (!ref_ids.count(r))
                add("dangling-reference",
                    "reference set " + s.id + " names unknown reference '" + r + "'");
        if (!set_keys.insert(sorted).second)
            add("duplicate-set", "reference set " + s.id + " repeats an already declared subset");
        if (s.p < 0.0 || s.p > 1.0)
            add("probability-range", "reference set " + s.id + " probability " + fmt_num(s.p) +
                                         " outside [0, 1]");
    }

    if (pgd.merge_labels == MergeKind::Disjunct)
        add("merge-domain", "disjunct merge is defined over {T, F}, not label distributions");

    return rep;
}

}  // namespace peg
