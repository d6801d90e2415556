#include "peg/io_json.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace peg {

using nlohmann::json;

namespace {

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

json edge_dist_to_json(const PgdEdgeDist& d) {
    if (!d.correlated)
        return d.p;
    json cpt = json::object();
    for (const auto& [lp, p] : d.cpt)
        cpt[lp.first + "," + lp.second] = p;
    return cpt;
}

PgdEdgeDist edge_dist_from_json(const json& je) {
    PgdEdgeDist d;
    if (je.contains("p")) {
        d.correlated = false;
        d.p = je.at("p").get<double>();
        return d;
    }
    if (!je.contains("cpt"))
        throw Error("edge needs either 'p' or 'cpt'");
    d.correlated = true;
    for (const auto& [key, val] : je.at("cpt").items()) {
        auto comma = key.find(',');
        if (comma == std::string::npos)
            throw Error("cpt key '" + key + "' is not a 'label,label' pair");
        d.cpt.push_back({{key.substr(0, comma), key.substr(comma + 1)}, val.get<double>()});
    }
    return d;
}

}  // namespace

Pgd pgd_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("malformed PGD document: ") + e.what());
    }
    try {
        Pgd pgd;
        for (const auto& l : j.at("labels"))
            pgd.labels.push_back(l.get<std::string>());
        for (const auto& jr : j.at("references")) {
            PgdReference r;
            r.id = jr.at("id").get<std::string>();
            for (const auto& [label, p] : jr.at("dist").items())
                r.dist.push_back({label, p.get<double>()});
            pgd.references.push_back(std::move(r));
        }
        if (j.contains("edges"))
            for (const auto& je : j["edges"]) {
                PgdEdge e;
                e.u = je.at("u").get<std::string>();
                e.v = je.at("v").get<std::string>();
                e.dist = edge_dist_from_json(je);
                pgd.edges.push_back(std::move(e));
            }
        if (j.contains("sets"))
            for (const auto& js : j["sets"]) {
                PgdSet s;
                s.id = js.at("id").get<std::string>();
                for (const auto& r : js.at("refs"))
                    s.refs.push_back(r.get<std::string>());
                s.p = js.at("p").get<double>();
                pgd.sets.push_back(std::move(s));
            }
        if (j.contains("merge")) {
            const auto& jm = j["merge"];
            if (jm.contains("labels"))
                pgd.merge_labels = merge_kind_from_name(jm["labels"].get<std::string>());
            if (jm.contains("edges"))
                pgd.merge_edges = merge_kind_from_name(jm["edges"].get<std::string>());
        }
        return pgd;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed PGD document: ") + e.what());
    }
}

std::string pgd_to_json_text(const Pgd& pgd) {
    json j;
    j["labels"] = pgd.labels;
    j["references"] = json::array();
    for (const auto& r : pgd.references) {
        json dist = json::object();
        for (const auto& [label, p] : r.dist)
            dist[label] = p;
        j["references"].push_back({{"id", r.id}, {"dist", dist}});
    }
    j["edges"] = json::array();
    for (const auto& e : pgd.edges) {
        json je{{"u", e.u}, {"v", e.v}};
        if (e.dist.correlated)
            je["cpt"] = edge_dist_to_json(e.dist);
        else
            je["p"] = e.dist.p;
        j["edges"].push_back(je);
    }
    j["sets"] = json::array();
    for (const auto& s : pgd.sets)
        j["sets"].push_back({{"id", s.id}, {"refs", s.refs}, {"p", s.p}});
    j["merge"] = {{"labels", merge_kind_name(pgd.merge_labels)},
                  {"edges", merge_kind_name(pgd.merge_edges)}};
    return j.dump(2);
}

uint64_t pgd_fingerprint(const Pgd& pgd) {
    return fnv1a64(pgd_to_json_text(pgd));
}

QueryGraph query_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("malformed query document: ") + e.what());
    }
    try {
        QueryGraph q;
        std::unordered_map<std::string, uint32_t> by_id;
        for (const auto& jn : j.at("nodes")) {
            QueryNode n;
            n.id = jn.at("id").get<std::string>();
            n.label = jn.at("label").get<std::string>();
            by_id.emplace(n.id, static_cast<uint32_t>(q.nodes.size()));
            q.nodes.push_back(std::move(n));
        }
        if (j.contains("edges"))
            for (const auto& je : j["edges"]) {
                auto a = by_id.find(je.at(0).get<std::string>());
                auto b = by_id.find(je.at(1).get<std::string>());
                if (a == by_id.end() || b == by_id.end())
                    throw Error("query edge names an undeclared node");
                uint32_t u = a->second, v = b->second;
                q.edges.push_back({std::min(u, v), std::max(u, v)});
            }
        q.alpha = j.at("alpha").get<double>();
        return q;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed query document: ") + e.what());
    }
}

std::string query_to_json_text(const QueryGraph& q) {
    json j;
    j["nodes"] = json::array();
    for (const auto& n : q.nodes)
        j["nodes"].push_back({{"id", n.id}, {"label", n.label}});
    j["edges"] = json::array();
    for (const auto& [u, v] : q.edges)
        j["edges"].push_back({q.nodes[u].id, q.nodes[v].id});
    j["alpha"] = q.alpha;
    return j.dump(2);
}

std::string results_to_json_text(const std::vector<ResultRow>& rows) {
    json j = json::array();
    for (const auto& row : rows) {
        json m = json::object();
        for (const auto& [qid, eid] : row.mapping)
            m[qid] = eid;
        j.push_back({{"mapping", m},
                     {"pr_le", row.pr_le},
                     {"pr_n", row.pr_n},
                     {"probability", row.probability}});
    }
    return j.dump(2);
}

std::vector<ResultRow> results_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("malformed result document: ") + e.what());
    }
    std::vector<ResultRow> rows;
    for (const auto& jr : j) {
        ResultRow row;
        for (const auto& [qid, eid] : jr.at("mapping").items())
            row.mapping.push_back({qid, eid.get<std::string>()});
        std::sort(row.mapping.begin(), row.mapping.end());
        row.pr_le = jr.at("pr_le").get<double>();
        row.pr_n = jr.at("pr_n").get<double>();
        row.probability = jr.at("probability").get<double>();
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string results_to_csv_text(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "probability,pr_le,pr_n";
    if (!rows.empty())
        for (const auto& [qid, eid] : rows.front().mapping)
            os << ',' << csv_escape(qid);
    os << '\n';
    for (const auto& row : rows) {
        os << row.probability << ',' << row.pr_le << ',' << row.pr_n;
        for (const auto& [qid, eid] : row.mapping)
            os << ',' << csv_escape(eid);
        os << '\n';
    }
    return os.str();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write file '" + path + "'");
    out << text;
    if (!out)
        throw Error("failed writing file '" + path + "'");
}

Pgd load_pgd_file(const std::string& path) { return pgd_from_json_text(read_text_file(path)); }

void save_pgd_file(const Pgd& pgd, const std::string& path) {
    write_text_file(path, pgd_to_json_text(pgd));
}

QueryGraph load_query_file(const std::string& path) {
    return query_from_json_text(read_text_file(path));
}

void save_query_file(const QueryGraph& q, const std::string& path) {
    write_text_file(path, query_to_json_text(q));
}

}  // namespace peg
