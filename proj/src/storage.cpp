#include "peg/storage.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "peg/io_json.hpp"

namespace peg {

namespace {

using nlohmann::json;

std::string hex64(uint64_t v) {
    static const char* d = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = d[v & 0xf];
        v >>= 4;
    }
    return s;
}

uint64_t parse_hex64(const std::string& s) {
    if (s.size() != 16)
        throw Error("malformed fingerprint in manifest");
    uint64_t v = 0;
    for (char c : s) {
        v <<= 4;
        if (c >= '0' && c <= '9')
            v |= static_cast<uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f')
            v |= static_cast<uint64_t>(c - 'a' + 10);
        else
            throw Error("malformed fingerprint in manifest");
    }
    return v;
}

// Buffered little-endian writer.
class BinWriter {
  public:
    BinWriter(const std::string& path, size_t buffer) : path_(path), cap_(std::max<size_t>(buffer, 1 << 12)) {
        buf_.reserve(cap_);
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_)
            throw Error("cannot open for writing: " + path);
    }
    void u8(uint8_t v) { byte(v); }
    void u16(uint16_t v) {
        byte(v & 0xff);
        byte(v >> 8);
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i)
            byte((v >> (8 * i)) & 0xff);
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i)
            byte((v >> (8 * i)) & 0xff);
    }
    void f64(double d) { u64(std::bit_cast<uint64_t>(d)); }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        for (char c : s)
            byte(static_cast<uint8_t>(c));
    }
    void close() {
        flush();
        out_.close();
        if (!out_)
            throw Error("write failed: " + path_);
    }

  private:
    void byte(uint8_t b) {
        if (buf_.size() == cap_)
            flush();
        buf_.push_back(static_cast<char>(b));
    }
    void flush() {
        if (!buf_.empty()) {
            out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
            buf_.clear();
        }
    }
    std::string path_;
    size_t cap_;
    std::vector<char> buf_;
    std::ofstream out_;
};

class BinReader {
  public:
    explicit BinReader(const std::string& path) : path_(path) {
        in_.open(path, std::ios::binary);
        if (!in_)
            throw Error("cannot open: " + path);
    }
    void seek(uint64_t off) {
        in_.clear();
        in_.seekg(static_cast<std::streamoff>(off));
        if (!in_)
            throw Error("artifact truncated: " + path_);
    }
    uint8_t u8() {
        uint8_t b;
        raw(&b, 1);
        return b;
    }
    uint16_t u16() {
        uint8_t b[2];
        raw(b, 2);
        return static_cast<uint16_t>(b[0] | (b[1] << 8));
    }
    uint32_t u32() {
        uint8_t b[4];
        raw(b, 4);
        uint32_t v = 0;
        for (int i = 3; i >= 0; --i)
            v = (v << 8) | b[i];
        return v;
    }
    uint64_t u64() {
        uint8_t b[8];
        raw(b, 8);
        uint64_t v = 0;
        for (int i = 7; i >= 0; --i)
            v = (v << 8) | b[i];
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        uint32_t n = u32();
        if (n > (1u << 28))
            throw Error("artifact corrupt: oversized string in " + path_);
        std::string s(n, '\0');
        if (n)
            raw(reinterpret_cast<uint8_t*>(s.data()), n);
        return s;
    }
    void raw(uint8_t* dst, size_t n) {
        in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<size_t>(in_.gcount()) != n)
            throw Error("artifact truncated: " + path_);
    }
    void expect_eof() {
        char c;
        in_.read(&c, 1);
        if (!in_.eof())
            throw Error("artifact has trailing bytes: " + path_);
    }

  private:
    std::string path_;
    std::ifstream in_;
};

json load_manifest(const std::string& dir, const std::string& kind) {
    json m = json::parse(read_text_file(dir + "/manifest.json"));
    if (!m.contains("format_version") || m.at("format_version").get<uint32_t>() != kFormatVersion)
        throw Error("unsupported artifact format version in " + dir);
    if (!m.contains("kind") || m.at("kind").get<std::string>() != kind)
        throw Error("artifact kind mismatch in " + dir + ": expected '" + kind + "'");
    return m;
}

void write_manifest(const std::string& dir, json m) {
    m["format_version"] = kFormatVersion;
    write_text_file(dir + "/manifest.json", m.dump(2) + "\n");
}

uint64_t file_size_of(const std::string& path) {
    std::error_code ec;
    uint64_t n = std::filesystem::file_size(path, ec);
    if (ec)
        throw Error("cannot stat: " + path);
    return n;
}

}  // namespace

void save_entity_graph(const EntityGraph& g, const std::string& dir) {
    std::filesystem::create_directories(dir);
    json m;
    m["kind"] = "entity_graph";
    m["fingerprint"] = hex64(g.fingerprint);
    m["labels"] = g.labels.size();
    m["refs"] = g.ref_ids.size();
    m["nodes"] = g.nodes.size();
    m["edges"] = g.edges.size();
    m["components"] = g.components.size();
    write_manifest(dir, std::move(m));

    BinWriter w(dir + "/data.bin", kDefaultWriteBuffer);
    w.u64(g.fingerprint);
    w.u8(g.correlated ? 1 : 0);
    w.u8(g.merge_labels == MergeKind::Disjunct ? 1 : 0);
    w.u8(g.merge_edges == MergeKind::Disjunct ? 1 : 0);
    w.u32(static_cast<uint32_t>(g.labels.size()));
    for (const auto& s : g.labels)
        w.str(s);
    w.u32(static_cast<uint32_t>(g.ref_ids.size()));
    for (const auto& s : g.ref_ids)
        w.str(s);
    w.u32(static_cast<uint32_t>(g.nodes.size()));
    for (const auto& n : g.nodes) {
        w.str(n.id);
        w.u32(static_cast<uint32_t>(n.refs.size()));
        for (RefId r : n.refs)
            w.u32(r);
        for (double p : n.label_dist)
            w.f64(p);
        w.u32(static_cast<uint32_t>(n.support.size()));
        for (LabelId s : n.support)
            w.u16(s);
        w.u8(n.declared ? 1 : 0);
        w.f64(n.set_p);
        w.u32(n.component);
        w.u32(n.slot);
    }
    w.u32(static_cast<uint32_t>(g.edges.size()));
    for (const auto& e : g.edges) {
        w.u32(e.u);
        w.u32(e.v);
        w.u8(e.dist.correlated ? 1 : 0);
        if (e.dist.correlated)
            for (double p : e.dist.cpt)
                w.f64(p);
        else
            w.f64(e.dist.p);
    }
    w.u32(static_cast<uint32_t>(g.components.size()));
    for (const auto& c : g.components) {
        w.u32(static_cast<uint32_t>(c.nodes.size()));
        for (NodeId v : c.nodes)
            w.u32(v);
        w.f64(c.zn);
        w.u32(static_cast<uint32_t>(c.configs.size()));
        for (const auto& cfg : c.configs) {
            w.u32(cfg.mask);
            w.f64(cfg.pr);
        }
    }
    w.close();
}

EntityGraph load_entity_graph(const std::string& dir) {
    json m = load_manifest(dir, "entity_graph");
    uint64_t want_fp = parse_hex64(m.at("fingerprint").get<std::string>());

    BinReader r(dir + "/data.bin");
    EntityGraph g;
    g.fingerprint = r.u64();
    if (g.fingerprint != want_fp)
        throw Error("artifact fingerprint mismatch in " + dir);
    g.correlated = r.u8() != 0;
    g.merge_labels = r.u8() ? MergeKind::Disjunct : MergeKind::Average;
    g.merge_edges = r.u8() ? MergeKind::Disjunct : MergeKind::Average;
    g.labels.resize(r.u32());
    for (auto& s : g.labels)
        s = r.str();
    size_t nl = g.labels.size();
    g.ref_ids.resize(r.u32());
    for (auto& s : g.ref_ids)
        s = r.str();
    g.nodes.resize(r.u32());
    for (auto& n : g.nodes) {
        n.id = r.str();
        n.refs.resize(r.u32());
        for (RefId& x : n.refs)
            x = r.u32();
        n.label_dist.resize(nl);
        for (double& p : n.label_dist)
            p = r.f64();
        n.support.resize(r.u32());
        for (LabelId& s : n.support)
            s = r.u16();
        n.declared = r.u8() != 0;
        n.set_p = r.f64();
        n.component = r.u32();
        n.slot = r.u32();
    }
    g.edges.resize(r.u32());
    for (auto& e : g.edges) {
        e.u = r.u32();
        e.v = r.u32();
        e.dist.correlated = r.u8() != 0;
        if (e.dist.correlated) {
            e.dist.cpt.resize(nl * nl);
            for (double& p : e.dist.cpt)
                p = r.f64();
        } else {
            e.dist.p = r.f64();
        }
    }
    g.components.resize(r.u32());
    for (auto& c : g.components) {
        c.nodes.resize(r.u32());
        for (NodeId& v : c.nodes)
            v = r.u32();
        c.zn = r.f64();
        c.configs.resize(r.u32());
        for (auto& cfg : c.configs) {
            cfg.mask = r.u32();
            cfg.pr = r.f64();
        }
    }
    r.expect_eof();

    if (m.at("nodes").get<size_t>() != g.nodes.size() ||
        m.at("edges").get<size_t>() != g.edges.size())
        throw Error("artifact does not match its manifest in " + dir);

    // Derived structure is rebuilt, not stored.
    g.adj.assign(g.nodes.size(), {});
    for (uint32_t e = 0; e < g.edges.size(); ++e) {
        g.adj[g.edges[e].u].emplace_back(g.edges[e].v, e);
        g.adj[g.edges[e].v].emplace_back(g.edges[e].u, e);
    }
    for (auto& a : g.adj)
        std::sort(a.begin(), a.end());
    g.sets_of_ref.assign(g.ref_ids.size(), {});
    for (NodeId v = 0; v < g.nodes.size(); ++v)
        for (RefId x : g.nodes[v].refs)
            g.sets_of_ref[x].push_back(v);
    return g;
}

void save_context(const ContextTable& t, const std::string& dir) {
    std::filesystem::create_directories(dir);
    json m;
    m["kind"] = "context";
    m["fingerprint"] = hex64(t.fingerprint);
    m["labels"] = t.nlabels;
    m["cells"] = t.cells.size();
    write_manifest(dir, std::move(m));

    BinWriter w(dir + "/data.bin", kDefaultWriteBuffer);
    w.u64(t.fingerprint);
    w.u64(t.nlabels);
    w.u64(t.cells.size());
    for (const auto& c : t.cells) {
        w.u32(c.c);
        w.f64(c.ppu);
        w.f64(c.fpu);
    }
    w.close();
}

ContextTable load_context(const std::string& dir, uint64_t expect_fingerprint) {
    load_manifest(dir, "context");
    BinReader r(dir + "/data.bin");
    ContextTable t;
    t.fingerprint = r.u64();
    if (t.fingerprint != expect_fingerprint)
        throw Error("context table does not match the graph (fingerprint mismatch)");
    t.nlabels = r.u64();
    t.cells.resize(r.u64());
    for (auto& c : t.cells) {
        c.c = r.u32();
        c.ppu = r.f64();
        c.fpu = r.f64();
    }
    r.expect_eof();
    return t;
}

namespace {

size_t record_bytes(uint32_t plen) {
    return (static_cast<size_t>(plen) + 1) * 4 + 16;
}

// Loads records [from .. total) of one group from the segment.
PathGroup load_group_slice(const std::string& segment, const GroupLocation& loc,
                           uint64_t from) {
    PathGroup pg;
    pg.plen = loc.plen;
    pg.bucket_begin = loc.bucket_begin;
    pg.loaded_base = from;
    uint64_t total = loc.bucket_begin.back();
    uint64_t n = total - from;
    BinReader r(segment);
    r.seek(loc.file_offset + from * record_bytes(loc.plen));
    pg.node_buf.resize(n * (loc.plen + 1));
    pg.pr_le.resize(n);
    pg.pr_n.resize(n);
    for (uint64_t i = 0; i < n; ++i) {
        for (uint32_t j = 0; j <= loc.plen; ++j)
            pg.node_buf[i * (loc.plen + 1) + j] = r.u32();
        pg.pr_le[i] = r.f64();
        pg.pr_n[i] = r.f64();
    }
    return pg;
}

}  // namespace

const PathGroup* PathIndex::materialized(const LabelSeq& canon, uint32_t from_bucket) const {
    auto it = groups.find(canon);
    if (it != groups.end())
        return &it->second;
    auto lit = locations.find(canon);
    if (lit == locations.end())
        return nullptr;
    uint64_t need = lit->second.bucket_begin[from_bucket];
    auto cit = cache_.find(canon);
    if (cit != cache_.end() && cit->second.loaded_base <= need)
        return &cit->second;
    PathGroup pg = load_group_slice(segment_path, lit->second, need);
    return &(cache_[canon] = std::move(pg));
}

void PathIndex::for_each_group(
    const std::function<void(const LabelSeq&, const PathGroup&)>& fn) const {
    for (const auto& [seq, pg] : groups)
        fn(seq, pg);
    for (const auto& [seq, loc] : locations) {
        if (groups.count(seq))
            continue;
        // Transient full load; large lazy indexes stream group by group.
        PathGroup pg = load_group_slice(segment_path, loc, 0);
        fn(seq, pg);
    }
}

void save_path_index(const PathIndex& idx, const std::string& dir, size_t write_buffer) {
    if (idx.groups.empty() && !idx.locations.empty())
        throw Error("cannot save a lazily loaded index; rebuild it instead");
    if (idx.nlabels > 255)
        throw Error("index storage supports at most 255 labels");
    if (idx.L + 1 > 255)
        throw Error("index storage supports path lengths up to 254");
    std::filesystem::create_directories(dir);

    size_t nb = idx.nbuckets();
    json m;
    m["kind"] = "path_index";
    m["fingerprint"] = hex64(idx.fingerprint);
    m["L"] = idx.L;
    m["beta"] = idx.beta;
    m["gamma"] = idx.gamma;
    m["labels"] = idx.nlabels;
    m["buckets"] = nb;
    // Bucket sort key as fixed-point, documenting the segment order.
    std::vector<uint32_t> fp16(nb);
    for (size_t k = 0; k < nb; ++k)
        fp16[k] = static_cast<uint32_t>(std::lround(idx.bucket_value(static_cast<uint32_t>(k)) * 1e4));
    m["bucket_points_fp16"] = fp16;
    m["groups"] = idx.groups.size();
    m["records"] = idx.total_records();
    write_manifest(dir, std::move(m));

    BinWriter w(dir + "/data.bin", write_buffer);
    // Table of contents, in canonical sequence order.
    w.u64(idx.groups.size());
    uint64_t toc_bytes = 8;
    for (const auto& [seq, pg] : idx.groups)
        toc_bytes += 1 + seq.size() + 8 + 8 * (nb + 1);
    uint64_t off = toc_bytes;
    for (const auto& [seq, pg] : idx.groups) {
        w.u8(static_cast<uint8_t>(seq.size()));
        for (LabelId s : seq)
            w.u8(static_cast<uint8_t>(s));
        w.u64(off);
        for (uint64_t b : pg.bucket_begin)
            w.u64(b);
        off += pg.total() * record_bytes(pg.plen);
    }
    // Records: one run sorted by (sequence bytes, bucket, ordinal).
    for (const auto& [seq, pg] : idx.groups) {
        uint64_t n = pg.total();
        for (uint64_t i = 0; i < n; ++i) {
            const NodeId* nd = pg.rec_nodes(i);
            for (uint32_t j = 0; j <= pg.plen; ++j)
                w.u32(nd[j]);
            w.f64(pg.pr_le[i]);
            w.f64(pg.pr_n[i]);
        }
    }
    w.close();
}

PathIndex load_path_index(const std::string& dir) {
    json m = load_manifest(dir, "path_index");
    PathIndex idx;
    idx.fingerprint = parse_hex64(m.at("fingerprint").get<std::string>());
    idx.L = m.at("L").get<size_t>();
    idx.beta = m.at("beta").get<double>();
    idx.gamma = m.at("gamma").get<double>();
    idx.nlabels = m.at("labels").get<size_t>();
    size_t nb = idx.nbuckets();
    if (m.at("buckets").get<size_t>() != nb)
        throw Error("artifact does not match its manifest in " + dir);
    idx.segment_path = dir + "/data.bin";

    BinReader r(idx.segment_path);
    uint64_t ngroups = r.u64();
    if (ngroups != m.at("groups").get<uint64_t>())
        throw Error("artifact does not match its manifest in " + dir);
    uint64_t expect_end = 0;
    for (uint64_t gi = 0; gi < ngroups; ++gi) {
        uint8_t len = r.u8();
        if (len == 0)
            throw Error("artifact corrupt: empty sequence in " + dir);
        LabelSeq seq(len);
        for (auto& s : seq) {
            uint8_t b = r.u8();
            if (b >= idx.nlabels)
                throw Error("artifact corrupt: label out of range in " + dir);
            s = b;
        }
        GroupLocation loc;
        loc.plen = static_cast<uint32_t>(len - 1);
        loc.file_offset = r.u64();
        loc.bucket_begin.resize(nb + 1);
        for (auto& b : loc.bucket_begin)
            b = r.u64();
        expect_end = loc.file_offset + loc.bucket_begin.back() * record_bytes(loc.plen);
        idx.locations.emplace(std::move(seq), std::move(loc));
    }
    uint64_t have = file_size_of(idx.segment_path);
    if (have != std::max<uint64_t>(expect_end, 8))
        throw Error("artifact truncated: " + idx.segment_path);
    return idx;
}

void save_histogram(const Histogram& h, const std::string& dir) {
    std::filesystem::create_directories(dir);
    json m;
    m["kind"] = "histogram";
    m["fingerprint"] = hex64(h.fingerprint);
    m["points"] = h.points;
    m["sequences"] = h.counts.size();
    write_manifest(dir, std::move(m));

    BinWriter w(dir + "/data.bin", kDefaultWriteBuffer);
    w.u64(h.fingerprint);
    w.u32(static_cast<uint32_t>(h.points.size()));
    for (double p : h.points)
        w.f64(p);
    w.u64(h.counts.size());
    for (const auto& [seq, cnt] : h.counts) {
        if (seq.size() > 255)
            throw Error("histogram storage supports sequences up to 255 labels");
        w.u8(static_cast<uint8_t>(seq.size()));
        for (LabelId s : seq)
            w.u16(s);
        for (uint64_t c : cnt)
            w.u64(c);
    }
    w.close();
}

Histogram load_histogram(const std::string& dir, uint64_t expect_fingerprint) {
    load_manifest(dir, "histogram");
    BinReader r(dir + "/data.bin");
    Histogram h;
    h.fingerprint = r.u64();
    if (h.fingerprint != expect_fingerprint)
        throw Error("histogram does not match the index (fingerprint mismatch)");
    h.points.resize(r.u32());
    for (double& p : h.points)
        p = r.f64();
    uint64_t n = r.u64();
    for (uint64_t i = 0; i < n; ++i) {
        LabelSeq seq(r.u8());
        for (auto& s : seq)
            s = r.u16();
        std::vector<uint64_t> cnt(h.points.size());
        for (auto& c : cnt)
            c = r.u64();
        h.counts.emplace(std::move(seq), std::move(cnt));
    }
    r.expect_eof();
    return h;
}

}  // namespace peg
