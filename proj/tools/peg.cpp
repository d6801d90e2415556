// Command line front end: generate synthetic documents, build artifact
// stores, answer queries, cross-check against the exact matcher, benchmark,
// and inspect stores.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "peg/datagen.hpp"
#include "peg/engine.hpp"
#include "peg/io_json.hpp"
#include "peg/oracle.hpp"
#include "peg/storage.hpp"

namespace {

using namespace peg;

struct Store {
    EntityGraph graph;
    ContextTable context;
    PathIndex index;
    Histogram histogram;
};

Store open_store(const std::string& dir) {
    Store s;
    s.graph = load_entity_graph(dir + "/graph");
    s.context = load_context(dir + "/context", s.graph.fingerprint);
    s.index = load_path_index(dir + "/index");
    if (s.index.fingerprint != s.graph.fingerprint)
        throw Error("index does not match the graph (fingerprint mismatch)");
    s.histogram = load_histogram(dir + "/histogram", s.index.fingerprint);
    return s;
}

std::vector<ResultRow> to_rows(const EntityGraph& g, const QueryGraph& q,
                               const std::vector<Match>& ms) {
    std::vector<ResultRow> rows;
    rows.reserve(ms.size());
    for (const Match& m : ms) {
        ResultRow r;
        for (size_t i = 0; i < q.nodes.size(); ++i)
            r.mapping.emplace_back(q.nodes[i].id, g.nodes[m.mapping[i]].id);
        r.pr_le = m.pr_le;
        r.pr_n = m.pr_n;
        r.probability = m.probability;
        rows.push_back(std::move(r));
    }
    return rows;
}

void emit_rows(const std::vector<ResultRow>& rows, const std::string& format,
               const std::string& out) {
    std::string text = format == "csv" ? results_to_csv_text(rows) : results_to_json_text(rows);
    if (out.empty())
        std::cout << text;
    else
        write_text_file(out, text);
}

EntityGraph graph_from_document(const std::string& path) {
    Pgd pgd = load_pgd_file(path);
    ValidationReport rep = validate_pgd(pgd);
    if (!rep.ok()) {
        std::string msg = "invalid document:";
        for (const auto& v : rep.violations)
            msg += "\n  [" + v.code + "] " + v.message;
        throw Error(msg);
    }
    return build_entity_graph(pgd);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probabilistic entity graph query engine"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "generate a synthetic graph document");
    GenParams gp;
    std::string gen_out = "graph.json";
    size_t gen_query_nodes = 0, gen_query_edges = 0;
    double gen_alpha = 0.5;
    std::string gen_query_out;
    gen->add_option("--refs", gp.n_refs, "number of references");
    gen->add_option("--edges", gp.n_edges, "number of edges (0: 5x refs)");
    gen->add_option("--labels", gp.n_labels, "alphabet size");
    gen->add_option("--uncertain", gp.uncertain_fraction, "uncertain fraction");
    gen->add_option("--groups", gp.k_groups, "identity group count (default refs/1000)");
    gen->add_option("--group-size", gp.group_size, "references per identity group");
    gen->add_option("--pairs", gp.pairs_per_group, "same-entity pairs per group");
    gen->add_flag("--correlated", gp.correlated, "label-conditioned edge existence");
    gen->add_option("--seed", gp.seed, "random seed");
    gen->add_option("-o,--out", gen_out, "output document path");
    gen->add_option("--query-nodes", gen_query_nodes, "also generate a query: node count");
    gen->add_option("--query-edges", gen_query_edges, "query edge count");
    gen->add_option("--alpha", gen_alpha, "query threshold");
    gen->add_option("--query-out", gen_query_out, "query output path");

    // build
    auto* build = app.add_subcommand("build", "build a store from a graph document");
    std::string build_graph, build_out = "store";
    size_t build_L = 3;
    double build_beta = 0.1, build_gamma = 0.1;
    unsigned build_threads = 1;
    build->add_option("--graph", build_graph, "graph document (json)")->required();
    build->add_option("-o,--out", build_out, "store directory");
    build->add_option("-L,--max-length", build_L, "maximum indexed path length");
    build->add_option("--beta", build_beta, "index probability floor");
    build->add_option("--gamma", build_gamma, "bucket width");
    build->add_option("--threads", build_threads, "worker threads");

    // query
    auto* qry = app.add_subcommand("query", "answer a query against a store");
    std::string q_store, q_query, q_format = "json", q_out;
    double q_alpha = 0.0;
    unsigned q_threads = 1;
    bool q_stats = false;
    qry->add_option("--store", q_store, "store directory")->required();
    qry->add_option("--query", q_query, "query document (json)")->required();
    qry->add_option("--alpha", q_alpha, "override the query's threshold");
    qry->add_option("--threads", q_threads, "worker threads");
    qry->add_option("--format", q_format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    qry->add_option("-o,--out", q_out, "write results to a file");
    qry->add_flag("--stats", q_stats, "print stage statistics to stderr");

    // oracle
    auto* orc = app.add_subcommand("oracle", "answer a query by exhaustive matching");
    std::string o_graph, o_query, o_format = "json", o_out;
    double o_alpha = 0.0;
    orc->add_option("--graph", o_graph, "graph document (json)")->required();
    orc->add_option("--query", o_query, "query document (json)")->required();
    orc->add_option("--alpha", o_alpha, "override the query's threshold");
    orc->add_option("--format", o_format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    orc->add_option("-o,--out", o_out, "write results to a file");

    // bench
    auto* bench = app.add_subcommand("bench", "time a query against a store");
    std::string b_store, b_query;
    unsigned b_threads = 1;
    size_t b_repeat = 3;
    bench->add_option("--store", b_store, "store directory")->required();
    bench->add_option("--query", b_query, "query document (json)")->required();
    bench->add_option("--threads", b_threads, "worker threads");
    bench->add_option("--repeat", b_repeat, "repetitions");

    // stats
    auto* stats = app.add_subcommand("stats", "describe a store");
    std::string s_store;
    stats->add_option("--store", s_store, "store directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            Pgd pgd = generate_pgd(gp);
            save_pgd_file(pgd, gen_out);
            std::cerr << "wrote " << gen_out << ": " << pgd.references.size()
                      << " references, " << pgd.edges.size() << " edges, " << pgd.sets.size()
                      << " sets\n";
            if (gen_query_nodes > 0) {
                QueryGraph q = generate_query(gen_query_nodes, gen_query_edges, pgd.labels,
                                              gen_alpha, gp.seed);
                std::string path = gen_query_out.empty() ? "query.json" : gen_query_out;
                save_query_file(q, path);
                std::cerr << "wrote " << path << "\n";
            }
            return 0;
        }
        if (build->parsed()) {
            EntityGraph g = graph_from_document(build_graph);
            std::cerr << "entity graph: " << g.nodes.size() << " nodes, " << g.edges.size()
                      << " edges, " << g.components.size() << " components\n";
            ContextTable ctx = compute_context(g);
            PathIndex idx = build_path_index(g, build_L, build_beta, build_gamma, build_threads);
            std::cerr << "index: " << idx.groups.size() << " sequences, "
                      << idx.total_records() << " records\n";
            Histogram h = build_histograms(idx);
            save_entity_graph(g, build_out + "/graph");
            save_context(ctx, build_out + "/context");
            save_path_index(idx, build_out + "/index");
            save_histogram(h, build_out + "/histogram");
            std::cerr << "wrote store " << build_out << "\n";
            return 0;
        }
        if (qry->parsed()) {
            Store st = open_store(q_store);
            QueryGraph q = load_query_file(q_query);
            if (q_alpha > 0.0)
                q.alpha = q_alpha;
            EngineOptions opts;
            opts.threads = q_threads;
            QueryResult res = answer_query(st.graph, st.index, st.histogram, st.context, q, opts);
            if (q_stats) {
                std::cerr << "matches: " << res.matches.size() << "\n"
                          << "search space: estimated " << res.stats.ss0 << ", path "
                          << res.stats.path_size << ", pruned " << res.stats.path_ctx_size
                          << ", reduced " << res.stats.final_size << "\n"
                          << "ms: decompose " << res.stats.ms_decompose << ", candidates "
                          << res.stats.ms_candidates << ", reduce " << res.stats.ms_reduce
                          << ", enumerate " << res.stats.ms_enumerate << ", total "
                          << res.stats.ms_total << "\n";
            }
            emit_rows(to_rows(st.graph, q, res.matches), q_format, q_out);
            return 0;
        }
        if (orc->parsed()) {
            EntityGraph g = graph_from_document(o_graph);
            QueryGraph q = load_query_file(o_query);
            if (o_alpha > 0.0)
                q.alpha = o_alpha;
            std::vector<Match> ms = oracle_subgraph_match(g, q, q.alpha);
            emit_rows(to_rows(g, q, ms), o_format, o_out);
            return 0;
        }
        if (bench->parsed()) {
            Store st = open_store(b_store);
            QueryGraph q = load_query_file(b_query);
            EngineOptions opts;
            opts.threads = b_threads;
            StageStats best;
            size_t matches = 0;
            for (size_t i = 0; i < std::max<size_t>(b_repeat, 1); ++i) {
                QueryResult res = answer_query(st.graph, st.index, st.histogram, st.context,
                                               q, opts);
                matches = res.matches.size();
                if (i == 0 || res.stats.ms_total < best.ms_total)
                    best = res.stats;
            }
            std::cout << "matches " << matches << "\n"
                      << "decompose_ms " << best.ms_decompose << "\n"
                      << "candidates_ms " << best.ms_candidates << "\n"
                      << "reduce_ms " << best.ms_reduce << "\n"
                      << "enumerate_ms " << best.ms_enumerate << "\n"
                      << "total_ms " << best.ms_total << "\n";
            return 0;
        }
        if (stats->parsed()) {
            Store st = open_store(s_store);
            std::cout << "graph: " << st.graph.nodes.size() << " nodes, "
                      << st.graph.edges.size() << " edges, " << st.graph.components.size()
                      << " components, " << st.graph.labels.size() << " labels\n";
            size_t multi = 0;
            for (const auto& c : st.graph.components)
                multi += c.configs.size() > 1;
            std::cout << "identity: " << multi << " components with multiple configurations\n";
            std::cout << "index: L " << st.index.L << ", beta " << st.index.beta << ", gamma "
                      << st.index.gamma << ", "
                      << st.index.groups.size() + st.index.locations.size() << " sequences, "
                      << st.index.total_records() << " records, " << st.index.nbuckets()
                      << " buckets\n";
            std::cout << "histogram: " << st.histogram.counts.size() << " sequences at "
                      << st.histogram.points.size() << " points\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
