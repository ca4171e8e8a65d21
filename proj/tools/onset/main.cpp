// onset: command-line front end for the extraction service and the evaluation harness.

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "onset/benchmark_runner.hpp"
#include "onset/config.hpp"
#include "onset/error.hpp"
#include "onset/ged.hpp"
#include "onset/pipeline.hpp"
#include "onset/scoring.hpp"
#include "onset/service.hpp"
#include "onset/sparql.hpp"
#include "onset/template_query.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitBackend = 2;

struct Common {
    std::string config_path = "config/onset.yaml";
    std::string ontology;
    std::string backend;  // overrides lm.backend
    bool verbose = false;
};

onset::ServiceConfig load(const Common& c) {
    auto cfg = onset::load_config(c.config_path);
    onset::apply_env_overrides(cfg);
    if (!c.backend.empty()) cfg.lm.backend = c.backend;
    return cfg;
}

const onset::OntologySource& pick_source(const onset::ServiceConfig& cfg, const std::string& id) {
    if (id.empty()) {
        if (cfg.ontologies.size() > 1) throw onset::InvalidArgument("several ontologies configured; pass --ontology");
        return cfg.ontologies.front();
    }
    for (const auto& s : cfg.ontologies) {
        if (s.id == id) return s;
    }
    throw onset::InvalidArgument(fmt::format("unknown ontology '{}'", id));
}

struct Loaded {
    std::string id;
    onset::OntologyPtr ontology;
    std::shared_ptr<const onset::SemanticIndex> index;
};

Loaded load_index(const onset::ServiceConfig& cfg, const std::string& id) {
    const auto& src = pick_source(cfg, id);
    Loaded out;
    out.id = src.id;
    out.ontology = onset::load_ontology_file(src.path, src.counts, src.mode);
    onset::SemanticIndexOptions opt;
    opt.cache_dir = cfg.embedding.cache_dir;
    out.index = std::make_shared<const onset::SemanticIndex>(
        onset::SemanticIndex::build(out.ontology, onset::make_embedder(cfg.embedding), opt));
    return out;
}

onset::GatewayOptions gateway_options(const onset::ServiceConfig& cfg) {
    onset::GatewayOptions gw;
    gw.temperature = cfg.lm.temperature;
    gw.max_tokens = cfg.lm.max_tokens;
    gw.seed = cfg.seed;
    gw.model = cfg.lm.model;
    gw.max_in_flight = cfg.lm.max_in_flight;
    return gw;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw onset::Error(fmt::format("cannot open {}", path));
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
    }
    return lines;
}

onset::PrototypeGraph graph_line(const std::string& line, onset::GraphStage stage) {
    auto doc = nlohmann::json::parse(line);
    const auto& g = doc.contains("graph") ? doc["graph"] : doc;
    return onset::graph_from_json(g, stage).graph;
}

std::string dump(const nlohmann::ordered_json& j, int indent = -1) {
    return j.dump(indent, ' ', false, nlohmann::json::error_handler_t::replace);
}

onset::HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

int cmd_serve(const Common& common, const std::string& listen_override) {
    auto cfg = load(common);
    if (!listen_override.empty()) cfg.listen = listen_override;
    auto service = onset::make_service(cfg);
    auto [host, port] = onset::parse_listen_address(cfg.listen);
    onset::HttpServer server(*service, cfg.cors_origin);
    int bound = server.bind(host, port);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    spdlog::info("listening on {}:{}", host, bound);
    server.serve();
    g_server = nullptr;
    return 0;
}

int cmd_extract(const Common& common, const std::string& query, std::optional<std::size_t> k, bool sparql_only) {
    auto cfg = load(common);
    auto loaded = load_index(cfg, common.ontology);
    auto backend = onset::make_backend(cfg.lm, cfg.seed);
    if (!backend) throw onset::InvalidArgument("no LM endpoint configured (lm.url or ONSET_LM_URL)");
    onset::LmGateway gateway(backend, gateway_options(cfg));
    auto trace = onset::run_pipeline(query, *loaded.index, gateway, k.value_or(cfg.retrieval_k));
    std::string sparql = trace.ok() ? onset::to_sparql(trace.corrected_graph) : std::string();
    if (sparql_only) {
        if (!trace.ok()) {
            std::cerr << "no graph found in the request\n";
            return kExitUsage;
        }
        std::cout << sparql << "\n";
        return 0;
    }
    auto doc = onset::trace_to_json(trace, loaded.ontology.get());
    doc["sparql"] = trace.ok() ? nlohmann::ordered_json(sparql) : nlohmann::ordered_json();
    std::cout << dump(doc, 2) << "\n";
    return 0;
}

int cmd_index(const Common& common) {
    auto cfg = load(common);
    for (const auto& src : cfg.ontologies) {
        if (!common.ontology.empty() && src.id != common.ontology) continue;
        auto loaded = load_index(cfg, src.id);
        const auto& st = loaded.index->stats();
        std::cout << fmt::format("{}: {} classes, {} links, dim {}, {} ({} embedding requests){}\n", src.id,
                                 loaded.index->size(onset::ItemKind::classes), loaded.index->size(onset::ItemKind::links),
                                 loaded.index->dim(), st.cache_hit ? "cache hit" : "embedded", st.embedding_requests,
                                 st.cache_file ? ", cache " + st.cache_file->string() : std::string());
    }
    return 0;
}

struct EvalOptions {
    std::vector<std::size_t> k_values = {2, 3, 5, 7};
    std::size_t count = 128;
    std::uint64_t seed = 42;
    std::size_t top_k_links = 10;
    int depth = 2;
    std::string origin = "templated";
    std::string input;
    std::string predicted;
    std::string truth;
    std::string journal;
    std::string csv;
    std::string model;
    std::size_t workers = 4;
    std::optional<std::size_t> retrieval_k;
};

int cmd_sample(const Common& common, const EvalOptions& o) {
    auto cfg = load(common);
    const auto& src = pick_source(cfg, common.ontology);
    auto onto = onset::load_ontology_file(src.path, src.counts, src.mode);
    onset::BenchmarkConfig bc;
    bc.seed = o.seed;
    bc.top_k_links = o.top_k_links;
    bc.depth = o.depth;
    for (std::size_t k : o.k_values) {
        for (std::size_t i = 0; i < o.count; ++i) {
            auto s = onset::sample_for_query(*onto, bc, k, i);
            nlohmann::ordered_json line;
            line["k"] = k;
            line["index"] = i;
            line["early_stop"] = s.early_stop;
            line["graph"] = onset::graph_to_json(s.graph);
            std::cout << dump(line) << "\n";
        }
    }
    return 0;
}

int cmd_genq(const Common& common, const EvalOptions& o) {
    auto cfg = load(common);
    const auto& src = pick_source(cfg, common.ontology);
    auto onto = onset::load_ontology_file(src.path, src.counts, src.mode);
    auto origin = onset::query_origin_from_string(o.origin);
    std::optional<onset::LmGateway> gateway;
    if (origin == onset::QueryOrigin::lm) {
        auto backend = onset::make_backend(cfg.lm, cfg.seed);
        if (!backend) throw onset::InvalidArgument("no LM endpoint configured (lm.url or ONSET_LM_URL)");
        gateway.emplace(backend, gateway_options(cfg));
    } else if (origin != onset::QueryOrigin::templated) {
        throw onset::InvalidArgument("genq supports --origin templated or lm");
    }
    for (const auto& line : read_lines(o.input)) {
        auto g = graph_line(line, onset::GraphStage::sampled);
        std::string text = gateway ? gateway->generate_query_text(g, *onto) : onset::template_query(g, *onto);
        nlohmann::ordered_json out;
        out["graph"] = onset::graph_to_json(g);
        out["query_text"] = text;
        out["origin"] = o.origin;
        std::cout << dump(out) << "\n";
    }
    return 0;
}

int cmd_score(const EvalOptions& o) {
    auto predicted = read_lines(o.predicted);
    auto truth = read_lines(o.truth);
    if (predicted.size() != truth.size()) {
        throw onset::InvalidArgument(fmt::format("{} predicted graphs but {} truth graphs", predicted.size(), truth.size()));
    }
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        auto p = graph_line(predicted[i], onset::GraphStage::corrected);
        auto t = graph_line(truth[i], onset::GraphStage::sampled);
        nlohmann::ordered_json out = {{"index", i},
                                      {"f1_node", onset::f1_node(p, t)},
                                      {"f1_rel", onset::f1_rel(p, t)},
                                      {"ged_s", onset::ged_score(p, t)}};
        std::cout << dump(out) << "\n";
    }
    return 0;
}

void write_report(const onset::ScoreReport& report, const std::string& csv) {
    std::cout << onset::format_report_text(report);
    if (!csv.empty()) {
        std::ofstream out(csv);
        if (!out) throw onset::Error(fmt::format("cannot write {}", csv));
        out << onset::format_report_csv(report);
    }
}

int cmd_run(const Common& common, const EvalOptions& o) {
    auto cfg = load(common);
    auto loaded = load_index(cfg, common.ontology);
    onset::BenchmarkConfig bc;
    bc.k_values = o.k_values;
    bc.queries_per_k = o.count;
    bc.origin = onset::query_origin_from_string(o.origin);
    bc.seed = o.seed;
    bc.retrieval_k = o.retrieval_k.value_or(cfg.retrieval_k);
    bc.top_k_links = o.top_k_links;
    bc.depth = o.depth;
    bc.ontology_name = loaded.id;
    bc.workers = o.workers;
    if (!o.journal.empty()) bc.journal = o.journal;
    if (bc.origin == onset::QueryOrigin::file) {
        if (o.input.empty()) throw onset::InvalidArgument("--origin file needs --input");
        bc.queries = onset::read_query_file(o.input, *loaded.ontology);
    }

    onset::BackendFactory factory;
    std::string lm_backend = cfg.lm.backend;
    if (lm_backend == "mock_oracle") {
        bc.model_name = "mock-oracle";
        factory = [](const onset::PrototypeGraph& truth) { return std::make_shared<onset::MockOracleBackend>(truth); };
    } else {
        auto shared = onset::make_backend(cfg.lm, cfg.seed);
        if (!shared) throw onset::InvalidArgument("no LM endpoint configured (lm.url or ONSET_LM_URL)");
        bc.model_name = o.model.empty() ? shared->model_id() : o.model;
        factory = [shared](const onset::PrototypeGraph&) { return shared; };
    }
    if (bc.model_name.empty()) bc.model_name = "unnamed";

    auto report = onset::run_benchmark(*loaded.index, factory, gateway_options(cfg), bc);
    write_report(report, o.csv);
    for (const auto& f : report.failures) spdlog::warn("{} failed at {}: {}", f.query_id, f.stage, f.message);
    return 0;
}

int cmd_report(const EvalOptions& o) {
    write_report(onset::read_journal(o.journal), o.csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ontology-constrained natural-language queries to SPARQL"};
    app.require_subcommand(1);
    Common common;
    app.add_option("-c,--config", common.config_path, "YAML configuration file");
    app.add_option("-o,--ontology", common.ontology, "Ontology id from the configuration");
    app.add_option("--backend", common.backend, "LM backend override: http, mock_random, mock_oracle");
    app.add_flag("-v,--verbose", common.verbose, "Debug logging");

    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    std::string listen;
    serve->add_option("--listen", listen, "host:port, overrides the configuration");

    auto* extract = app.add_subcommand("extract", "Run the pipeline once and print the trace");
    std::string query;
    std::optional<std::size_t> k;
    bool sparql_only = false;
    extract->add_option("query", query, "Natural-language request")->required();
    extract->add_option("-k", k, "Candidates retrieved per node and edge");
    extract->add_flag("--sparql-only", sparql_only, "Print only the SPARQL query");

    auto* index = app.add_subcommand("index", "Build or refresh embedding caches");

    auto* eval = app.add_subcommand("eval", "Synthetic evaluation");
    eval->require_subcommand(1);
    EvalOptions eo;
    auto add_sampling = [&](CLI::App* cmd) {
        cmd->add_option("--k-values", eo.k_values, "Node counts per sampled graph")->delimiter(',');
        cmd->add_option("-n,--count", eo.count, "Graphs per node count");
        cmd->add_option("--seed", eo.seed, "Run seed");
        cmd->add_option("--top-k-links", eo.top_k_links, "Most frequent links considered per draw");
        cmd->add_option("--depth", eo.depth, "Subtype depth for node downgrades");
    };
    auto* sample = eval->add_subcommand("sample", "Emit sampled graphs as JSON lines");
    add_sampling(sample);
    auto* genq = eval->add_subcommand("genq", "Phrase graphs from JSON lines as queries");
    genq->add_option("-i,--input", eo.input, "Graph JSON lines")->required();
    genq->add_option("--origin", eo.origin, "templated or lm");
    auto* score = eval->add_subcommand("score", "Score predicted against truth graphs, line by line");
    score->add_option("--predicted", eo.predicted, "Predicted graph JSON lines")->required();
    score->add_option("--truth", eo.truth, "Truth graph JSON lines")->required();
    auto* run = eval->add_subcommand("run", "Full benchmark");
    add_sampling(run);
    run->add_option("--origin", eo.origin, "templated, lm or file");
    run->add_option("-i,--input", eo.input, "Query file for --origin file");
    run->add_option("--journal", eo.journal, "Resumable JSON-lines results");
    run->add_option("--csv", eo.csv, "Write aggregates as CSV");
    run->add_option("--model", eo.model, "Model name recorded in results");
    run->add_option("--workers", eo.workers, "Concurrent queries");
    run->add_option("-k,--retrieval-k", eo.retrieval_k, "Candidates retrieved per node and edge");
    auto* report = eval->add_subcommand("report", "Aggregate a results journal");
    report->add_option("--journal", eo.journal, "Results journal")->required();
    report->add_option("--csv", eo.csv, "Write aggregates as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }
    spdlog::set_default_logger(spdlog::stderr_color_mt("onset"));
    spdlog::set_level(common.verbose ? spdlog::level::debug : spdlog::level::info);

    try {
        if (*serve) return cmd_serve(common, listen);
        if (*extract) return cmd_extract(common, query, k, sparql_only);
        if (*index) return cmd_index(common);
        if (*sample) return cmd_sample(common, eo);
        if (*genq) return cmd_genq(common, eo);
        if (*score) return cmd_score(eo);
        if (*run) return cmd_run(common, eo);
        if (*report) return cmd_report(eo);
    } catch (const onset::PipelineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.backend_failure() ? kExitBackend : kExitUsage;
    } catch (const onset::BackendError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
