#include "onset/benchmark_runner.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "onset/error.hpp"
#include "onset/ged.hpp"
#include "onset/scoring.hpp"
#include "onset/template_query.hpp"

namespace onset {

namespace {

struct WorkItem {
    std::size_t k;
    std::size_t i;
    std::string id;
};

struct Outcome {
    std::vector<QueryRecord> records;
    std::optional<QueryFailure> failure;
};

nlohmann::ordered_json failure_to_json(const QueryFailure& f) {
    return {{"query_id", f.query_id}, {"k", f.k}, {"stage", f.stage}, {"message", f.message}};
}

}  // namespace

std::string_view to_string(QueryOrigin origin) noexcept {
    switch (origin) {
        case QueryOrigin::templated: return "templated";
        case QueryOrigin::lm: return "lm";
        case QueryOrigin::file: return "file";
    }
    return "unknown";
}

QueryOrigin query_origin_from_string(std::string_view text) {
    if (text == "templated") return QueryOrigin::templated;
    if (text == "lm") return QueryOrigin::lm;
    if (text == "file") return QueryOrigin::file;
    throw InvalidArgument(fmt::format("unknown query origin '{}'", text));
}

std::vector<QueryFileEntry> read_query_file(const std::filesystem::path& path, const OntologyIndex& index) {
    std::ifstream in(path);
    if (!in) throw Error(fmt::format("cannot open query file {}", path.string()));
    std::vector<QueryFileEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("graph") || !doc.contains("query_text")) {
            throw ParseError(fmt::format("{}:{}: expected {{graph, query_text, origin}}", path.string(), lineno));
        }
        QueryFileEntry entry;
        entry.graph = graph_from_json(doc["graph"], GraphStage::sampled).graph;
        entry.query_text = doc["query_text"].get<std::string>();
        entry.origin = doc.value("origin", std::string("human"));
        if (!validate_graph(entry.graph, index).clean()) {
            throw InvalidArgument(fmt::format("{}:{}: graph is not schema-valid", path.string(), lineno));
        }
        out.push_back(std::move(entry));
    }
    return out;
}

SampledGraph sample_for_query(const OntologyIndex& index, const BenchmarkConfig& cfg, std::size_t k, std::size_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(i)};
    Rng rng(seq);
    SamplerConfig sc;
    sc.top_k_links = cfg.top_k_links;
    sc.depth = cfg.depth;
    sc.max_nodes = k;
    sc.mode = index.sampling_mode();
    return sample_graph(index, sc, rng);
}

nlohmann::ordered_json record_to_json(const QueryRecord& r) {
    return {{"query_id", r.query_id}, {"k", r.k},           {"model", r.model},   {"ontology", r.ontology},
            {"origin", r.origin},     {"stage", r.stage},   {"f1_node", r.f1_node}, {"f1_rel", r.f1_rel},
            {"ged_s", r.ged_s},       {"query_text", r.query_text}};
}

QueryRecord record_from_json(const nlohmann::json& j) {
    QueryRecord r;
    r.query_id = j.at("query_id").get<std::string>();
    r.k = j.at("k").get<std::size_t>();
    r.model = j.value("model", std::string());
    r.ontology = j.value("ontology", std::string());
    r.origin = j.value("origin", std::string());
    r.stage = j.at("stage").get<std::string>();
    r.f1_node = j.at("f1_node").get<double>();
    r.f1_rel = j.at("f1_rel").get<double>();
    r.ged_s = j.at("ged_s").get<double>();
    r.query_text = j.value("query_text", std::string());
    return r;
}

namespace {

struct JournalEntries {
    std::map<std::string, std::vector<QueryRecord>> records;
    std::map<std::string, QueryFailure> failures;
};

JournalEntries load_journal(const std::filesystem::path& path, std::optional<std::uint64_t> seed) {
    JournalEntries out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        auto doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) continue;  // torn trailing line after a crash
        if (seed && doc.value("seed", std::uint64_t{0}) != *seed) continue;
        try {
            if (doc.value("type", std::string()) == "failure") {
                QueryFailure f{doc.at("query_id").get<std::string>(), doc.at("k").get<std::size_t>(),
                               doc.value("stage", std::string()), doc.value("message", std::string())};
                out.failures[f.query_id] = f;
            } else {
                auto r = record_from_json(doc);
                out.records[r.query_id].push_back(std::move(r));
            }
        } catch (const nlohmann::json::exception&) {
            spdlog::warn("skipping malformed journal line in {}", path.string());
        }
    }
    return out;
}

}  // namespace

ScoreReport read_journal(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(fmt::format("journal {} does not exist", path.string()));
    auto entries = load_journal(path, std::nullopt);
    ScoreReport report;
    for (auto& [id, records] : entries.records) {
        for (auto& r : records) report.records.push_back(std::move(r));
    }
    for (auto& [id, f] : entries.failures) report.failures.push_back(std::move(f));
    return report;
}

ScoreReport run_benchmark(const SemanticIndex& sidx, const BackendFactory& backends, const GatewayOptions& gateway,
                          const BenchmarkConfig& cfg) {
    if (!backends) throw InvalidArgument("benchmark needs a backend factory");
    const OntologyIndex& index = sidx.ontology();

    std::vector<WorkItem> items;
    if (cfg.origin == QueryOrigin::file) {
        for (std::size_t i = 0; i < cfg.queries.size(); ++i) {
            items.push_back({cfg.queries[i].graph.nodes.size(), i, fmt::format("file-q{:04}", i)});
        }
    } else {
        for (std::size_t k : cfg.k_values) {
            if (k < 2) throw InvalidArgument("node sample counts must be at least 2");
            for (std::size_t i = 0; i < cfg.queries_per_k; ++i) items.push_back({k, i, fmt::format("k{}-q{:04}", k, i)});
        }
    }

    JournalEntries done;
    std::ofstream journal;
    if (cfg.journal) {
        done = load_journal(*cfg.journal, cfg.seed);
        journal.open(*cfg.journal, std::ios::app);
        if (!journal) throw Error(fmt::format("cannot append to journal {}", cfg.journal->string()));
    }
    std::mutex journal_mutex;

    auto run_one = [&](const WorkItem& item) -> Outcome {
        Outcome out;
        std::string stage = "sampling";
        try {
            PrototypeGraph truth;
            std::string query;
            std::string origin(to_string(cfg.origin));
            if (cfg.origin == QueryOrigin::file) {
                truth = cfg.queries[item.i].graph;
                query = cfg.queries[item.i].query_text;
                origin = cfg.queries[item.i].origin;
            } else {
                truth = sample_for_query(index, cfg, item.k, item.i).graph;
            }
            auto backend = backends(to_label_form(truth, index));
            LmGateway gw(backend, gateway);
            stage = "query_generation";
            if (cfg.origin == QueryOrigin::templated) query = template_query(truth, index);
            if (cfg.origin == QueryOrigin::lm) query = gw.generate_query_text(truth, index);

            stage = "pipeline";
            PipelineTrace trace;
            try {
                trace = run_pipeline(query, sidx, gw, cfg.retrieval_k);
            } catch (const PipelineError& e) {
                stage = std::string(to_string(e.stage()));
                throw;
            }

            stage = "scoring";
            auto make = [&](const char* st, const PrototypeGraph& predicted) {
                QueryRecord r;
                r.query_id = item.id;
                r.k = item.k;
                r.model = cfg.model_name;
                r.ontology = cfg.ontology_name;
                r.origin = origin;
                r.stage = st;
                r.f1_node = f1_node(predicted, truth);
                r.f1_rel = f1_rel(predicted, truth);
                r.ged_s = ged_score(predicted, truth);
                r.query_text = query;
                return r;
            };
            out.records.push_back(make("raw", align_raw_graph(trace.raw_graph, index)));
            out.records.push_back(make("aligned", trace.corrected_graph));
        } catch (const std::exception& e) {
            out.records.clear();
            out.failure = QueryFailure{item.id, item.k, stage, e.what()};
        }
        return out;
    };

    std::vector<Outcome> outcomes(items.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t n; (n = next.fetch_add(1)) < items.size();) {
            const auto& item = items[n];
            if (auto f = done.failures.find(item.id); f != done.failures.end()) {
                outcomes[n].failure = f->second;
                continue;
            }
            if (auto r = done.records.find(item.id); r != done.records.end() && r->second.size() >= 2) {
                outcomes[n].records = r->second;
                continue;
            }
            outcomes[n] = run_one(item);
            if (journal.is_open()) {
                std::lock_guard lock(journal_mutex);
                for (const auto& r : outcomes[n].records) {
                    auto j = record_to_json(r);
                    j["type"] = "record";
                    j["seed"] = cfg.seed;
                    journal << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
                }
                if (outcomes[n].failure) {
                    auto j = failure_to_json(*outcomes[n].failure);
                    j["type"] = "failure";
                    j["seed"] = cfg.seed;
                    journal << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
                }
                journal.flush();
            }
        }
    };
    std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, items.size()));
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    pool.clear();

    ScoreReport report;
    for (auto& o : outcomes) {
        for (auto& r : o.records) report.records.push_back(std::move(r));
        if (o.failure) report.failures.push_back(std::move(*o.failure));
    }
    return report;
}

std::vector<AggregateRow> ScoreReport::aggregates() const {
    using Key = std::tuple<std::size_t, std::string, std::string, std::string, std::string>;
    std::map<Key, AggregateRow> groups;
    for (const auto& r : records) {
        auto& row = groups[{r.k, r.model, r.ontology, r.origin, r.stage}];
        row.k = r.k;
        row.model = r.model;
        row.ontology = r.ontology;
        row.origin = r.origin;
        row.stage = r.stage;
        ++row.n;
        row.f1_node += r.f1_node;
        row.f1_rel += r.f1_rel;
        row.ged_s += r.ged_s;
    }
    std::vector<AggregateRow> out;
    for (auto& [key, row] : groups) {
        row.f1_node /= static_cast<double>(row.n);
        row.f1_rel /= static_cast<double>(row.n);
        row.ged_s /= static_cast<double>(row.n);
        out.push_back(row);
    }
    return out;
}

const std::vector<ReferenceScore>& reference_scores() {
    static const std::vector<ReferenceScore> refs = {
        {3, "human", "aligned", 0.63, 0.53},     {3, "human", "raw", 0.71, 0.53},
        {3, "lm", "aligned", 0.71, 0.49},        {3, "lm", "raw", 0.71, 0.34},
        {3, "templated", "aligned", 0.81, 0.55}, {3, "templated", "raw", 0.81, 0.53},
        {5, "human", "aligned", 0.75, 0.52},     {5, "human", "raw", 0.77, 0.24},
        {5, "lm", "aligned", 0.71, 0.41},        {5, "lm", "raw", 0.73, 0.26},
        {5, "templated", "aligned", 0.79, 0.48}, {5, "templated", "raw", 0.78, 0.46},
    };
    return refs;
}

namespace {

const ReferenceScore* find_reference(const AggregateRow& row) {
    for (const auto& ref : reference_scores()) {
        if (ref.k == row.k && row.origin == ref.origin && row.stage == ref.stage) return &ref;
    }
    return nullptr;
}

}  // namespace

std::string format_report_text(const ScoreReport& report) {
    std::string out = fmt::format("{:>3} {:<10} {:<8} {:<16} {:<12} {:>5} {:>8} {:>8} {:>8} {:>12}\n", "k", "origin",
                                  "stage", "model", "ontology", "n", "F1_node", "F1_rel", "GED_s", "ref F1/GED");
    for (const auto& row : report.aggregates()) {
        const auto* ref = find_reference(row);
        out += fmt::format("{:>3} {:<10} {:<8} {:<16} {:<12} {:>5} {:>8.3f} {:>8.3f} {:>8.3f} {:>12}\n", row.k, row.origin,
                           row.stage, row.model, row.ontology, row.n, row.f1_node, row.f1_rel, row.ged_s,
                           ref ? fmt::format("{:.2f}/{:.2f}", ref->f1_node, ref->ged_s) : std::string("-"));
    }
    out += fmt::format("failures: {}\n", report.failures.size());
    out += "ref: Llama 3.2 3B on DBpedia, for orientation only\n";
    return out;
}

std::string format_report_csv(const ScoreReport& report) {
    std::string out = "k,origin,stage,model,ontology,n,f1_node,f1_rel,ged_s,ref_f1_node,ref_ged_s\n";
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    for (const auto& row : report.aggregates()) {
        const auto* ref = find_reference(row);
        out += fmt::format("{},{},{},{},{},{},{:.6f},{:.6f},{:.6f},{},{}\n", row.k, quote(row.origin), row.stage,
                           quote(row.model), quote(row.ontology), row.n, row.f1_node, row.f1_rel, row.ged_s,
                           ref ? fmt::format("{:.2f}", ref->f1_node) : std::string(),
                           ref ? fmt::format("{:.2f}", ref->ged_s) : std::string());
    }
    return out;
}

}  // namespace onset
