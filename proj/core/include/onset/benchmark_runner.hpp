#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "onset/lm_backend.hpp"
#include "onset/lm_gateway.hpp"
#include "onset/ontology.hpp"
#include "onset/pipeline.hpp"
#include "onset/sampler.hpp"
#include "onset/semantic_index.hpp"

namespace onset {

enum class QueryOrigin { templated, lm, file };

std::string_view to_string(QueryOrigin origin) noexcept;
QueryOrigin query_origin_from_string(std::string_view text);

/// One entry of a query file: {"graph": ..., "query_text": ..., "origin": ...} per line.
struct QueryFileEntry {
    PrototypeGraph graph;  // iris, stage sampled
    std::string query_text;
    std::string origin = "human";
};

/// Reads a JSON-lines query file; graphs must validate clean against `index`.
std::vector<QueryFileEntry> read_query_file(const std::filesystem::path& path, const OntologyIndex& index);

struct BenchmarkConfig {
    std::vector<std::size_t> k_values = {2, 3, 5, 7};  // node sample counts (max_nodes)
    std::size_t queries_per_k = 128;
    QueryOrigin origin = QueryOrigin::templated;
    std::uint64_t seed = 42;
    std::size_t retrieval_k = kDefaultRetrievalK;
    std::size_t top_k_links = 10;
    int depth = 2;
    std::string model_name = "unknown";
    std::string ontology_name = "ontology";
    std::vector<QueryFileEntry> queries;  // origin == file
    std::optional<std::filesystem::path> journal;  // resumable JSON-lines output
    std::size_t workers = 4;
};

struct QueryRecord {
    std::string query_id;
    std::size_t k = 0;
    std::string model;
    std::string ontology;
    std::string origin;
    std::string stage;  // raw | aligned
    double f1_node = 0.0;
    double f1_rel = 0.0;
    double ged_s = 0.0;
    std::string query_text;
};

struct QueryFailure {
    std::string query_id;
    std::size_t k = 0;
    std::string stage;
    std::string message;
};

struct AggregateRow {
    std::size_t k = 0;
    std::string model;
    std::string ontology;
    std::string origin;
    std::string stage;
    std::size_t n = 0;
    double f1_node = 0.0;
    double f1_rel = 0.0;
    double ged_s = 0.0;
};

struct ScoreReport {
    std::vector<QueryRecord> records;
    std::vector<QueryFailure> failures;

    /// Arithmetic means grouped by (k, model, ontology, origin, stage).
    std::vector<AggregateRow> aggregates() const;
};

/// Backend for one benchmark query; the oracle mock needs the truth graph in label form.
using BackendFactory = std::function<std::shared_ptr<LmBackend>(const PrototypeGraph& truth_labels)>;

/// Samples graphs (or reads them from cfg.queries), phrases queries, runs the pipeline
/// and scores both the raw and the corrected graph against the truth. Query i of
/// node count k draws from an RNG seeded by (seed, k, i), so results do not depend
/// on worker scheduling. With a journal, queries already recorded under the same
/// seed are loaded instead of re-run, and new results are appended.
ScoreReport run_benchmark(const SemanticIndex& sidx, const BackendFactory& backends, const GatewayOptions& gateway,
                          const BenchmarkConfig& cfg);

/// Graphs of the sampled stage for node count k, query index i.
SampledGraph sample_for_query(const OntologyIndex& index, const BenchmarkConfig& cfg, std::size_t k, std::size_t i);

nlohmann::ordered_json record_to_json(const QueryRecord& r);
QueryRecord record_from_json(const nlohmann::json& j);

/// Reads records and failures written by run_benchmark.
ScoreReport read_journal(const std::filesystem::path& path);

/// Fixed-width table of aggregates, with non-binding reference values where known.
std::string format_report_text(const ScoreReport& report);
std::string format_report_csv(const ScoreReport& report);

struct ReferenceScore {
    std::size_t k;
    const char* origin;
    const char* stage;
    double f1_node;
    double ged_s;
};

/// Published reference scores (Llama 3.2 3B, DBpedia). Not assertions.
const std::vector<ReferenceScore>& reference_scores();

}  // namespace onset
