#pragma once

#include <cstddef>
#include <exception>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "onset/error.hpp"
#include "onset/lm_gateway.hpp"
#include "onset/ontology.hpp"
#include "onset/prototype_graph.hpp"
#include "onset/semantic_index.hpp"

namespace onset {

enum class PipelineStage { raw, candidates, constrained, correction };

std::string_view to_string(PipelineStage stage) noexcept;

/// A stage failure. cause() is the original exception.
class PipelineError : public Error {
public:
    PipelineError(PipelineStage stage, std::exception_ptr cause, const std::string& what);
    PipelineStage stage() const noexcept { return stage_; }
    std::exception_ptr cause() const noexcept { return cause_; }
    bool backend_failure() const noexcept;  // cause is a BackendError
    bool invalid_input() const noexcept;    // cause is an InvalidArgument

private:
    PipelineStage stage_;
    std::exception_ptr cause_;
};

enum class PipelineStatus { ok, no_graph };

struct PipelineTrace {
    std::string input_query;
    std::size_t k = 0;
    PipelineStatus status = PipelineStatus::ok;
    PrototypeGraph raw_graph;
    CandidateSet candidate_set;
    PrototypeGraph constrained_graph;
    PrototypeGraph corrected_graph;
    ValidationReport corrections;  // of the constrained graph, before repair
    std::map<std::string, double> timings_ms;
    std::string config_hash;
    std::size_t raw_dropped_edges = 0;
    std::size_t constrained_dropped_edges = 0;

    bool ok() const noexcept { return status == PipelineStatus::ok; }
};

inline constexpr std::size_t kDefaultRetrievalK = 8;

/// Raw extraction, candidate retrieval, constrained extraction, correction.
/// An empty raw graph ends the run early with status no_graph.
/// Throws PipelineError labelled with the failing stage.
PipelineTrace run_pipeline(std::string_view query, const SemanticIndex& sidx, LmGateway& gateway,
                           std::size_t k = kDefaultRetrievalK);

/// Digest of prompts, decoding options, embedder model and k.
std::string pipeline_config_hash(const LmGateway& gateway, const SemanticIndex& sidx, std::size_t k);

nlohmann::ordered_json trace_to_json(const PipelineTrace& trace, const OntologyIndex* index = nullptr);

}  // namespace onset
