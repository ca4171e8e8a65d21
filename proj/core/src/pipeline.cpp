#include "onset/pipeline.hpp"

#include <chrono>

#include <fmt/format.h>

#include "onset/hashing.hpp"

namespace onset {

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
auto timed_stage(PipelineTrace& trace, PipelineStage stage, F&& f) {
    auto start = Clock::now();
    auto finish = [&] {
        trace.timings_ms[std::string(to_string(stage))] =
            std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    };
    try {
        auto result = f();
        finish();
        return result;
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(stage, std::current_exception(), e.what());
    }
}

}  // namespace

std::string_view to_string(PipelineStage stage) noexcept {
    switch (stage) {
        case PipelineStage::raw: return "raw";
        case PipelineStage::candidates: return "candidates";
        case PipelineStage::constrained: return "constrained";
        case PipelineStage::correction: return "correction";
    }
    return "unknown";
}

PipelineError::PipelineError(PipelineStage stage, std::exception_ptr cause, const std::string& what)
    : Error(fmt::format("{} stage: {}", to_string(stage), what)), stage_(stage), cause_(std::move(cause)) {}

bool PipelineError::backend_failure() const noexcept {
    try {
        if (cause_) std::rethrow_exception(cause_);
    } catch (const BackendError&) {
        return true;
    } catch (...) {
    }
    return false;
}

bool PipelineError::invalid_input() const noexcept {
    try {
        if (cause_) std::rethrow_exception(cause_);
    } catch (const InvalidArgument&) {
        return true;
    } catch (...) {
    }
    return false;
}

std::string pipeline_config_hash(const LmGateway& gateway, const SemanticIndex& sidx, std::size_t k) {
    return sha256_hex(fmt::format("{};embedder={};ontology={};k={}", gateway.fingerprint(), sidx.embedder().model_id(),
                                  sidx.ontology().content_hash(), k));
}

PipelineTrace run_pipeline(std::string_view query, const SemanticIndex& sidx, LmGateway& gateway, std::size_t k) {
    if (k == 0) throw PipelineError(PipelineStage::candidates, nullptr, "k must be positive");
    const OntologyIndex& index = sidx.ontology();
    PipelineTrace trace;
    trace.input_query = std::string(query);
    trace.k = k;
    trace.config_hash = pipeline_config_hash(gateway, sidx, k);

    auto raw = timed_stage(trace, PipelineStage::raw, [&] { return gateway.extract_raw(query); });
    trace.raw_graph = std::move(raw.graph);
    trace.raw_dropped_edges = raw.dropped_edges;
    if (trace.raw_graph.empty()) {
        trace.status = PipelineStatus::no_graph;
        trace.constrained_graph.stage = GraphStage::constrained;
        trace.corrected_graph.stage = GraphStage::corrected;
        return trace;
    }

    trace.candidate_set = timed_stage(trace, PipelineStage::candidates, [&] {
        auto c = sidx.candidates_for_graph(trace.raw_graph, k);
        if (c.classes.empty()) throw Error("retrieval produced no candidate classes");
        return c;
    });

    auto constrained = timed_stage(trace, PipelineStage::constrained, [&] {
        return gateway.extract_constrained(query, trace.candidate_set, index);
    });
    trace.constrained_graph = std::move(constrained.graph);
    trace.constrained_dropped_edges = constrained.dropped_edges;

    trace.corrected_graph = timed_stage(trace, PipelineStage::correction, [&] {
        trace.corrections = validate_graph(trace.constrained_graph, index);
        auto corrected = correct_graph(trace.constrained_graph, index);
        if (!validate_graph(corrected, index).clean()) throw Error("corrected graph still has violations");
        return corrected;
    });
    return trace;
}

nlohmann::ordered_json trace_to_json(const PipelineTrace& trace, const OntologyIndex* index) {
    nlohmann::ordered_json doc;
    doc["input_query"] = trace.input_query;
    doc["k"] = trace.k;
    doc["status"] = trace.ok() ? "ok" : "no_graph";
    doc["raw_graph"] = graph_to_tagged_json(trace.raw_graph);
    doc["candidate_set"] = candidates_to_json(trace.candidate_set, index);
    doc["constrained_graph"] = graph_to_tagged_json(trace.constrained_graph);
    doc["corrected_graph"] = graph_to_tagged_json(trace.corrected_graph);
    doc["corrections"] = validation_to_json(trace.corrections, trace.constrained_graph);
    doc["timings_ms"] = trace.timings_ms;
    doc["config_hash"] = trace.config_hash;
    doc["dropped_edges"] = {{"raw", trace.raw_dropped_edges}, {"constrained", trace.constrained_dropped_edges}};
    return doc;
}

}  // namespace onset
