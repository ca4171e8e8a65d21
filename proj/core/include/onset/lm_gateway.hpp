#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>

#include "onset/grammar.hpp"
#include "onset/lm_backend.hpp"
#include "onset/ontology.hpp"
#include "onset/prototype_graph.hpp"
#include "onset/semantic_index.hpp"

namespace onset {

struct GatewayOptions {
    double temperature = 0.2;
    int max_tokens = 1024;
    std::optional<std::int64_t> seed = 42;
    std::string model;
    std::ptrdiff_t max_in_flight = 4;  // 1 .. kMaxInFlightLimit
};

struct Extraction {
    PrototypeGraph graph;
    std::string completion;
    std::size_t dropped_edges = 0;
    std::size_t renamed_nodes = 0;
};

inline constexpr std::ptrdiff_t kMaxInFlightLimit = 256;

/// Prompting, grammar selection and conformance checks around an LmBackend.
/// At most options.max_in_flight requests are outstanding across threads.
class LmGateway {
public:
    LmGateway(std::shared_ptr<LmBackend> backend, GatewayOptions options = {});

    /// Stage one: free-label graph under the static grammar. Throws InvalidArgument on
    /// a blank query (before any request) and NonConformanceError on bad completions.
    Extraction extract_raw(std::string_view query);

    /// Stage two: labels restricted to `candidates`, mapped back to iris, nodes renamed
    /// to canonical ids.
    Extraction extract_constrained(std::string_view query, const CandidateSet& candidates,
                                   const OntologyIndex& index);

    /// A natural-language request for a sampled graph, trimmed of framing.
    std::string generate_query_text(const PrototypeGraph& graph, const OntologyIndex& index);

    /// Hash over prompt templates and decoding options.
    std::string fingerprint() const;

    const LmBackend& backend() const noexcept { return *backend_; }
    const GatewayOptions& options() const noexcept { return options_; }

    static std::string extraction_prompt(std::string_view query);
    /// "id (Class) --link label [localName]--> id (Class)" lines, isolated nodes alone.
    static std::string render_graph(const PrototypeGraph& graph, const OntologyIndex& index);
    static std::string query_generation_prompt(const PrototypeGraph& graph, const OntologyIndex& index);

private:
    std::string call(LmRequest request);
    void check_conformance(const GrammarSpec& grammar, const std::string& completion) const;

    std::shared_ptr<LmBackend> backend_;
    GatewayOptions options_;
    std::counting_semaphore<kMaxInFlightLimit> in_flight_;
};

/// Text after the last '#' or '/' of an iri.
std::string_view local_name(std::string_view iri) noexcept;

}  // namespace onset
