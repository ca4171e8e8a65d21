#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "onset/ontology.hpp"

namespace onset {

/// raw: free-text labels from the first extraction; constrained: iris from the
/// candidate vocabulary; corrected: repaired and schema-valid; sampled: drawn
/// from the ontology as evaluation ground truth.
enum class GraphStage { raw, constrained, corrected, sampled };

std::string_view to_string(GraphStage stage) noexcept;
GraphStage graph_stage_from_string(std::string_view text);

struct GraphNode {
    std::string id;
    std::string class_iri;  // free-text class label while stage == raw
    friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
    std::string tail;
    std::string link_iri;  // free-text link label while stage == raw
    std::string head;
    friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct PrototypeGraph {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;
    GraphStage stage = GraphStage::raw;

    const GraphNode* find_node(std::string_view id) const noexcept;
    /// Class of the node with `id`; throws InvalidArgument for dangling ids.
    const std::string& class_of(std::string_view id) const;
    bool empty() const noexcept { return nodes.empty(); }

    friend bool operator==(const PrototypeGraph&, const PrototypeGraph&) = default;
};

enum class ViolationKind { flipped, invalid, unknown_class, unknown_link };

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
    std::optional<std::size_t> edge;  // set for edge-level findings
    std::optional<std::size_t> node;  // set for an unresolvable class on an isolated node
    ViolationKind kind = ViolationKind::invalid;
    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool clean() const noexcept { return violations.empty(); }
    std::size_t count(ViolationKind kind) const noexcept;
};

/// Classifies each edge against the domain/range rules of `index`. Never throws.
ValidationReport validate_graph(const PrototypeGraph& g, const OntologyIndex& index);

/// Reverses flipped edges, removes invalid ones, keeps every node.
/// Throws UnknownIriError when any class or link iri does not resolve.
PrototypeGraph correct_graph(const PrototypeGraph& g, const OntologyIndex& index);

struct GraphParseResult {
    PrototypeGraph graph;
    std::size_t dropped_edges = 0;  // edges naming an undefined node id
    std::size_t renamed_nodes = 0;  // duplicate ids that received a suffix
};

/// Reads the LM graph schema {"nodes":[{"id","class"}],"edges":[{"from","link","to"}]}.
/// Throws ParseError when the text is not JSON or lacks the required fields.
GraphParseResult graph_from_json(std::string_view text, GraphStage stage);
GraphParseResult graph_from_json(const nlohmann::json& doc, GraphStage stage);
inline GraphParseResult graph_from_json(const std::string& text, GraphStage stage) {
    return graph_from_json(std::string_view(text), stage);
}
inline GraphParseResult graph_from_json(const char* text, GraphStage stage) {
    return graph_from_json(std::string_view(text), stage);
}

/// Canonical form in schema field order; the exact bytes the grammars accept.
nlohmann::ordered_json graph_to_json(const PrototypeGraph& g);
std::string graph_to_canonical_text(const PrototypeGraph& g);

/// Same schema plus a "stage" tag; used in traces and service payloads.
nlohmann::ordered_json graph_to_tagged_json(const PrototypeGraph& g);

/// [{"kind", "edge"?: {index, from, link, to}, "node"?: {index, id, class}}] for `g`'s report.
nlohmann::ordered_json validation_to_json(const ValidationReport& report, const PrototypeGraph& g);

/// Node-handle base for a class label: lowercase, non-alphanumerics → '_'.
std::string variable_stem(std::string_view label);

/// Renames nodes to "{stem}_{n}" using class labels, 1-based per stem, in node order.
PrototypeGraph with_canonical_ids(const PrototypeGraph& g, const OntologyIndex& index);

/// Replaces iris by labels (raw-stage / LM-facing form).
PrototypeGraph to_label_form(const PrototypeGraph& g, const OntologyIndex& index);

}  // namespace onset
