#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "onset/gbnf.hpp"
#include "onset/ontology.hpp"
#include "onset/semantic_index.hpp"

namespace onset {

/// Enumerated terminals of a constrained grammar, deduplicated, in candidate order.
struct GrammarVocab {
    std::vector<std::string> class_labels;
    std::vector<std::string> link_labels;
};

struct GrammarSpec {
    std::string text;  // GBNF source
    std::string root_rule = "root";
    std::optional<GrammarVocab> vocab;
};

/// Grammar for the graph JSON schema with free string content in every field.
GrammarSpec static_schema_grammar();

/// The static grammar with "class" restricted to the labels of the candidate classes
/// and "link" to those of the candidate links; no links forces an empty edges array.
/// Throws InvalidArgument when the candidate set has no classes.
GrammarSpec constrained_grammar(const CandidateSet& candidates, const OntologyIndex& index);

/// Parses the grammar and runs the recognizer from its root rule.
/// Throws ParseError for malformed grammars.
bool recognize(const GrammarSpec& grammar, std::string_view text);

/// `label` as a JSON string token, exactly as the canonical graph serializer writes it.
std::string json_string_token(std::string_view label);

/// `text` as a GBNF quoted literal.
std::string gbnf_literal(std::string_view text);

/// JSON Schema equivalent of a grammar, for servers that take response schemas instead.
nlohmann::json graph_json_schema(const std::optional<GrammarVocab>& vocab);

}  // namespace onset
