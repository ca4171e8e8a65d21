#include "onset/grammar.hpp"

#include <set>

#include <fmt/format.h>

#include "onset/error.hpp"

namespace onset {

namespace {

constexpr std::string_view kSkeleton =
    R"(root ::= "{" ws "\"nodes\"" ws ":" ws nodes ws "," ws "\"edges\"" ws ":" ws edges ws "}"
nodes ::= "[" ws ( node ( ws "," ws node )* )? ws "]"
node ::= "{" ws "\"id\"" ws ":" ws nodeid ws "," ws "\"class\"" ws ":" ws classval ws "}"
)";

constexpr std::string_view kEdgeRules =
    R"(edges ::= "[" ws ( edge ( ws "," ws edge )* )? ws "]"
edge ::= "{" ws "\"from\"" ws ":" ws nodeid ws "," ws "\"link\"" ws ":" ws linkval ws "," ws "\"to\"" ws ":" ws nodeid ws "}"
)";

constexpr std::string_view kNoEdges = R"(edges ::= "[" ws "]"
)";

constexpr std::string_view kLexical =
    R"(nodeid ::= string
string ::= "\"" char* "\""
char ::= [^"\\\x00-\x1F] | "\\" ( ["\\/bfnrt] | "u" bmp | "u" [dD] [89abAB] hex hex "\\u" [dD] [c-fC-F] hex hex )
bmp ::= [0-9a-cA-CeEfF] hex hex hex | [dD] [0-7] hex hex
hex ::= [0-9a-fA-F]
ws ::= " "?
)";

std::string enumeration(std::string_view rule, const std::vector<std::string>& labels) {
    std::string out = fmt::format("{} ::= ", rule);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) out += " | ";
        out += gbnf_literal(json_string_token(labels[i]));
    }
    return out + "\n";
}

}  // namespace

std::string json_string_token(std::string_view label) {
    return nlohmann::json(std::string(label)).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string gbnf_literal(std::string_view text) {
    std::string out = "\"";
    for (unsigned char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20 || c == 0x7F) out += fmt::format("\\x{:02X}", c);
                else out += static_cast<char>(c);
        }
    }
    return out + "\"";
}

GrammarSpec static_schema_grammar() {
    GrammarSpec g;
    g.text = std::string(kSkeleton) + std::string(kEdgeRules) + "classval ::= string\nlinkval ::= string\n" +
             std::string(kLexical);
    return g;
}

GrammarSpec constrained_grammar(const CandidateSet& candidates, const OntologyIndex& index) {
    if (candidates.classes.empty()) throw InvalidArgument("constrained grammar needs at least one candidate class");
    GrammarVocab vocab;
    std::set<std::string> seen;
    for (const auto& c : candidates.classes) {
        const std::string& label = index.class_def(c.iri).label;
        if (seen.insert(label).second) vocab.class_labels.push_back(label);
    }
    seen.clear();
    for (const auto& l : candidates.links) {
        const std::string& label = index.link_def(l.iri).label;
        if (seen.insert(label).second) vocab.link_labels.push_back(label);
    }

    GrammarSpec g;
    g.text = std::string(kSkeleton);
    if (vocab.link_labels.empty()) {
        g.text += kNoEdges;
    } else {
        g.text += kEdgeRules;
        g.text += enumeration("linkval", vocab.link_labels);
    }
    g.text += enumeration("classval", vocab.class_labels);
    g.text += kLexical;
    g.vocab = std::move(vocab);
    return g;
}

bool recognize(const GrammarSpec& grammar, std::string_view text) {
    return gbnf::recognize(gbnf::Grammar::parse(grammar.text), grammar.root_rule, text);
}

nlohmann::json graph_json_schema(const std::optional<GrammarVocab>& vocab) {
    nlohmann::json class_schema = {{"type", "string"}};
    nlohmann::json link_schema = {{"type", "string"}};
    bool no_edges = false;
    if (vocab) {
        class_schema["enum"] = vocab->class_labels;
        if (vocab->link_labels.empty()) no_edges = true;
        else link_schema["enum"] = vocab->link_labels;
    }
    nlohmann::json node = {{"type", "object"},
                           {"properties", {{"id", {{"type", "string"}}}, {"class", class_schema}}},
                           {"required", {"id", "class"}},
                           {"additionalProperties", false}};
    nlohmann::json edge = {{"type", "object"},
                           {"properties",
                            {{"from", {{"type", "string"}}}, {"link", link_schema}, {"to", {{"type", "string"}}}}},
                           {"required", {"from", "link", "to"}},
                           {"additionalProperties", false}};
    nlohmann::json edges = {{"type", "array"}, {"items", edge}};
    if (no_edges) edges["maxItems"] = 0;
    return {{"type", "object"},
            {"properties", {{"nodes", {{"type", "array"}, {"items", node}}}, {"edges", edges}}},
            {"required", {"nodes", "edges"}},
            {"additionalProperties", false}};
}

}  // namespace onset
