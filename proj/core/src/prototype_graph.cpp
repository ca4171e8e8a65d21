#include "onset/prototype_graph.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "onset/error.hpp"

namespace onset {

std::string_view to_string(GraphStage stage) noexcept {
    switch (stage) {
        case GraphStage::raw: return "raw";
        case GraphStage::constrained: return "constrained";
        case GraphStage::corrected: return "corrected";
        case GraphStage::sampled: return "sampled";
    }
    return "raw";
}

GraphStage graph_stage_from_string(std::string_view text) {
    if (text == "raw") return GraphStage::raw;
    if (text == "constrained") return GraphStage::constrained;
    if (text == "corrected") return GraphStage::corrected;
    if (text == "sampled") return GraphStage::sampled;
    throw InvalidArgument(fmt::format("unknown graph stage '{}'", text));
}

std::string_view to_string(ViolationKind kind) noexcept {
    switch (kind) {
        case ViolationKind::flipped: return "flipped";
        case ViolationKind::invalid: return "invalid";
        case ViolationKind::unknown_class: return "unknown_class";
        case ViolationKind::unknown_link: return "unknown_link";
    }
    return "invalid";
}

const GraphNode* PrototypeGraph::find_node(std::string_view id) const noexcept {
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const GraphNode& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

const std::string& PrototypeGraph::class_of(std::string_view id) const {
    if (const auto* n = find_node(id)) return n->class_iri;
    throw InvalidArgument(fmt::format("edge references undefined node '{}'", id));
}

std::size_t ValidationReport::count(ViolationKind kind) const noexcept {
    return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                  [&](const Violation& v) { return v.kind == kind; }));
}

namespace {

enum class EdgeVerdict { valid, flipped, invalid, unknown_class, unknown_link };

EdgeVerdict classify(const PrototypeGraph& g, const GraphEdge& e, const OntologyIndex& index) {
    const LinkDef* link = index.find_link(e.link_iri);
    if (!link) return EdgeVerdict::unknown_link;
    const GraphNode* tail = g.find_node(e.tail);
    const GraphNode* head = g.find_node(e.head);
    if (!tail || !head) return EdgeVerdict::invalid;
    if (!index.has_class(tail->class_iri) || !index.has_class(head->class_iri)) {
        return EdgeVerdict::unknown_class;
    }
    auto fits = [&](const std::string& from, const std::string& to) {
        return index.subtypeof(from, link->from_type) && index.subtypeof(to, link->to_type);
    };
    if (fits(tail->class_iri, head->class_iri)) return EdgeVerdict::valid;
    if (fits(head->class_iri, tail->class_iri)) return EdgeVerdict::flipped;
    return EdgeVerdict::invalid;
}

}  // namespace

ValidationReport validate_graph(const PrototypeGraph& g, const OntologyIndex& index) {
    ValidationReport report;
    std::set<std::string> endpoints;
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const GraphEdge& e = g.edges[i];
        endpoints.insert(e.tail);
        endpoints.insert(e.head);
        switch (classify(g, e, index)) {
            case EdgeVerdict::valid: break;
            case EdgeVerdict::flipped: report.violations.push_back({i, std::nullopt, ViolationKind::flipped}); break;
            case EdgeVerdict::invalid: report.violations.push_back({i, std::nullopt, ViolationKind::invalid}); break;
            case EdgeVerdict::unknown_class:
                report.violations.push_back({i, std::nullopt, ViolationKind::unknown_class});
                break;
            case EdgeVerdict::unknown_link:
                report.violations.push_back({i, std::nullopt, ViolationKind::unknown_link});
                break;
        }
    }
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const GraphNode& n = g.nodes[i];
        if (!endpoints.count(n.id) && !index.has_class(n.class_iri)) {
            report.violations.push_back({std::nullopt, i, ViolationKind::unknown_class});
        }
    }
    return report;
}

PrototypeGraph correct_graph(const PrototypeGraph& g, const OntologyIndex& index) {
    for (const auto& n : g.nodes) {
        if (!index.has_class(n.class_iri)) throw UnknownIriError(n.class_iri);
    }
    for (const auto& e : g.edges) {
        if (!index.has_link(e.link_iri)) throw UnknownIriError(e.link_iri);
    }
    PrototypeGraph out;
    out.nodes = g.nodes;
    out.stage = GraphStage::corrected;
    out.edges.reserve(g.edges.size());
    for (const auto& e : g.edges) {
        switch (classify(g, e, index)) {
            case EdgeVerdict::valid: out.edges.push_back(e); break;
            case EdgeVerdict::flipped: out.edges.push_back({e.head, e.link_iri, e.tail}); break;
            default: break;  // invalid: discarded
        }
    }
    return out;
}

namespace {

const nlohmann::json& require_field(const nlohmann::json& obj, const char* key, const char* where) {
    if (!obj.is_object()) throw ParseError(fmt::format("graph json: {} entry is not an object", where));
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(fmt::format("graph json: {} entry lacks \"{}\"", where, key));
    return *it;
}

std::string require_string(const nlohmann::json& obj, const char* key, const char* where) {
    const auto& v = require_field(obj, key, where);
    if (!v.is_string()) throw ParseError(fmt::format("graph json: {}.{} is not a string", where, key));
    return v.get<std::string>();
}

}  // namespace

GraphParseResult graph_from_json(std::string_view text, GraphStage stage) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ParseError("graph json: not a JSON document");
    return graph_from_json(doc, stage);
}

GraphParseResult graph_from_json(const nlohmann::json& doc, GraphStage stage) {
    if (!doc.is_object()) throw ParseError("graph json: top level is not an object");
    const auto& nodes = require_field(doc, "nodes", "top-level");
    const auto& edges = require_field(doc, "edges", "top-level");
    if (!nodes.is_array() || !edges.is_array()) {
        throw ParseError("graph json: \"nodes\" and \"edges\" must be arrays");
    }

    GraphParseResult result;
    result.graph.stage = stage;
    std::set<std::string> taken;
    for (const auto& n : nodes) {
        std::string id = require_string(n, "id", "node");
        std::string cls = require_string(n, "class", "node");
        if (taken.count(id)) {
            std::string base = id;
            for (int suffix = 2;; ++suffix) {
                id = fmt::format("{}_{}", base, suffix);
                if (!taken.count(id)) break;
            }
            ++result.renamed_nodes;
        }
        taken.insert(id);
        result.graph.nodes.push_back({std::move(id), std::move(cls)});
    }
    for (const auto& e : edges) {
        std::string from = require_string(e, "from", "edge");
        std::string link = require_string(e, "link", "edge");
        std::string to = require_string(e, "to", "edge");
        if (!taken.count(from) || !taken.count(to)) {
            ++result.dropped_edges;
            continue;
        }
        result.graph.edges.push_back({std::move(from), std::move(link), std::move(to)});
    }
    return result;
}

nlohmann::ordered_json graph_to_json(const PrototypeGraph& g) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& n : g.nodes) nodes.push_back({{"id", n.id}, {"class", n.class_iri}});
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (const auto& e : g.edges) edges.push_back({{"from", e.tail}, {"link", e.link_iri}, {"to", e.head}});
    nlohmann::ordered_json doc;
    doc["nodes"] = std::move(nodes);
    doc["edges"] = std::move(edges);
    return doc;
}

std::string graph_to_canonical_text(const PrototypeGraph& g) {
    return graph_to_json(g).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

nlohmann::ordered_json validation_to_json(const ValidationReport& report, const PrototypeGraph& g) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& v : report.violations) {
        nlohmann::ordered_json item;
        item["kind"] = std::string(to_string(v.kind));
        if (v.edge && *v.edge < g.edges.size()) {
            const auto& e = g.edges[*v.edge];
            item["edge"] = {{"index", *v.edge}, {"from", e.tail}, {"link", e.link_iri}, {"to", e.head}};
        }
        if (v.node && *v.node < g.nodes.size()) {
            const auto& n = g.nodes[*v.node];
            item["node"] = {{"index", *v.node}, {"id", n.id}, {"class", n.class_iri}};
        }
        out.push_back(std::move(item));
    }
    return out;
}

nlohmann::ordered_json graph_to_tagged_json(const PrototypeGraph& g) {
    auto doc = graph_to_json(g);
    doc["stage"] = std::string(to_string(g.stage));
    return doc;
}

std::string variable_stem(std::string_view label) {
    std::string stem;
    for (unsigned char c : label) {
        if (std::isalnum(c) && c < 0x80) {
            stem += static_cast<char>(std::tolower(c));
        } else if (stem.empty() || stem.back() != '_') {
            stem += '_';
        }
    }
    while (!stem.empty() && stem.back() == '_') stem.pop_back();
    while (!stem.empty() && stem.front() == '_') stem.erase(stem.begin());
    if (stem.empty()) stem = "node";
    if (std::isdigit(static_cast<unsigned char>(stem.front()))) stem = "n_" + stem;
    return stem;
}

PrototypeGraph with_canonical_ids(const PrototypeGraph& g, const OntologyIndex& index) {
    std::map<std::string, int> counters;
    std::map<std::string, std::string> renamed;
    PrototypeGraph out;
    out.stage = g.stage;
    for (const auto& n : g.nodes) {
        const ClassDef* cls = index.find_class(n.class_iri);
        std::string stem = variable_stem(cls ? std::string_view(cls->label) : std::string_view(n.class_iri));
        std::string id = fmt::format("{}_{}", stem, ++counters[stem]);
        renamed.emplace(n.id, id);
        out.nodes.push_back({id, n.class_iri});
    }
    for (const auto& e : g.edges) {
        auto t = renamed.find(e.tail);
        auto h = renamed.find(e.head);
        if (t == renamed.end() || h == renamed.end()) continue;
        out.edges.push_back({t->second, e.link_iri, h->second});
    }
    return out;
}

PrototypeGraph to_label_form(const PrototypeGraph& g, const OntologyIndex& index) {
    PrototypeGraph out = g;
    for (auto& n : out.nodes) n.class_iri = index.class_def(n.class_iri).label;
    for (auto& e : out.edges) e.link_iri = index.link_def(e.link_iri).label;
    return out;
}

}  // namespace onset
