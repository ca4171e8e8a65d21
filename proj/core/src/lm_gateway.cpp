#include "onset/lm_gateway.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "onset/error.hpp"
#include "onset/hashing.hpp"
#include "prompt_assets.hpp"

namespace onset {

namespace {

const std::string& prompt(std::string_view stem) {
    const auto& texts = assets::prompt_texts();
    auto it = texts.find(stem);
    if (it == texts.end()) throw Error(fmt::format("missing prompt asset '{}'", stem));
    return it->second;
}

std::string substitute(std::string text, std::string_view key, std::string_view value) {
    auto pos = text.find(key);
    if (pos != std::string::npos) text.replace(pos, key.size(), value);
    return text;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

struct SemaphoreGuard {
    std::counting_semaphore<kMaxInFlightLimit>& s;
    explicit SemaphoreGuard(std::counting_semaphore<kMaxInFlightLimit>& sem) : s(sem) { s.acquire(); }
    ~SemaphoreGuard() { s.release(); }
};

}  // namespace

std::string_view local_name(std::string_view iri) noexcept {
    auto pos = iri.find_last_of("#/");
    return pos == std::string_view::npos ? iri : iri.substr(pos + 1);
}

LmGateway::LmGateway(std::shared_ptr<LmBackend> backend, GatewayOptions options)
    : backend_(std::move(backend)),
      options_(std::move(options)),
      in_flight_(std::clamp<std::ptrdiff_t>(options_.max_in_flight, 1, kMaxInFlightLimit)) {
    if (!backend_) throw InvalidArgument("gateway needs a backend");
    if (options_.max_tokens < 64) throw InvalidArgument("max_tokens must be at least 64");
}

std::string LmGateway::extraction_prompt(std::string_view query) {
    return substitute(prompt("extract_instruction"), "{query}", trim(query));
}

std::string LmGateway::render_graph(const PrototypeGraph& graph, const OntologyIndex& index) {
    auto node_text = [&](std::string_view id) {
        return fmt::format("{} ({})", id, index.class_def(graph.class_of(id)).label);
    };
    std::string out;
    std::map<std::string, bool, std::less<>> touched;
    for (const auto& e : graph.edges) {
        touched[e.tail] = touched[e.head] = true;
        out += fmt::format("{} --{} [{}]--> {}\n", node_text(e.tail), index.link_def(e.link_iri).label,
                           local_name(e.link_iri), node_text(e.head));
    }
    for (const auto& n : graph.nodes) {
        if (!touched.count(n.id)) out += node_text(n.id) + "\n";
    }
    if (!out.empty()) out.pop_back();
    return out;
}

std::string LmGateway::query_generation_prompt(const PrototypeGraph& graph, const OntologyIndex& index) {
    return substitute(prompt("query_generation_oneshot"), "{graph}", render_graph(graph, index));
}

std::string LmGateway::fingerprint() const {
    std::string material;
    for (const auto& [stem, text] : assets::prompt_texts()) material += stem + "\n" + text + "\n";
    material += fmt::format("temperature={};max_tokens={};seed={};model={};backend={}", options_.temperature,
                            options_.max_tokens, options_.seed ? std::to_string(*options_.seed) : "none",
                            options_.model, backend_->model_id());
    return sha256_hex(material);
}

std::string LmGateway::call(LmRequest request) {
    request.max_tokens = options_.max_tokens;
    request.temperature = options_.temperature;
    request.seed = options_.seed;
    request.model = options_.model;
    SemaphoreGuard guard(in_flight_);
    return backend_->complete(request);
}

void LmGateway::check_conformance(const GrammarSpec& grammar, const std::string& completion) const {
    if (backend_->exact_grammar()) {
        if (!recognize(grammar, completion)) {
            throw NonConformanceError("completion is outside the grammar it was constrained by", completion);
        }
        return;
    }
    // Schema-mode servers: same structure and vocabulary, any JSON layout.
    auto doc = nlohmann::json::parse(completion, nullptr, false);
    if (doc.is_discarded()) throw NonConformanceError("completion is not JSON", completion);
    GraphParseResult parsed;
    try {
        parsed = graph_from_json(doc, GraphStage::raw);
    } catch (const ParseError& e) {
        throw NonConformanceError(e.what(), completion);
    }
    if (!grammar.vocab) return;
    const auto& v = *grammar.vocab;
    auto in = [](const std::vector<std::string>& labels, const std::string& s) {
        return std::find(labels.begin(), labels.end(), s) != labels.end();
    };
    for (const auto& n : parsed.graph.nodes) {
        if (!in(v.class_labels, n.class_iri)) throw NonConformanceError("class outside the candidate set", completion);
    }
    for (const auto& e : doc["edges"]) {
        if (!e.contains("link") || !e["link"].is_string() || !in(v.link_labels, e["link"].get<std::string>())) {
            throw NonConformanceError("link outside the candidate set", completion);
        }
    }
}

Extraction LmGateway::extract_raw(std::string_view query) {
    if (trim(query).empty()) throw InvalidArgument("query is empty");
    LmRequest request;
    request.prompt = extraction_prompt(query);
    request.grammar = static_schema_grammar();
    request.task = LmTask::extract_raw;
    std::string completion = call(request);
    check_conformance(*request.grammar, completion);
    auto parsed = graph_from_json(completion, GraphStage::raw);
    return {std::move(parsed.graph), std::move(completion), parsed.dropped_edges, parsed.renamed_nodes};
}

Extraction LmGateway::extract_constrained(std::string_view query, const CandidateSet& candidates,
                                          const OntologyIndex& index) {
    if (trim(query).empty()) throw InvalidArgument("query is empty");
    LmRequest request;
    request.prompt = extraction_prompt(query);
    request.grammar = constrained_grammar(candidates, index);
    request.task = LmTask::extract_constrained;
    std::string completion = call(request);
    check_conformance(*request.grammar, completion);
    auto parsed = graph_from_json(completion, GraphStage::constrained);

    // Labels can repeat across iris; the higher-ranked candidate wins.
    std::map<std::string, std::string, std::less<>> class_iri;
    std::map<std::string, std::string, std::less<>> link_iri;
    for (const auto& c : candidates.classes) class_iri.emplace(index.class_def(c.iri).label, c.iri);
    for (const auto& l : candidates.links) link_iri.emplace(index.link_def(l.iri).label, l.iri);

    PrototypeGraph& g = parsed.graph;
    for (auto& n : g.nodes) {
        auto it = class_iri.find(n.class_iri);
        if (it == class_iri.end()) throw NonConformanceError("class outside the candidate set", completion);
        n.class_iri = it->second;
    }
    for (auto& e : g.edges) {
        auto it = link_iri.find(e.link_iri);
        if (it == link_iri.end()) throw NonConformanceError("link outside the candidate set", completion);
        e.link_iri = it->second;
    }
    g = with_canonical_ids(g, index);
    g.stage = GraphStage::constrained;
    return {std::move(g), std::move(completion), parsed.dropped_edges, parsed.renamed_nodes};
}

std::string LmGateway::generate_query_text(const PrototypeGraph& graph, const OntologyIndex& index) {
    if (!validate_graph(graph, index).clean()) throw InvalidArgument("query generation needs a schema-valid graph");
    LmRequest request;
    request.prompt = query_generation_prompt(graph, index);
    request.task = LmTask::generate_query;
    std::string text = call(request);
    std::string_view out = trim(text);
    auto newline = out.find('\n');
    if (newline != std::string_view::npos) out = trim(out.substr(0, newline));
    if (out.substr(0, 8) == "Request:") out = trim(out.substr(8));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = trim(out.substr(1, out.size() - 2));
    if (out.empty()) spdlog::warn("LM returned an empty query text");
    return std::string(out);
}

}  // namespace onset
