#include "onset/service.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "onset/embedder.hpp"
#include "onset/error.hpp"
#include "onset/pipeline.hpp"
#include "onset/sparql.hpp"

namespace onset {

namespace {

Response error_response(int status, std::string message, std::optional<std::string> stage = std::nullopt) {
    Response r;
    r.status = status;
    r.body["error"] = std::move(message);
    if (stage) r.body["stage"] = *stage;
    return r;
}

// The graph either is the body or sits under "graph"; stage defaults to corrected.
PrototypeGraph graph_from_body(const nlohmann::json& body) {
    const nlohmann::json& doc = body.contains("graph") ? body["graph"] : body;
    auto stage = GraphStage::corrected;
    if (doc.is_object() && doc.contains("stage") && doc["stage"].is_string()) {
        stage = graph_stage_from_string(doc["stage"].get<std::string>());
    }
    return graph_from_json(doc, stage).graph;
}

std::optional<std::size_t> positive_size(const nlohmann::json& body, const char* key, std::size_t fallback,
                                         std::size_t minimum) {
    if (!body.contains(key)) return fallback;
    const auto& v = body[key];
    if (!v.is_number_integer()) return std::nullopt;
    auto n = v.get<std::int64_t>();
    if (n < static_cast<std::int64_t>(minimum)) return std::nullopt;
    return static_cast<std::size_t>(n);
}

}  // namespace

QueryService::QueryService(std::map<std::string, OntologyContext> ontologies, std::shared_ptr<LmGateway> gateway,
                           ServiceOptions options)
    : ontologies_(std::move(ontologies)), gateway_(std::move(gateway)), options_(std::move(options)) {
    if (ontologies_.empty()) throw InvalidArgument("service needs at least one ontology");
    for (const auto& [id, ctx] : ontologies_) {
        if (!ctx.ontology || !ctx.index) throw InvalidArgument(fmt::format("ontology '{}' is not fully loaded", id));
    }
}

const OntologyContext* QueryService::context_for(const nlohmann::json& body, Response& error) const {
    if (body.is_object() && body.contains("ontology")) {
        if (!body["ontology"].is_string()) {
            error = error_response(400, "\"ontology\" must be a string");
            return nullptr;
        }
        auto it = ontologies_.find(body["ontology"].get<std::string>());
        if (it == ontologies_.end()) {
            error = error_response(400, fmt::format("unknown ontology '{}'", body["ontology"].get<std::string>()));
            return nullptr;
        }
        return &it->second;
    }
    if (ontologies_.size() == 1) return &ontologies_.begin()->second;
    error = error_response(400, "\"ontology\" is required when several ontologies are loaded");
    return nullptr;
}

Response QueryService::handle(std::string_view method, std::string_view path, std::string_view body) const {
    try {
        if (method == "GET") {
            if (path == "/health") return {200, {{"status", "ok"}}};
            if (path == "/ontologies") return list_ontologies();
        }
        static const std::map<std::string, Response (QueryService::*)(const nlohmann::json&) const, std::less<>>
            routes = {{"/extract", &QueryService::extract},          {"/graphs/validate", &QueryService::validate},
                      {"/graphs/correct", &QueryService::correct},   {"/graphs/sparql", &QueryService::sparql},
                      {"/search", &QueryService::search},            {"/execute", &QueryService::execute}};
        auto route = routes.find(path);
        if (route == routes.end()) {
            if (path == "/health" || path == "/ontologies") return error_response(405, "method not allowed");
            return error_response(404, fmt::format("no route for {}", path));
        }
        if (method != "POST") return error_response(405, "method not allowed");
        auto doc = nlohmann::json::parse(body, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) return error_response(400, "request body must be a JSON object");
        return (this->*(route->second))(doc);
    } catch (const std::exception& e) {
        spdlog::error("{} {}: {}", method, path, e.what());
        return error_response(500, e.what());
    }
}

Response QueryService::list_ontologies() const {
    Response r;
    r.body["ontologies"] = nlohmann::ordered_json::array();
    for (const auto& [id, ctx] : ontologies_) {
        r.body["ontologies"].push_back({{"id", id},
                                        {"classes", ctx.ontology->classes().size()},
                                        {"links", ctx.ontology->links().size()},
                                        {"embedder", ctx.index->embedder().model_id()},
                                        {"fixture", ctx.fixture.has_value()}});
    }
    return r;
}

Response QueryService::extract(const nlohmann::json& body) const {
    Response err;
    const auto* ctx = context_for(body, err);
    if (!ctx) return err;
    if (!body.contains("query") || !body["query"].is_string()) return error_response(400, "\"query\" must be a string");
    auto k = positive_size(body, "k", options_.retrieval_k, 1);
    if (!k) return error_response(400, "\"k\" must be a positive integer");
    if (!gateway_) return error_response(503, "no LM backend configured", "raw");

    PipelineTrace trace;
    try {
        trace = run_pipeline(body["query"].get<std::string>(), *ctx->index, *gateway_, *k);
    } catch (const PipelineError& e) {
        std::string stage(to_string(e.stage()));
        if (e.backend_failure()) return error_response(502, e.what(), stage);
        if (e.invalid_input()) return error_response(400, e.what(), stage);
        return error_response(500, e.what(), stage);
    }
    Response r;
    r.body = trace_to_json(trace, ctx->ontology.get());
    r.body["sparql"] = trace.ok() ? nlohmann::ordered_json(to_sparql(trace.corrected_graph)) : nlohmann::ordered_json();
    return r;
}

Response QueryService::validate(const nlohmann::json& body) const {
    Response err;
    const auto* ctx = context_for(body, err);
    if (!ctx) return err;
    PrototypeGraph g;
    try {
        g = graph_from_body(body);
    } catch (const ParseError& e) {
        return error_response(400, e.what());
    }
    auto report = validate_graph(g, *ctx->ontology);
    Response r;
    r.body["clean"] = report.clean();
    r.body["violations"] = validation_to_json(report, g);
    return r;
}

Response QueryService::correct(const nlohmann::json& body) const {
    Response err;
    const auto* ctx = context_for(body, err);
    if (!ctx) return err;
    try {
        auto g = graph_from_body(body);
        auto report = validate_graph(g, *ctx->ontology);
        auto corrected = correct_graph(g, *ctx->ontology);
        Response r;
        r.body["graph"] = graph_to_tagged_json(corrected);
        r.body["corrections"] = validation_to_json(report, g);
        return r;
    } catch (const ParseError& e) {
        return error_response(400, e.what());
    } catch (const UnknownIriError& e) {
        return error_response(422, e.what());
    }
}

Response QueryService::sparql(const nlohmann::json& body) const {
    Response err;
    const auto* ctx = context_for(body, err);
    if (!ctx) return err;
    try {
        auto g = graph_from_body(body);
        auto report = validate_graph(g, *ctx->ontology);
        if (!report.clean()) {
            auto r = error_response(422, "graph violates the ontology; correct it first");
            r.body["violations"] = validation_to_json(report, g);
            return r;
        }
        g.stage = GraphStage::corrected;
        Response r;
        r.body["sparql"] = to_sparql(g);
        return r;
    } catch (const ParseError& e) {
        return error_response(400, e.what());
    } catch (const InvalidArgument& e) {
        return error_response(422, e.what());
    }
}

Response QueryService::search(const nlohmann::json& body) const {
    Response err;
    const auto* ctx = context_for(body, err);
    if (!ctx) return err;
    if (!body.contains("text") || !body["text"].is_string()) return error_response(400, "\"text\" must be a string");
    ItemKind kind = ItemKind::links;
    try {
        if (body.contains("kind")) kind = item_kind_from_string(body.at("kind").get<std::string>());
    } catch (const std::exception&) {
        return error_response(400, "\"kind\" must be \"classes\" or \"links\"");
    }
    auto k = positive_size(body, "k", options_.retrieval_k, 1);
    if (!k) return error_response(400, "\"k\" must be a positive integer");

    const OntologyIndex& onto = *ctx->ontology;
    std::vector<ScoredItem> items;
    if (body.contains("attach_to") && kind == ItemKind::links) {
        const auto& attach = body["attach_to"];
        if (!attach.is_object() || !attach.contains("class") || !attach["class"].is_string()) {
            return error_response(400, "\"attach_to\" needs a \"class\" iri");
        }
        std::string cls = attach["class"].get<std::string>();
        if (!onto.has_class(cls)) return error_response(422, fmt::format("unknown class {}", cls));
        std::string side_text = attach.value("side", std::string("outgoing"));
        if (side_text != "outgoing" && side_text != "incoming") {
            return error_response(400, "\"side\" must be \"outgoing\" or \"incoming\"");
        }
        auto side = side_text == "outgoing" ? LinkSide::outgoing : LinkSide::incoming;
        std::set<std::string> allowed;
        for (const auto* link : onto.links_for(cls, side)) allowed.insert(link->iri);
        items = ctx->index->top_k_where(body["text"].get<std::string>(), kind, *k,
                                        [&](const std::string& iri) { return allowed.count(iri) > 0; });
    } else {
        items = ctx->index->top_k(body["text"].get<std::string>(), kind, *k);
    }

    Response r;
    r.body["kind"] = std::string(to_string(kind));
    r.body["items"] = nlohmann::ordered_json::array();
    for (const auto& item : items) {
        nlohmann::ordered_json entry = {{"iri", item.iri}, {"similarity", item.similarity}};
        if (kind == ItemKind::classes) {
            entry["label"] = onto.class_def(item.iri).label;
        } else {
            const auto& link = onto.link_def(item.iri);
            entry["label"] = link.label;
            entry["from"] = link.from_type;
            entry["to"] = link.to_type;
        }
        r.body["items"].push_back(std::move(entry));
    }
    return r;
}

Response QueryService::execute(const nlohmann::json& body) const {
    Response err;
    const auto* ctx = context_for(body, err);
    if (!ctx) return err;
    auto limit = positive_size(body, "limit", options_.default_limit, 0);
    if (!limit) return error_response(400, "\"limit\" must be a non-negative integer");
    bool has_graph = body.contains("graph");
    bool has_sparql = body.contains("sparql") && body["sparql"].is_string();
    if (!has_graph && !has_sparql) return error_response(400, "provide \"graph\" or \"sparql\"");

    std::optional<PrototypeGraph> graph;
    if (has_graph) {
        try {
            graph = graph_from_json(body["graph"], GraphStage::corrected).graph;
        } catch (const ParseError& e) {
            return error_response(400, e.what());
        }
        auto report = validate_graph(*graph, *ctx->ontology);
        if (!report.clean()) {
            auto r = error_response(422, "graph violates the ontology");
            r.body["violations"] = validation_to_json(report, *graph);
            return r;
        }
    }

    Response r;
    if (ctx->fixture && graph) {
        auto columns = sparql_variables(*graph);
        r.body["mode"] = "fixture";
        r.body["columns"] = columns;
        r.body["rows"] = nlohmann::ordered_json::array();
        std::size_t emitted = 0;
        for (const auto& binding : bgp_match(*graph, *ctx->fixture, *ctx->ontology)) {
            if (emitted++ >= *limit) break;
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (const auto& n : graph->nodes) row.push_back(binding.at(n.id));
            r.body["rows"].push_back(std::move(row));
        }
        return r;
    }
    if (options_.sparql_url.empty()) return error_response(503, "no SPARQL endpoint or fixture configured");

    std::string query = graph ? to_sparql(*graph) : body["sparql"].get<std::string>();
    query = with_limit(query, *limit);
    auto [authority, path] = split_url(options_.sparql_url);
    httplib::Client client(authority);
    client.set_connection_timeout(std::chrono::seconds(options_.sparql_timeout_s));
    client.set_read_timeout(std::chrono::seconds(options_.sparql_timeout_s));
    httplib::Headers headers = {{"Accept", "application/sparql-results+json"}};
    httplib::Params params = {{"query", query}};
    auto res = client.Post(path.empty() ? "/" : path, headers, params);
    if (!res) return error_response(502, fmt::format("SPARQL endpoint: {}", httplib::to_string(res.error())));
    if (res->status != 200) return error_response(res->status, fmt::format("SPARQL endpoint: {}", res->body.substr(0, 500)));
    auto doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("head") || !doc.contains("results")) {
        return error_response(502, "SPARQL endpoint returned an unexpected payload");
    }
    std::vector<std::string> columns = doc["head"].value("vars", std::vector<std::string>{});
    r.body["mode"] = "endpoint";
    r.body["sparql"] = query;
    r.body["columns"] = columns;
    r.body["rows"] = nlohmann::ordered_json::array();
    for (const auto& b : doc["results"].value("bindings", nlohmann::json::array())) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (const auto& c : columns) {
            row.push_back(b.contains(c) ? nlohmann::ordered_json(b[c].value("value", std::string()))
                                        : nlohmann::ordered_json());
        }
        r.body["rows"].push_back(std::move(row));
    }
    return r;
}

std::shared_ptr<LmBackend> make_backend(const LmSettings& lm, std::int64_t seed) {
    if (lm.backend == "mock_random") return std::make_shared<MockRandomBackend>(static_cast<std::uint64_t>(seed));
    if (lm.backend != "http") throw InvalidArgument(fmt::format("unknown LM backend '{}'", lm.backend));
    if (lm.url.empty()) return nullptr;
    HttpLmConfig http;
    http.base_url = lm.url;
    http.model = lm.model;
    http.api = lm.api;
    http.api_key = lm.api_key;
    http.timeout = std::chrono::seconds(lm.timeout_s);
    return std::make_shared<HttpLmBackend>(std::move(http));
}

std::shared_ptr<const Embedder> make_embedder(const EmbeddingSettings& settings) {
    if (settings.url.empty()) return std::make_shared<HashingEmbedder>(settings.dim);
    HttpEmbedderConfig http;
    http.base_url = settings.url;
    http.model = settings.model;
    http.api_key = settings.api_key;
    return std::make_shared<HttpEmbedder>(std::move(http));
}

std::unique_ptr<QueryService> make_service(const ServiceConfig& cfg, std::shared_ptr<LmBackend> backend) {
    auto embedder = make_embedder(cfg.embedding);
    SemanticIndexOptions index_options;
    index_options.cache_dir = cfg.embedding.cache_dir;

    std::map<std::string, OntologyContext> contexts;
    for (const auto& src : cfg.ontologies) {
        OntologyContext ctx;
        ctx.ontology = load_ontology_file(src.path, src.counts, src.mode);
        ctx.index = std::make_shared<const SemanticIndex>(SemanticIndex::build(ctx.ontology, embedder, index_options));
        if (src.fixture_triples) ctx.fixture = TripleSet::from_turtle(read_text_file(*src.fixture_triples));
        spdlog::info("ontology '{}': {} classes, {} links", src.id, ctx.ontology->classes().size(),
                     ctx.ontology->links().size());
        if (!contexts.emplace(src.id, std::move(ctx)).second) {
            throw InvalidArgument(fmt::format("duplicate ontology id '{}'", src.id));
        }
    }

    if (!backend) backend = make_backend(cfg.lm, cfg.seed);
    std::shared_ptr<LmGateway> gateway;
    if (backend) {
        GatewayOptions gw;
        gw.temperature = cfg.lm.temperature;
        gw.max_tokens = cfg.lm.max_tokens;
        gw.seed = cfg.seed;
        gw.model = cfg.lm.model;
        gw.max_in_flight = cfg.lm.max_in_flight;
        gateway = std::make_shared<LmGateway>(std::move(backend), gw);
    } else {
        spdlog::warn("no LM endpoint configured; /extract will answer 503");
    }

    ServiceOptions options;
    options.retrieval_k = cfg.retrieval_k;
    options.sparql_url = cfg.sparql_url;
    options.sparql_timeout_s = cfg.sparql_timeout_s;
    return std::make_unique<QueryService>(std::move(contexts), std::move(gateway), options);
}

struct HttpServer::Impl {
    Impl(const QueryService& s, std::string origin) : service(s), cors_origin(std::move(origin)) {}
    const QueryService& service;
    std::string cors_origin;
    httplib::Server server;
};

HttpServer::HttpServer(const QueryService& service, std::string cors_origin)
    : impl_(std::make_unique<Impl>(service, std::move(cors_origin))) {
    auto& srv = impl_->server;
    srv.set_default_headers({{"Access-Control-Allow-Origin", impl_->cors_origin},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                             {"Access-Control-Allow-Headers", "Content-Type"}});
    auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
        auto out = impl_->service.handle(req.method, req.path, req.body);
        res.status = out.status;
        res.set_content(out.body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace), "application/json");
    };
    srv.Get(R"(/.*)", dispatch);
    srv.Post(R"(/.*)", dispatch);
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(fmt::format("cannot bind {}:{}", host, port));
    return bound;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace onset
