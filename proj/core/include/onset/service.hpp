#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "onset/bgp.hpp"
#include "onset/config.hpp"
#include "onset/lm_gateway.hpp"
#include "onset/ontology.hpp"
#include "onset/semantic_index.hpp"

namespace onset {

struct OntologyContext {
    OntologyPtr ontology;
    std::shared_ptr<const SemanticIndex> index;
    std::optional<TripleSet> fixture;  // local /execute data
};

struct ServiceOptions {
    std::size_t retrieval_k = 8;
    std::string sparql_url;
    int sparql_timeout_s = 30;
    std::size_t default_limit = 100;
};

struct Response {
    int status = 200;
    nlohmann::ordered_json body;
};

/// Transport-independent request handlers of the HTTP API.
/// All handlers are safe to call concurrently.
class QueryService {
public:
    QueryService(std::map<std::string, OntologyContext> ontologies, std::shared_ptr<LmGateway> gateway,
                 ServiceOptions options = {});

    Response handle(std::string_view method, std::string_view path, std::string_view body) const;

    Response extract(const nlohmann::json& body) const;
    Response validate(const nlohmann::json& body) const;
    Response correct(const nlohmann::json& body) const;
    Response sparql(const nlohmann::json& body) const;
    Response search(const nlohmann::json& body) const;
    Response execute(const nlohmann::json& body) const;
    Response list_ontologies() const;

private:
    const OntologyContext* context_for(const nlohmann::json& body, Response& error) const;

    std::map<std::string, OntologyContext> ontologies_;
    std::shared_ptr<LmGateway> gateway_;
    ServiceOptions options_;
};

/// Loads every configured ontology, builds its semantic index and fixture, and wires
/// the configured LM backend (or `backend` when given).
std::unique_ptr<QueryService> make_service(const ServiceConfig& cfg, std::shared_ptr<LmBackend> backend = nullptr);

/// Backend named by cfg.lm: an HTTP client, or a random mock for demos.
std::shared_ptr<LmBackend> make_backend(const LmSettings& lm, std::int64_t seed);

/// Embedder named by cfg.embedding.
std::shared_ptr<const Embedder> make_embedder(const EmbeddingSettings& settings);

/// HTTP binding of a QueryService.
class HttpServer {
public:
    HttpServer(const QueryService& service, std::string cors_origin = "*");
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds host:port (port 0 picks a free one) and returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void serve();
    void stop();
    /// Blocks until the server accepts connections.
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace onset
