#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "onset/lm_backend.hpp"
#include "onset/ontology.hpp"

namespace onset {

struct OntologySource {
    std::string id;
    std::filesystem::path path;
    std::optional<std::filesystem::path> counts;
    SamplingMode mode = SamplingMode::probabilistic;
    /// Instance triples answering /execute locally instead of a SPARQL endpoint.
    std::optional<std::filesystem::path> fixture_triples;
};

struct LmSettings {
    std::string backend = "http";  // http | mock_random
    std::string url;
    HttpApi api = HttpApi::llama_cpp;
    std::string model;
    std::string api_key;
    double temperature = 0.2;
    int max_tokens = 1024;
    std::int64_t max_in_flight = 4;
    int timeout_s = 180;
};

struct EmbeddingSettings {
    std::string url;  // empty: built-in hashing embedder
    std::string model;
    std::string api_key;
    std::size_t dim = 512;
    std::optional<std::filesystem::path> cache_dir;
};

struct ServiceConfig {
    std::vector<OntologySource> ontologies;
    LmSettings lm;
    EmbeddingSettings embedding;
    std::size_t retrieval_k = 8;
    std::string sparql_url;
    int sparql_timeout_s = 30;
    std::string listen = "127.0.0.1:8080";
    std::string cors_origin = "*";
    std::int64_t seed = 42;
};

/// YAML config; relative paths resolve against the file's directory.
/// Throws ParseError on malformed files and InvalidArgument when no ontology is listed.
ServiceConfig load_config(const std::filesystem::path& path);
ServiceConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir = {});

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// ONSET_LM_URL, ONSET_EMBED_URL, ONSET_SPARQL_URL and ONSET_LISTEN override the file.
void apply_env_overrides(ServiceConfig& cfg, const EnvLookup& env);
void apply_env_overrides(ServiceConfig& cfg);

/// "host:port" split; throws InvalidArgument on a bad port.
std::pair<std::string, int> parse_listen_address(std::string_view text);

}  // namespace onset
