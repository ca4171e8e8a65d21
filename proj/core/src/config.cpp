#include "onset/config.hpp"

#include <cstdlib>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "onset/error.hpp"

namespace onset {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out) {
    if (node[key]) out = node[key].as<T>();
}

}  // namespace

ServiceConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir) {
    ServiceConfig cfg;
    try {
        YAML::Node root = YAML::Load(std::string(yaml_text));
        if (!root.IsMap()) throw ParseError("config: top level must be a mapping");
        read(root, "listen", cfg.listen);
        read(root, "cors_origin", cfg.cors_origin);
        read(root, "seed", cfg.seed);
        read(root, "retrieval_k", cfg.retrieval_k);

        for (const auto& item : root["ontologies"]) {
            OntologySource src;
            src.id = item["id"].as<std::string>();
            src.path = resolve(base_dir, item["path"].as<std::string>());
            if (item["counts"]) src.counts = resolve(base_dir, item["counts"].as<std::string>());
            if (item["sampling"]) src.mode = sampling_mode_from_string(item["sampling"].as<std::string>());
            if (item["fixture_triples"]) src.fixture_triples = resolve(base_dir, item["fixture_triples"].as<std::string>());
            cfg.ontologies.push_back(std::move(src));
        }

        if (auto lm = root["lm"]) {
            read(lm, "backend", cfg.lm.backend);
            read(lm, "url", cfg.lm.url);
            if (lm["api"]) cfg.lm.api = http_api_from_string(lm["api"].as<std::string>());
            read(lm, "model", cfg.lm.model);
            read(lm, "api_key", cfg.lm.api_key);
            read(lm, "temperature", cfg.lm.temperature);
            read(lm, "max_tokens", cfg.lm.max_tokens);
            read(lm, "max_in_flight", cfg.lm.max_in_flight);
            read(lm, "timeout_s", cfg.lm.timeout_s);
        }
        if (auto emb = root["embedding"]) {
            read(emb, "url", cfg.embedding.url);
            read(emb, "model", cfg.embedding.model);
            read(emb, "api_key", cfg.embedding.api_key);
            read(emb, "dim", cfg.embedding.dim);
            if (emb["cache_dir"]) cfg.embedding.cache_dir = resolve(base_dir, emb["cache_dir"].as<std::string>());
        }
        if (auto sparql = root["sparql"]) {
            read(sparql, "url", cfg.sparql_url);
            read(sparql, "timeout_s", cfg.sparql_timeout_s);
        }
    } catch (const YAML::Exception& e) {
        throw ParseError(fmt::format("config: {}", e.what()));
    }
    if (cfg.ontologies.empty()) throw InvalidArgument("config: at least one ontology is required");
    if (cfg.retrieval_k == 0) throw InvalidArgument("config: retrieval_k must be positive");
    return cfg;
}

ServiceConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_text_file(path), path.parent_path());
}

void apply_env_overrides(ServiceConfig& cfg, const EnvLookup& env) {
    if (auto v = env("ONSET_LM_URL")) cfg.lm.url = *v;
    if (auto v = env("ONSET_EMBED_URL")) cfg.embedding.url = *v;
    if (auto v = env("ONSET_SPARQL_URL")) cfg.sparql_url = *v;
    if (auto v = env("ONSET_LISTEN")) cfg.listen = *v;
}

void apply_env_overrides(ServiceConfig& cfg) {
    apply_env_overrides(cfg, [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (!v) return std::nullopt;
        return std::string(v);
    });
}

std::pair<std::string, int> parse_listen_address(std::string_view text) {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos) throw InvalidArgument(fmt::format("listen address '{}' lacks a port", text));
    std::string host(text.substr(0, colon));
    int port = 0;
    try {
        port = std::stoi(std::string(text.substr(colon + 1)));
    } catch (const std::exception&) {
        throw InvalidArgument(fmt::format("listen address '{}' has a bad port", text));
    }
    if (port < 0 || port > 65535) throw InvalidArgument(fmt::format("listen address '{}' has a bad port", text));
    return {host.empty() ? "0.0.0.0" : host, port};
}

}  // namespace onset
