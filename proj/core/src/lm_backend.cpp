#include "onset/lm_backend.hpp"

#include <random>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "onset/embedder.hpp"
#include "onset/error.hpp"
#include "onset/gbnf.hpp"

namespace onset {

namespace {

std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string random_graph(std::mt19937_64& rng, const std::vector<std::string>& classes,
                         const std::vector<std::string>& links, const RandomBackendOptions& opt) {
    std::uniform_int_distribution<std::size_t> n_nodes(0, opt.max_nodes);
    std::size_t n = n_nodes(rng);
    std::vector<std::string> ids;
    // Repeated and undeclared ids show up now and then, as they do in real output.
    std::bernoulli_distribution odd(0.1);
    for (std::size_t i = 0; i < n; ++i) {
        if (!ids.empty() && odd(rng)) ids.push_back(ids[rng() % ids.size()]);
        else ids.push_back(fmt::format("n{}", i + 1));
    }
    nlohmann::ordered_json doc;
    doc["nodes"] = nlohmann::ordered_json::array();
    doc["edges"] = nlohmann::ordered_json::array();
    for (const auto& id : ids) {
        doc["nodes"].push_back({{"id", id}, {"class", classes[rng() % classes.size()]}});
    }
    if (!ids.empty() && !links.empty()) {
        std::uniform_int_distribution<std::size_t> n_edges(0, opt.max_edges);
        std::size_t m = n_edges(rng);
        for (std::size_t i = 0; i < m; ++i) {
            std::string from = ids[rng() % ids.size()];
            std::string to = odd(rng) ? std::string("n99") : ids[rng() % ids.size()];
            doc["edges"].push_back({{"from", from}, {"link", links[rng() % links.size()]}, {"to", to}});
        }
    }
    return doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace

std::string_view to_string(BackendKind kind) noexcept {
    switch (kind) {
        case BackendKind::grammar_http: return "grammar_http";
        case BackendKind::mock_oracle: return "mock_oracle";
        case BackendKind::mock_scripted: return "mock_scripted";
        case BackendKind::mock_random: return "mock_random";
    }
    return "unknown";
}

HttpApi http_api_from_string(std::string_view text) {
    if (text == "llama_cpp" || text == "llama.cpp") return HttpApi::llama_cpp;
    if (text == "openai" || text == "openai_json_schema") return HttpApi::openai_json_schema;
    throw InvalidArgument(fmt::format("unknown LM api '{}'", text));
}

HttpLmBackend::HttpLmBackend(HttpLmConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw InvalidArgument("LM endpoint url is empty");
}

std::string HttpLmBackend::complete(const LmRequest& request) {
    auto [authority, prefix] = split_url(config_.base_url);
    httplib::Client client(authority);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    const std::string model = request.model.empty() ? config_.model : request.model;

    nlohmann::json body;
    std::string path;
    if (config_.api == HttpApi::llama_cpp) {
        path = prefix + "/completion";
        body = {{"prompt", request.prompt},
                {"n_predict", request.max_tokens},
                {"temperature", request.temperature},
                {"cache_prompt", true}};
        if (request.seed) body["seed"] = *request.seed;
        if (request.grammar) body["grammar"] = request.grammar->text;
        if (!model.empty()) body["model"] = model;
    } else {
        path = prefix + "/v1/chat/completions";
        body = {{"model", model},
                {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
                {"max_tokens", request.max_tokens},
                {"temperature", request.temperature}};
        if (request.seed) body["seed"] = *request.seed;
        if (request.grammar) {
            body["response_format"] = {
                {"type", "json_schema"},
                {"json_schema",
                 {{"name", "prototype_graph"}, {"strict", true}, {"schema", graph_json_schema(request.grammar->vocab)}}}};
        }
    }

    auto res = client.Post(path, headers, body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                           "application/json");
    if (!res) {
        throw BackendError(fmt::format("LM endpoint {}: {}", config_.base_url, httplib::to_string(res.error())));
    }
    if (res->status != 200) {
        throw BackendError(fmt::format("LM endpoint returned HTTP {}: {}", res->status, res->body.substr(0, 200)));
    }
    auto doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded()) throw BackendError("LM endpoint returned a non-JSON payload");
    try {
        if (config_.api == HttpApi::llama_cpp) return doc.at("content").get<std::string>();
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw BackendError("LM endpoint payload has no completion text");
    }
}

MockOracleBackend::MockOracleBackend(PrototypeGraph answer_in_labels, std::string query_text)
    : answer_(graph_to_canonical_text(answer_in_labels)), query_text_(std::move(query_text)) {}

std::string MockOracleBackend::complete(const LmRequest& request) {
    if (request.task == LmTask::generate_query) return query_text_;
    return answer_;
}

MockScriptedBackend::MockScriptedBackend(Script script) : script_(std::move(script)) {
    if (!script_) throw InvalidArgument("scripted backend needs a script");
}

std::shared_ptr<MockScriptedBackend> MockScriptedBackend::replay(std::vector<std::string> responses) {
    if (responses.empty()) throw InvalidArgument("replay needs at least one response");
    auto state = std::make_shared<std::pair<std::mutex, std::size_t>>();
    return std::make_shared<MockScriptedBackend>(
        [responses = std::move(responses), state](const LmRequest&) {
            std::lock_guard lock(state->first);
            std::size_t i = std::min(state->second++, responses.size() - 1);
            return responses[i];
        });
}

std::string MockScriptedBackend::complete(const LmRequest& request) {
    {
        std::lock_guard lock(mutex_);
        ++calls_;
    }
    return script_(request);
}

std::size_t MockScriptedBackend::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

MockRandomBackend::MockRandomBackend(std::uint64_t seed, RandomBackendOptions options)
    : seed_(seed), options_(std::move(options)) {
    if (options_.open_vocabulary.empty()) throw InvalidArgument("random backend needs an open vocabulary");
}

std::string MockRandomBackend::complete(const LmRequest& request) {
    std::uint64_t h = fnv1a(request.prompt, seed_ ^ 0x9E3779B97F4A7C15ULL);
    h = fnv1a(std::to_string(static_cast<int>(request.task)), h);
    if (request.seed) h = fnv1a(std::to_string(*request.seed), h);
    std::mt19937_64 rng(h);

    if (!request.grammar) return fmt::format("random request {:016x}", h);

    std::vector<std::string> classes = options_.open_vocabulary;
    std::vector<std::string> links = options_.open_vocabulary;
    if (request.grammar->vocab) {
        classes = request.grammar->vocab->class_labels;
        links = request.grammar->vocab->link_labels;
    }
    if (std::bernoulli_distribution(0.5)(rng)) return random_graph(rng, classes, links, options_);

    auto grammar = gbnf::Grammar::parse(request.grammar->text);
    gbnf::SampleOptions opt;
    auto& ids = opt.overrides["nodeid"];
    for (std::size_t i = 1; i <= 4; ++i) ids.push_back(json_string_token(fmt::format("n{}", i)));
    if (!request.grammar->vocab) {
        auto& cv = opt.overrides["classval"];
        auto& lv = opt.overrides["linkval"];
        for (const auto& w : options_.open_vocabulary) {
            cv.push_back(json_string_token(w));
            lv.push_back(json_string_token(w));
        }
    }
    return gbnf::sample(grammar, request.grammar->root_rule, rng, opt);
}

}  // namespace onset
