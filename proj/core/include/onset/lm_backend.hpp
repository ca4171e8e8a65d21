#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "onset/grammar.hpp"
#include "onset/prototype_graph.hpp"

namespace onset {

enum class LmTask { extract_raw, extract_constrained, generate_query };

struct LmRequest {
    std::string prompt;
    std::optional<GrammarSpec> grammar;
    int max_tokens = 1024;
    double temperature = 0.2;
    std::optional<std::int64_t> seed;
    std::string model;
    LmTask task = LmTask::extract_raw;
};

enum class BackendKind { grammar_http, mock_oracle, mock_scripted, mock_random };

std::string_view to_string(BackendKind kind) noexcept;

/// A text-completion provider. Implementations must be safe to call concurrently.
class LmBackend {
public:
    virtual ~LmBackend() = default;
    virtual BackendKind kind() const noexcept = 0;
    virtual std::string model_id() const = 0;
    /// True when completions honor the GBNF text byte-for-byte. Schema-mode servers
    /// only promise JSON that satisfies the equivalent schema.
    virtual bool exact_grammar() const noexcept { return true; }
    virtual std::string complete(const LmRequest& request) = 0;
};

enum class HttpApi {
    llama_cpp,           // POST /completion with a "grammar" field
    openai_json_schema,  // POST /v1/chat/completions with response_format json_schema
};

HttpApi http_api_from_string(std::string_view text);

struct HttpLmConfig {
    std::string base_url;
    std::string model;
    HttpApi api = HttpApi::llama_cpp;
    std::string api_key;
    std::chrono::seconds timeout{180};
};

class HttpLmBackend final : public LmBackend {
public:
    explicit HttpLmBackend(HttpLmConfig config);
    BackendKind kind() const noexcept override { return BackendKind::grammar_http; }
    std::string model_id() const override { return config_.model; }
    bool exact_grammar() const noexcept override { return config_.api == HttpApi::llama_cpp; }
    std::string complete(const LmRequest& request) override;

private:
    HttpLmConfig config_;
};

/// Answers both extraction stages with its attached graph (label form) and query
/// generation with a fixed sentence.
class MockOracleBackend final : public LmBackend {
public:
    explicit MockOracleBackend(PrototypeGraph answer_in_labels, std::string query_text = "oracle query");
    BackendKind kind() const noexcept override { return BackendKind::mock_oracle; }
    std::string model_id() const override { return "mock-oracle"; }
    std::string complete(const LmRequest& request) override;

private:
    std::string answer_;
    std::string query_text_;
};

/// Replies through a caller-supplied function.
class MockScriptedBackend final : public LmBackend {
public:
    using Script = std::function<std::string(const LmRequest&)>;
    explicit MockScriptedBackend(Script script);
    /// Replays `responses` in order, repeating the last one once exhausted.
    static std::shared_ptr<MockScriptedBackend> replay(std::vector<std::string> responses);

    BackendKind kind() const noexcept override { return BackendKind::mock_scripted; }
    std::string model_id() const override { return "mock-scripted"; }
    std::string complete(const LmRequest& request) override;
    std::size_t calls() const;

private:
    Script script_;
    mutable std::mutex mutex_;
    std::size_t calls_ = 0;
};

struct RandomBackendOptions {
    /// Free-text labels used when the grammar has no enumerated vocabulary.
    std::vector<std::string> open_vocabulary = {"person", "university", "city", "film", "child",
                                                "studied at", "born in", "directed by", "writer"};
    std::size_t max_nodes = 6;
    std::size_t max_edges = 8;
};

/// Emits random strings from the language of whatever grammar it is handed:
/// either a random graph over the enumerated vocabulary or a direct draw from the
/// GBNF sampler. Output depends only on (seed, prompt, task).
class MockRandomBackend final : public LmBackend {
public:
    explicit MockRandomBackend(std::uint64_t seed, RandomBackendOptions options = {});
    BackendKind kind() const noexcept override { return BackendKind::mock_random; }
    std::string model_id() const override { return "mock-random"; }
    std::string complete(const LmRequest& request) override;

private:
    std::uint64_t seed_;
    RandomBackendOptions options_;
};

}  // namespace onset
