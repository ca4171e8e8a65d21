#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

namespace onset {

using Embedding = std::vector<float>;

/// Text → vector model. Implementations must tolerate concurrent calls.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string model_id() const = 0;
    /// One vector per input text, in input order.
    virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) const = 0;
};

/// Deterministic bag-of-words feature hashing. Shares words, so "college" lands
/// near any description that mentions colleges. Used for hermetic runs and tests.
class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dim = 512);
    std::string model_id() const override;
    std::vector<Embedding> embed(const std::vector<std::string>& texts) const override;

    /// Lowercased word tokens after camelCase splitting, stopword removal and plural folding.
    static std::vector<std::string> tokenize(std::string_view text);

private:
    std::size_t dim_;
};

struct HttpEmbedderConfig {
    std::string base_url;  // scheme://host[:port]
    std::string model;
    std::string path = "/v1/embeddings";
    std::string api_key;
    std::size_t batch_size = 64;
    std::chrono::seconds timeout{60};
};

/// OpenAI-compatible embeddings endpoint client.
class HttpEmbedder final : public Embedder {
public:
    explicit HttpEmbedder(HttpEmbedderConfig config);
    std::string model_id() const override { return config_.model; }
    std::vector<Embedding> embed(const std::vector<std::string>& texts) const override;

private:
    HttpEmbedderConfig config_;
};

/// Splits "http://host:port/prefix" into the scheme+authority and path parts.
std::pair<std::string, std::string> split_url(std::string_view url);

}  // namespace onset
