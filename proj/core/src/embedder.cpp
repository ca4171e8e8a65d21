#include "onset/embedder.hpp"

#include <cctype>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "onset/error.hpp"

namespace onset {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

const std::set<std::string, std::less<>>& stopwords() {
    static const std::set<std::string, std::less<>> words = {
        "a", "an", "the", "of", "to", "from", "in", "on", "at", "and", "or", "for", "with",
        "by", "that", "who", "which", "is", "are", "was", "as", "its", "this", "be", "has"};
    return words;
}

}  // namespace

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw InvalidArgument("embedding dimension must be positive");
}

std::string HashingEmbedder::model_id() const { return fmt::format("hashing-bow-{}", dim_); }

std::vector<std::string> HashingEmbedder::tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        if (stopwords().count(current)) {
            current.clear();
            return;
        }
        if (current.size() > 3 && current.back() == 's' && current[current.size() - 2] != 's') {
            current.pop_back();
        }
        tokens.push_back(current);
        current.clear();
    };
    char prev = '\0';
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        bool word = std::isalnum(c) || c >= 0x80;
        if (!word) {
            flush();
        } else {
            if (std::isupper(c) && std::islower(static_cast<unsigned char>(prev))) flush();
            current += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
        }
        prev = ch;
    }
    flush();
    return tokens;
}

std::vector<Embedding> HashingEmbedder::embed(const std::vector<std::string>& texts) const {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        Embedding v(dim_, 0.0f);
        auto tokens = tokenize(text);
        if (tokens.empty()) tokens.push_back("\x01" + text);
        for (const auto& tok : tokens) {
            std::uint64_t h = fnv1a(tok);
            v[h % dim_] += (h >> 63) ? -1.0f : 1.0f;
        }
        double norm = 0.0;
        for (float x : v) norm += double(x) * x;
        if (norm == 0.0) v[fnv1a(text) % dim_] = 1.0f;  // colliding tokens cancelled out
        out.push_back(std::move(v));
    }
    return out;
}

std::pair<std::string, std::string> split_url(std::string_view url) {
    auto scheme = url.find("://");
    std::size_t start = scheme == std::string_view::npos ? 0 : scheme + 3;
    auto slash = url.find('/', start);
    if (slash == std::string_view::npos) return {std::string(url), ""};
    return {std::string(url.substr(0, slash)), std::string(url.substr(slash))};
}

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw InvalidArgument("embedding endpoint url is empty");
    if (config_.batch_size == 0) config_.batch_size = 1;
}

std::vector<Embedding> HttpEmbedder::embed(const std::vector<std::string>& texts) const {
    auto [authority, prefix] = split_url(config_.base_url);
    httplib::Client client(authority);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (std::size_t begin = 0; begin < texts.size(); begin += config_.batch_size) {
        std::size_t end = std::min(texts.size(), begin + config_.batch_size);
        nlohmann::json body = {{"model", config_.model},
                               {"input", std::vector<std::string>(texts.begin() + begin, texts.begin() + end)}};
        auto res = client.Post(prefix + config_.path, headers, body.dump(), "application/json");
        if (!res) {
            throw BackendError(fmt::format("embedding endpoint {}: {}", config_.base_url,
                                           httplib::to_string(res.error())));
        }
        if (res->status != 200) {
            throw BackendError(fmt::format("embedding endpoint returned HTTP {}", res->status));
        }
        auto doc = nlohmann::json::parse(res->body, nullptr, false);
        if (doc.is_discarded() || !doc.contains("data") || !doc["data"].is_array()) {
            throw BackendError("embedding endpoint returned an unexpected payload");
        }
        std::vector<Embedding> batch(end - begin);
        std::size_t position = 0;
        for (const auto& item : doc["data"]) {
            std::size_t idx = item.value("index", position);
            if (idx >= batch.size()) throw BackendError("embedding response index out of range");
            batch[idx] = item.at("embedding").get<Embedding>();
            ++position;
        }
        for (auto& v : batch) {
            if (v.empty()) throw BackendError("embedding response is missing vectors");
            out.push_back(std::move(v));
        }
    }
    return out;
}

}  // namespace onset
