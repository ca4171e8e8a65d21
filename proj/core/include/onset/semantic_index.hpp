#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "onset/embedder.hpp"
#include "onset/ontology.hpp"
#include "onset/prototype_graph.hpp"

namespace onset {

enum class ItemKind { classes, links };

std::string_view to_string(ItemKind kind) noexcept;
ItemKind item_kind_from_string(std::string_view text);

struct ScoredItem {
    std::string iri;
    double similarity = 0.0;  // cosine, in [-1, 1]
    friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

/// Restricted stage-two vocabulary: each list sorted by descending similarity, ties by iri.
struct CandidateSet {
    std::vector<ScoredItem> classes;
    std::vector<ScoredItem> links;
};

nlohmann::ordered_json candidates_to_json(const CandidateSet& c, const OntologyIndex* index = nullptr);

struct SemanticIndexOptions {
    std::optional<std::filesystem::path> cache_dir;
    std::size_t batch_size = 64;
};

struct SemanticIndexStats {
    std::size_t embedding_requests = 0;  // embed() calls issued during build
    bool cache_hit = false;
    std::optional<std::filesystem::path> cache_file;
};

/// One vector per class and link description, answering exact top-k cosine queries.
/// Immutable after build; queries may run concurrently.
class SemanticIndex {
public:
    /// Embeds describe() of every item, or loads them from the vector cache keyed by
    /// (ontology content hash, embedder model id). Throws BackendError on endpoint
    /// failures and Error on mixed dimensions or zero-norm vectors.
    static SemanticIndex build(OntologyPtr ontology, std::shared_ptr<const Embedder> embedder,
                               const SemanticIndexOptions& options = {});

    /// The `k` items of `kind` most similar to `query`, all of them if fewer exist.
    std::vector<ScoredItem> top_k(std::string_view query, ItemKind kind, std::size_t k) const;

    /// As top_k, ranking only the items that satisfy `keep`.
    std::vector<ScoredItem> top_k_where(std::string_view query, ItemKind kind, std::size_t k,
                                        const std::function<bool(const std::string&)>& keep) const;

    /// Union of per-node class and per-edge link retrievals over a raw graph, plus the
    /// endpoint classes of every retrieved link.
    CandidateSet candidates_for_graph(const PrototypeGraph& raw, std::size_t k) const;

    std::size_t size(ItemKind kind) const noexcept;
    std::size_t dim() const noexcept { return dim_; }
    const SemanticIndexStats& stats() const noexcept { return stats_; }
    const OntologyIndex& ontology() const noexcept { return *ontology_; }
    const Embedder& embedder() const noexcept { return *embedder_; }

    /// Cache file name for a (content hash, model) pair.
    static std::string cache_file_name(std::string_view content_hash, std::string_view model_id);

private:
    struct Corpus {
        std::vector<std::string> iris;
        std::vector<Embedding> unit_vectors;
    };

    SemanticIndex() = default;
    const Corpus& corpus(ItemKind kind) const noexcept { return kind == ItemKind::classes ? classes_ : links_; }
    Embedding embed_query(std::string_view text) const;
    std::vector<ScoredItem> rank(const Embedding& unit_query, ItemKind kind, std::size_t k,
                                 const std::function<bool(const std::string&)>* keep) const;

    OntologyPtr ontology_;
    std::shared_ptr<const Embedder> embedder_;
    Corpus classes_;
    Corpus links_;
    std::size_t dim_ = 0;
    SemanticIndexStats stats_;
};

/// Cosine similarity dot(a,b)/(‖a‖‖b‖). Throws InvalidArgument on size mismatch or zero norm.
double cosine_similarity(const Embedding& a, const Embedding& b);

}  // namespace onset
