#include "onset/semantic_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "onset/error.hpp"

namespace onset {

std::string_view to_string(ItemKind kind) noexcept {
    return kind == ItemKind::classes ? "classes" : "links";
}

ItemKind item_kind_from_string(std::string_view text) {
    if (text == "classes") return ItemKind::classes;
    if (text == "links") return ItemKind::links;
    throw InvalidArgument(fmt::format("unknown item kind '{}'", text));
}

nlohmann::ordered_json candidates_to_json(const CandidateSet& c, const OntologyIndex* index) {
    auto list = [&](const std::vector<ScoredItem>& items, bool classes) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& item : items) {
            nlohmann::ordered_json entry = {{"iri", item.iri}, {"similarity", item.similarity}};
            if (index) {
                const ClassDef* cls = classes ? index->find_class(item.iri) : nullptr;
                const LinkDef* link = classes ? nullptr : index->find_link(item.iri);
                if (cls) entry["label"] = cls->label;
                if (link) entry["label"] = link->label;
            }
            arr.push_back(std::move(entry));
        }
        return arr;
    };
    nlohmann::ordered_json doc;
    doc["classes"] = list(c.classes, true);
    doc["links"] = list(c.links, false);
    return doc;
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size()) throw InvalidArgument("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += double(a[i]) * b[i];
        na += double(a[i]) * a[i];
        nb += double(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw InvalidArgument("cosine: zero-norm vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

constexpr std::string_view kCacheFormat = "onset-vectors/1";

Embedding to_unit(Embedding v, std::string_view what) {
    double norm = 0.0;
    for (float x : v) {
        if (!std::isfinite(x)) throw Error(fmt::format("embedding for {} has non-finite values", what));
        norm += double(x) * x;
    }
    if (norm == 0.0) throw Error(fmt::format("embedding for {} has zero norm", what));
    double inv = 1.0 / std::sqrt(norm);
    for (float& x : v) x = static_cast<float>(x * inv);
    return v;
}

double dot(const Embedding& a, const Embedding& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * b[i];
    return s;
}

std::string sanitize_for_filename(std::string_view s) {
    std::string out;
    for (unsigned char c : s) out += std::isalnum(c) || c == '-' || c == '.' ? static_cast<char>(c) : '_';
    return out;
}

std::uint32_t to_little_endian(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        v = ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
    }
    return v;
}

void write_cache(const std::filesystem::path& file, std::string_view hash, std::string_view model,
                 std::size_t dim, const std::vector<std::string>& class_iris,
                 const std::vector<std::string>& link_iris, const std::vector<Embedding>& vectors) {
    std::filesystem::create_directories(file.parent_path());
    nlohmann::ordered_json header = {{"format", kCacheFormat}, {"ontology_hash", hash},
                                     {"model", model},         {"dim", dim},
                                     {"classes", class_iris},  {"links", link_iris}};
    auto tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(fmt::format("cannot write vector cache {}", tmp.string()));
        out << header.dump() << '\n';
        for (const auto& v : vectors) {
            for (float x : v) {
                std::uint32_t bits = to_little_endian(std::bit_cast<std::uint32_t>(x));
                out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
            }
        }
    }
    std::filesystem::rename(tmp, file);
}

std::optional<std::vector<Embedding>> read_cache(const std::filesystem::path& file, std::string_view hash,
                                                 std::string_view model,
                                                 const std::vector<std::string>& class_iris,
                                                 const std::vector<std::string>& link_iris) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return std::nullopt;
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    auto header = nlohmann::json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("format", "") != kCacheFormat ||
        header.value("ontology_hash", "") != hash || header.value("model", "") != model ||
        header.value("classes", std::vector<std::string>{}) != class_iris ||
        header.value("links", std::vector<std::string>{}) != link_iris) {
        return std::nullopt;
    }
    std::size_t dim = header.value("dim", std::size_t{0});
    if (dim == 0) return std::nullopt;
    std::vector<Embedding> vectors(class_iris.size() + link_iris.size(), Embedding(dim));
    for (auto& v : vectors) {
        for (float& x : v) {
            std::uint32_t bits = 0;
            if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) return std::nullopt;
            x = std::bit_cast<float>(to_little_endian(bits));
        }
    }
    return vectors;
}

}  // namespace

std::string SemanticIndex::cache_file_name(std::string_view content_hash, std::string_view model_id) {
    return fmt::format("{}-{}.vec", content_hash.substr(0, 16), sanitize_for_filename(model_id));
}

SemanticIndex SemanticIndex::build(OntologyPtr ontology, std::shared_ptr<const Embedder> embedder,
                                   const SemanticIndexOptions& options) {
    if (!ontology || !embedder) throw InvalidArgument("semantic index needs an ontology and an embedder");
    SemanticIndex idx;
    idx.ontology_ = std::move(ontology);
    idx.embedder_ = std::move(embedder);

    for (const auto& [iri, cls] : idx.ontology_->classes()) idx.classes_.iris.push_back(iri);
    for (const auto& [iri, link] : idx.ontology_->links()) idx.links_.iris.push_back(iri);
    const std::string model = idx.embedder_->model_id();
    const std::string& hash = idx.ontology_->content_hash();

    std::optional<std::vector<Embedding>> vectors;
    if (options.cache_dir) {
        idx.stats_.cache_file = *options.cache_dir / cache_file_name(hash, model);
        vectors = read_cache(*idx.stats_.cache_file, hash, model, idx.classes_.iris, idx.links_.iris);
        idx.stats_.cache_hit = vectors.has_value();
    }
    if (!vectors) {
        std::vector<std::string> texts;
        for (const auto& iri : idx.classes_.iris) texts.push_back(idx.ontology_->describe(iri));
        for (const auto& iri : idx.links_.iris) texts.push_back(idx.ontology_->describe(iri));
        vectors.emplace();
        std::size_t batch = std::max<std::size_t>(1, options.batch_size);
        for (std::size_t begin = 0; begin < texts.size(); begin += batch) {
            std::vector<std::string> chunk(texts.begin() + begin,
                                           texts.begin() + std::min(texts.size(), begin + batch));
            auto got = idx.embedder_->embed(chunk);
            ++idx.stats_.embedding_requests;
            if (got.size() != chunk.size()) throw BackendError("embedder returned the wrong number of vectors");
            for (auto& v : got) vectors->push_back(std::move(v));
        }
    }

    std::size_t dim = vectors->empty() ? 0 : vectors->front().size();
    for (const auto& v : *vectors) {
        if (v.size() != dim || dim == 0) {
            throw Error(fmt::format("embedding dimension mismatch: {} vs {}", v.size(), dim));
        }
    }
    idx.dim_ = dim;
    if (options.cache_dir && !idx.stats_.cache_hit) {
        try {
            write_cache(*idx.stats_.cache_file, hash, model, dim, idx.classes_.iris, idx.links_.iris, *vectors);
        } catch (const std::exception& e) {
            spdlog::warn("semantic index: vector cache not written: {}", e.what());
        }
    }
    std::size_t n_classes = idx.classes_.iris.size();
    for (std::size_t i = 0; i < vectors->size(); ++i) {
        bool is_class = i < n_classes;
        const std::string& iri = is_class ? idx.classes_.iris[i] : idx.links_.iris[i - n_classes];
        (is_class ? idx.classes_ : idx.links_).unit_vectors.push_back(to_unit(std::move((*vectors)[i]), iri));
    }
    return idx;
}

std::size_t SemanticIndex::size(ItemKind kind) const noexcept { return corpus(kind).iris.size(); }

Embedding SemanticIndex::embed_query(std::string_view text) const {
    auto got = embedder_->embed({std::string(text)});
    if (got.size() != 1) throw BackendError("embedder returned the wrong number of vectors");
    if (got.front().size() != dim_) {
        throw Error(fmt::format("query embedding has dimension {}, index has {}", got.front().size(), dim_));
    }
    return to_unit(std::move(got.front()), "query");
}

std::vector<ScoredItem> SemanticIndex::rank(const Embedding& unit_query, ItemKind kind, std::size_t k,
                                            const std::function<bool(const std::string&)>* keep) const {
    if (k == 0) throw InvalidArgument("k must be at least 1");
    const Corpus& c = corpus(kind);
    if (c.iris.empty()) throw Error(fmt::format("semantic index has no {}", to_string(kind)));
    std::vector<ScoredItem> scored;
    scored.reserve(c.iris.size());
    for (std::size_t i = 0; i < c.iris.size(); ++i) {
        if (keep && !(*keep)(c.iris[i])) continue;
        scored.push_back({c.iris[i], std::clamp(dot(unit_query, c.unit_vectors[i]), -1.0, 1.0)});
    }
    auto better = [](const ScoredItem& a, const ScoredItem& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.iri < b.iri;
    };
    std::size_t n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), better);
    scored.resize(n);
    return scored;
}

std::vector<ScoredItem> SemanticIndex::top_k(std::string_view query, ItemKind kind, std::size_t k) const {
    if (k == 0) throw InvalidArgument("k must be at least 1");
    return rank(embed_query(query), kind, k, nullptr);
}

std::vector<ScoredItem> SemanticIndex::top_k_where(std::string_view query, ItemKind kind, std::size_t k,
                                                   const std::function<bool(const std::string&)>& keep) const {
    if (k == 0) throw InvalidArgument("k must be at least 1");
    return rank(embed_query(query), kind, k, &keep);
}

CandidateSet SemanticIndex::candidates_for_graph(const PrototypeGraph& raw, std::size_t k) const {
    if (raw.stage != GraphStage::raw) throw InvalidArgument("candidates_for_graph expects a raw graph");
    if (k == 0) throw InvalidArgument("k must be at least 1");

    std::vector<std::string> node_texts;
    std::vector<std::string> edge_texts;
    for (const auto& n : raw.nodes) node_texts.push_back(n.class_iri);
    for (const auto& e : raw.edges) edge_texts.push_back(e.link_iri);

    std::vector<std::string> all = node_texts;
    all.insert(all.end(), edge_texts.begin(), edge_texts.end());
    std::vector<Embedding> queries;
    if (!all.empty()) {
        auto got = embedder_->embed(all);
        if (got.size() != all.size()) throw BackendError("embedder returned the wrong number of vectors");
        for (auto& v : got) {
            if (v.size() != dim_) throw Error("query embedding dimension mismatch");
            queries.push_back(to_unit(std::move(v), "query"));
        }
    }

    std::map<std::string, double> classes;
    std::map<std::string, double> links;
    auto keep_max = [](std::map<std::string, double>& into, const ScoredItem& item) {
        auto [it, inserted] = into.emplace(item.iri, item.similarity);
        if (!inserted) it->second = std::max(it->second, item.similarity);
    };
    for (std::size_t i = 0; i < node_texts.size(); ++i) {
        for (const auto& item : rank(queries[i], ItemKind::classes, k, nullptr)) keep_max(classes, item);
    }
    for (std::size_t i = 0; i < edge_texts.size(); ++i) {
        for (const auto& item : rank(queries[node_texts.size() + i], ItemKind::links, k, nullptr)) {
            keep_max(links, item);
        }
    }

    // Endpoint closure: every allowed link must have typeable endpoints.
    auto class_score = [&](const std::string& iri) {
        auto pos = std::lower_bound(classes_.iris.begin(), classes_.iris.end(), iri);
        const Embedding& v = classes_.unit_vectors[static_cast<std::size_t>(pos - classes_.iris.begin())];
        double best = -1.0;
        for (std::size_t i = 0; i < node_texts.size(); ++i) best = std::max(best, dot(queries[i], v));
        return std::clamp(best, -1.0, 1.0);
    };
    for (const auto& [iri, score] : links) {
        const LinkDef& link = ontology_->link_def(iri);
        for (const std::string* end : {&link.from_type, &link.to_type}) {
            if (!classes.count(*end)) classes.emplace(*end, class_score(*end));
        }
    }

    auto to_sorted = [](const std::map<std::string, double>& m) {
        std::vector<ScoredItem> v;
        for (const auto& [iri, s] : m) v.push_back({iri, s});
        std::stable_sort(v.begin(), v.end(), [](const ScoredItem& a, const ScoredItem& b) {
            return a.similarity > b.similarity;
        });
        return v;
    };
    return {to_sorted(classes), to_sorted(links)};
}

}  // namespace onset
