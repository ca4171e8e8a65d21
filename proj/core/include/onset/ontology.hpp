#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace onset {

enum class SamplingMode { probabilistic, uniform };

struct ClassDef {
    std::string iri;
    std::string label;
    std::string description;
    std::set<std::string> parents;  // direct supertypes
    std::uint64_t instance_count = 0;
};

struct LinkDef {
    std::string iri;
    std::string label;
    std::string description;
    std::string from_type;
    std::string to_type;
    std::uint64_t instance_count = 0;
};

enum class LinkSide { outgoing, incoming };

/// Links and extra axioms that did not make it into the index.
struct LoadReport {
    struct Dropped {
        std::string iri;
        std::string reason;
    };
    std::vector<Dropped> dropped_links;
    std::vector<Dropped> ignored_axioms;  // surplus domain/range declarations
    std::size_t unknown_count_rows = 0;
};

/// Raw ontology content before indexing: what a loader extracted from a document.
struct OntologyData {
    std::map<std::string, ClassDef> classes;
    std::map<std::string, LinkDef> links;
};

/// Immutable snapshot of classes, links and the class hierarchy of one ontology.
/// Safe to share across threads once built.
class OntologyIndex {
public:
    /// Validates referential closure and acyclicity. Throws ParseError on
    /// cycles or dangling parents, InvalidArgument when there are no classes.
    static std::shared_ptr<const OntologyIndex> build(OntologyData data, SamplingMode mode,
                                                      std::string content_hash = {});

    const std::map<std::string, ClassDef>& classes() const noexcept { return classes_; }
    const std::map<std::string, LinkDef>& links() const noexcept { return links_; }
    SamplingMode sampling_mode() const noexcept { return mode_; }
    /// Digest of the source bytes (and count table); keys embedding caches.
    const std::string& content_hash() const noexcept { return content_hash_; }

    const ClassDef* find_class(std::string_view iri) const noexcept;
    const LinkDef* find_link(std::string_view iri) const noexcept;
    const ClassDef& class_def(std::string_view iri) const;  // throws UnknownIriError
    const LinkDef& link_def(std::string_view iri) const;    // throws UnknownIriError
    bool has_class(std::string_view iri) const noexcept { return find_class(iri) != nullptr; }
    bool has_link(std::string_view iri) const noexcept { return find_link(iri) != nullptr; }

    /// Reflexive-transitive subclass test over the full parent DAG.
    bool subtypeof(std::string_view candidate, std::string_view ancestor) const;

    /// Links attachable to `node_class` on `side`, by descending instance count, ties by iri.
    std::vector<const LinkDef*> links_for(std::string_view node_class, LinkSide side) const;

    /// Embedding input text: "{label} — {description} — from {from} to {to}", empty parts elided.
    std::string describe(std::string_view iri) const;

    /// Direct subclasses, sorted by iri.
    const std::vector<std::string>& children(std::string_view iri) const;

    /// The class itself plus every subtype reachable in at most `depth` child steps.
    std::vector<std::string> subtypes_within(std::string_view iri, int depth) const;

    /// Case-insensitive exact label lookup.
    std::vector<std::string> classes_with_label(std::string_view label) const;
    std::vector<std::string> links_with_label(std::string_view label) const;

private:
    OntologyIndex() = default;

    std::map<std::string, ClassDef> classes_;
    std::map<std::string, LinkDef> links_;
    std::map<std::string, std::vector<std::string>, std::less<>> children_;
    std::map<std::string, std::set<std::string>, std::less<>> ancestors_;  // reflexive
    std::map<std::string, std::vector<std::string>, std::less<>> class_by_label_;
    std::map<std::string, std::vector<std::string>, std::less<>> link_by_label_;
    SamplingMode mode_ = SamplingMode::uniform;
    std::string content_hash_;
};

using OntologyPtr = std::shared_ptr<const OntologyIndex>;

struct LoadOptions {
    SamplingMode mode = SamplingMode::uniform;
    std::string base_iri;
    /// Two-column "iri<TAB>count" table; counts default to 0 when absent.
    std::optional<std::string> counts_text;
};

/// Builds an index from a Turtle / N-Triples document.
/// Throws ParseError on malformed documents and InvalidArgument when no classes are declared.
/// Dropped links are written to the diagnostics log and returned through `report`.
OntologyPtr load_ontology(std::string_view document, const LoadOptions& options = {},
                          LoadReport* report = nullptr);

OntologyPtr load_ontology_file(const std::filesystem::path& path,
                               const std::optional<std::filesystem::path>& counts_path,
                               SamplingMode mode, LoadReport* report = nullptr);

/// Parses a count table: iri and count separated by tabs or spaces. Blank lines and '#' comments are skipped.
std::map<std::string, std::uint64_t> parse_count_table(std::string_view text);

/// Text of a file, throwing Error when it cannot be read.
std::string read_text_file(const std::filesystem::path& path);

std::string_view to_string(SamplingMode mode) noexcept;
SamplingMode sampling_mode_from_string(std::string_view text);

/// Lowercased ASCII copy.
std::string ascii_lower(std::string_view text);

}  // namespace onset
