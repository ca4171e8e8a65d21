#include "onset/ontology.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "onset/error.hpp"
#include "onset/hashing.hpp"
#include "onset/turtle.hpp"

namespace onset {

namespace {

const std::string kOwlClass = std::string(rdf::kOwl) + "Class";
const std::string kRdfsClass = std::string(rdf::kRdfs) + "Class";
const std::string kOwlThing = std::string(rdf::kOwl) + "Thing";
const std::string kRdfsResource = std::string(rdf::kRdfs) + "Resource";
const std::string kSubClassOf = std::string(rdf::kRdfs) + "subClassOf";
const std::string kDomain = std::string(rdf::kRdfs) + "domain";
const std::string kRange = std::string(rdf::kRdfs) + "range";
const std::string kLabel = std::string(rdf::kRdfs) + "label";
const std::string kComment = std::string(rdf::kRdfs) + "comment";
const std::string kObjectProperty = std::string(rdf::kOwl) + "ObjectProperty";
const std::string kRdfProperty = std::string(rdf::kRdf) + "Property";
const std::string kDatatypeProperty = std::string(rdf::kOwl) + "DatatypeProperty";
const std::string kAnnotationProperty = std::string(rdf::kOwl) + "AnnotationProperty";

bool is_top_class(std::string_view iri) { return iri == kOwlThing || iri == kRdfsResource; }

std::string local_name(std::string_view iri) {
    auto cut = iri.find_last_of("#/:");
    return std::string(cut == std::string_view::npos ? iri : iri.substr(cut + 1));
}

// Preference: English, then untagged, then whatever came first.
struct LangText {
    std::string text;
    int rank = -1;

    void offer(const rdf::Term& lit) {
        int r = lit.lang == "en" || lit.lang.rfind("en-", 0) == 0 ? 2 : lit.lang.empty() ? 1 : 0;
        if (r > rank) {
            rank = r;
            text = lit.value;
        }
    }
};

struct PropertyAxioms {
    std::vector<std::string> domains;
    std::vector<std::string> ranges;
    bool declared = false;
    bool datatype = false;
};

template <class Map>
std::vector<std::string> lookup_label(const Map& by_label, std::string_view label) {
    auto it = by_label.find(ascii_lower(label));
    return it == by_label.end() ? std::vector<std::string>{} : it->second;
}

}  // namespace

std::string ascii_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    });
    return out;
}

std::string_view to_string(SamplingMode mode) noexcept {
    return mode == SamplingMode::probabilistic ? "probabilistic" : "uniform";
}

SamplingMode sampling_mode_from_string(std::string_view text) {
    if (text == "probabilistic") return SamplingMode::probabilistic;
    if (text == "uniform") return SamplingMode::uniform;
    throw InvalidArgument(fmt::format("unknown sampling mode '{}'", text));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot read {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::uint64_t> parse_count_table(std::string_view text) {
    std::map<std::string, std::uint64_t> counts;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        auto sep = line.find_first_of(" \t");
        if (sep == std::string_view::npos) {
            throw ParseError(fmt::format("count table: line {}: expected iri<TAB>count", line_no));
        }
        std::string_view iri = line.substr(0, sep);
        std::string_view num = line.substr(line.find_first_not_of(" \t", sep) == std::string_view::npos
                                               ? line.size()
                                               : line.find_first_not_of(" \t", sep));
        while (!num.empty() && (num.back() == ' ' || num.back() == '\t')) num.remove_suffix(1);
        std::uint64_t value = 0;
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
        if (ec != std::errc{} || ptr != num.data() + num.size()) {
            throw ParseError(fmt::format("count table: line {}: bad count '{}'", line_no, num));
        }
        counts[std::string(iri)] = value;
    }
    return counts;
}

OntologyPtr load_ontology(std::string_view document, const LoadOptions& options, LoadReport* report) {
    LoadReport local_report;
    LoadReport& rep = report ? *report : local_report;
    rep = {};

    std::vector<rdf::Triple> triples = rdf::parse_turtle(document, options.base_iri);

    OntologyData data;
    std::map<std::string, LangText> labels;
    std::map<std::string, LangText> comments;
    std::map<std::string, PropertyAxioms> properties;
    std::vector<std::string> property_order;

    auto ensure_class = [&](const std::string& iri) {
        if (is_top_class(iri)) return;
        auto& c = data.classes[iri];
        c.iri = iri;
    };
    auto property = [&](const std::string& iri) -> PropertyAxioms& {
        auto [it, inserted] = properties.try_emplace(iri);
        if (inserted) property_order.push_back(iri);
        return it->second;
    };

    for (const auto& t : triples) {
        if (!t.subject.is_iri()) continue;
        const std::string& s = t.subject.value;
        const std::string& p = t.predicate.value;
        if (p == rdf::kRdfType && t.object.is_iri()) {
            const std::string& o = t.object.value;
            if (o == kOwlClass || o == kRdfsClass) {
                ensure_class(s);
            } else if (o == kObjectProperty || o == kRdfProperty) {
                property(s).declared = true;
            } else if (o == kDatatypeProperty || o == kAnnotationProperty) {
                property(s).datatype = true;
            }
        } else if (p == kSubClassOf && t.object.is_iri()) {
            ensure_class(s);
            ensure_class(t.object.value);
            if (!is_top_class(s) && !is_top_class(t.object.value)) {
                data.classes[s].parents.insert(t.object.value);
            }
        } else if (p == kDomain && t.object.is_iri()) {
            property(s).domains.push_back(t.object.value);
        } else if (p == kRange && t.object.is_iri()) {
            property(s).ranges.push_back(t.object.value);
        } else if (p == kLabel && t.object.is_literal()) {
            labels[s].offer(t.object);
        } else if (p == kComment && t.object.is_literal()) {
            comments[s].offer(t.object);
        }
    }

    for (auto& [iri, cls] : data.classes) {
        cls.label = labels.count(iri) ? labels[iri].text : local_name(iri);
        cls.description = comments.count(iri) ? comments[iri].text : std::string{};
    }

    for (const auto& iri : property_order) {
        const PropertyAxioms& ax = properties[iri];
        if (ax.datatype || data.classes.count(iri)) continue;
        auto drop = [&](std::string reason) {
            spdlog::warn("ontology: dropping link {}: {}", iri, reason);
            rep.dropped_links.push_back({iri, std::move(reason)});
        };
        if (ax.domains.empty() || ax.ranges.empty()) {
            drop(ax.domains.empty() ? "no domain declared" : "no range declared");
            continue;
        }
        for (std::size_t i = 1; i < ax.domains.size(); ++i) {
            rep.ignored_axioms.push_back({iri, "surplus domain " + ax.domains[i]});
        }
        for (std::size_t i = 1; i < ax.ranges.size(); ++i) {
            rep.ignored_axioms.push_back({iri, "surplus range " + ax.ranges[i]});
        }
        const std::string& from = ax.domains.front();
        const std::string& to = ax.ranges.front();
        if (!data.classes.count(from)) {
            drop("domain " + from + " is not a declared class");
            continue;
        }
        if (!data.classes.count(to)) {
            drop("range " + to + " is not a declared class");
            continue;
        }
        LinkDef link;
        link.iri = iri;
        link.label = labels.count(iri) ? labels[iri].text : local_name(iri);
        link.description = comments.count(iri) ? comments[iri].text : std::string{};
        link.from_type = from;
        link.to_type = to;
        data.links.emplace(iri, std::move(link));
    }

    std::string hash_input(document);
    if (options.counts_text) {
        hash_input += "\n#counts\n";
        hash_input += *options.counts_text;
        for (const auto& [iri, count] : parse_count_table(*options.counts_text)) {
            if (auto c = data.classes.find(iri); c != data.classes.end()) {
                c->second.instance_count = count;
            } else if (auto l = data.links.find(iri); l != data.links.end()) {
                l->second.instance_count = count;
            } else {
                ++rep.unknown_count_rows;
            }
        }
    }
    hash_input += "\n#mode ";
    hash_input += to_string(options.mode);

    if (data.classes.empty()) throw InvalidArgument("ontology declares no classes");
    return OntologyIndex::build(std::move(data), options.mode, sha256_hex(hash_input));
}

OntologyPtr load_ontology_file(const std::filesystem::path& path,
                               const std::optional<std::filesystem::path>& counts_path,
                               SamplingMode mode, LoadReport* report) {
    LoadOptions options;
    options.mode = mode;
    if (counts_path) options.counts_text = read_text_file(*counts_path);
    return load_ontology(read_text_file(path), options, report);
}

std::shared_ptr<const OntologyIndex> OntologyIndex::build(OntologyData data, SamplingMode mode,
                                                          std::string content_hash) {
    if (data.classes.empty()) throw InvalidArgument("ontology declares no classes");
    std::shared_ptr<OntologyIndex> index(new OntologyIndex());
    index->mode_ = mode;
    index->content_hash_ = std::move(content_hash);

    for (const auto& [iri, cls] : data.classes) {
        if (cls.iri != iri) throw InvalidArgument(fmt::format("class key {} does not match iri", iri));
        for (const auto& parent : cls.parents) {
            if (!data.classes.count(parent)) {
                throw ParseError(fmt::format("class {} has undeclared parent {}", iri, parent));
            }
            index->children_[parent].push_back(iri);
        }
    }
    for (const auto& [iri, link] : data.links) {
        if (!data.classes.count(link.from_type) || !data.classes.count(link.to_type)) {
            throw ParseError(fmt::format("link {} has unresolved endpoint types", iri));
        }
    }

    // Reflexive ancestor sets; a grey node reached again means a cycle.
    enum class Mark { white, grey, black };
    std::map<std::string, Mark> marks;
    std::function<const std::set<std::string>&(const std::string&)> visit =
        [&](const std::string& iri) -> const std::set<std::string>& {
        Mark& m = marks[iri];
        if (m == Mark::grey) throw ParseError(fmt::format("cyclic class hierarchy at {}", iri));
        if (m == Mark::black) return index->ancestors_.find(iri)->second;
        m = Mark::grey;
        std::set<std::string> acc{iri};
        for (const auto& parent : data.classes.at(iri).parents) {
            const auto& up = visit(parent);
            acc.insert(up.begin(), up.end());
        }
        marks[iri] = Mark::black;
        return index->ancestors_.emplace(iri, std::move(acc)).first->second;
    };
    for (const auto& entry : data.classes) visit(entry.first);

    for (auto& [parent, kids] : index->children_) std::sort(kids.begin(), kids.end());
    for (const auto& [iri, cls] : data.classes) index->class_by_label_[ascii_lower(cls.label)].push_back(iri);
    for (const auto& [iri, link] : data.links) index->link_by_label_[ascii_lower(link.label)].push_back(iri);

    index->classes_ = std::move(data.classes);
    index->links_ = std::move(data.links);
    return index;
}

const ClassDef* OntologyIndex::find_class(std::string_view iri) const noexcept {
    auto it = classes_.find(std::string(iri));
    return it == classes_.end() ? nullptr : &it->second;
}

const LinkDef* OntologyIndex::find_link(std::string_view iri) const noexcept {
    auto it = links_.find(std::string(iri));
    return it == links_.end() ? nullptr : &it->second;
}

const ClassDef& OntologyIndex::class_def(std::string_view iri) const {
    if (const auto* c = find_class(iri)) return *c;
    throw UnknownIriError(std::string(iri));
}

const LinkDef& OntologyIndex::link_def(std::string_view iri) const {
    if (const auto* l = find_link(iri)) return *l;
    throw UnknownIriError(std::string(iri));
}

bool OntologyIndex::subtypeof(std::string_view candidate, std::string_view ancestor) const {
    auto it = ancestors_.find(candidate);
    if (it == ancestors_.end()) throw UnknownIriError(std::string(candidate));
    if (!find_class(ancestor)) throw UnknownIriError(std::string(ancestor));
    return it->second.count(std::string(ancestor)) > 0;
}

std::vector<const LinkDef*> OntologyIndex::links_for(std::string_view node_class, LinkSide side) const {
    auto anc = ancestors_.find(node_class);
    if (anc == ancestors_.end()) throw UnknownIriError(std::string(node_class));
    std::vector<const LinkDef*> out;
    for (const auto& [iri, link] : links_) {
        const std::string& end = side == LinkSide::outgoing ? link.from_type : link.to_type;
        if (anc->second.count(end)) out.push_back(&link);
    }
    std::stable_sort(out.begin(), out.end(), [](const LinkDef* a, const LinkDef* b) {
        if (a->instance_count != b->instance_count) return a->instance_count > b->instance_count;
        return a->iri < b->iri;
    });
    return out;
}

std::string OntologyIndex::describe(std::string_view iri) const {
    std::vector<std::string> parts;
    if (const auto* c = find_class(iri)) {
        parts.push_back(c->label);
        if (!c->description.empty()) parts.push_back(c->description);
    } else if (const auto* l = find_link(iri)) {
        parts.push_back(l->label);
        if (!l->description.empty()) parts.push_back(l->description);
        parts.push_back(fmt::format("from {} to {}", class_def(l->from_type).label,
                                    class_def(l->to_type).label));
    } else {
        throw UnknownIriError(std::string(iri));
    }
    return fmt::format("{}", fmt::join(parts, " — "));
}

const std::vector<std::string>& OntologyIndex::children(std::string_view iri) const {
    static const std::vector<std::string> none;
    if (!find_class(iri)) throw UnknownIriError(std::string(iri));
    auto it = children_.find(iri);
    return it == children_.end() ? none : it->second;
}

std::vector<std::string> OntologyIndex::subtypes_within(std::string_view iri, int depth) const {
    std::vector<std::string> out{std::string(class_def(iri).iri)};
    std::set<std::string> seen(out.begin(), out.end());
    std::vector<std::string> frontier = out;
    for (int level = 0; level < depth && !frontier.empty(); ++level) {
        std::vector<std::string> next;
        for (const auto& c : frontier) {
            for (const auto& kid : children(c)) {
                if (seen.insert(kid).second) {
                    next.push_back(kid);
                    out.push_back(kid);
                }
            }
        }
        frontier = std::move(next);
    }
    return out;
}

std::vector<std::string> OntologyIndex::classes_with_label(std::string_view label) const {
    return lookup_label(class_by_label_, label);
}

std::vector<std::string> OntologyIndex::links_with_label(std::string_view label) const {
    return lookup_label(link_by_label_, label);
}

}  // namespace onset
