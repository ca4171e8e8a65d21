#include "onset/template_query.hpp"

#include <map>
#include <set>

#include <fmt/format.h>

#include "onset/error.hpp"

namespace onset {

namespace {

std::string ordinal(std::size_t n) {
    static constexpr const char* kWords[] = {"first", "second", "third",   "fourth", "fifth",
                                             "sixth", "seventh", "eighth", "ninth",  "tenth"};
    if (n >= 1 && n <= 10) return kWords[n - 1];
    std::string suffix = "th";
    if (n % 100 < 11 || n % 100 > 13) {
        if (n % 10 == 1) suffix = "st";
        if (n % 10 == 2) suffix = "nd";
        if (n % 10 == 3) suffix = "rd";
    }
    return fmt::format("{}{}", n, suffix);
}

}  // namespace

std::string template_query(const PrototypeGraph& g, const OntologyIndex& index) {
    if (!validate_graph(g, index).clean()) throw InvalidArgument("template_query needs a schema-valid graph");

    std::map<std::string, std::string> label_of;
    for (const auto& n : g.nodes) label_of[n.id] = ascii_lower(index.class_def(n.class_iri).label);

    // Per label: node ids in order of first mention.
    std::map<std::string, std::vector<std::string>> mentioned;
    std::set<std::string> seen;
    auto mention = [&](const std::string& id) {
        const std::string& label = label_of.at(id);
        auto& ids = mentioned[label];
        if (seen.insert(id).second) {
            ids.push_back(id);
            return fmt::format("a {}", label);
        }
        if (ids.size() == 1) return fmt::format("the same {}", label);
        std::size_t pos = std::find(ids.begin(), ids.end(), id) - ids.begin();
        return fmt::format("the {} {}", ordinal(pos + 1), label);
    };

    std::vector<std::string> clauses;
    for (const auto& e : g.edges) {
        std::string tail = mention(e.tail);
        std::string link = ascii_lower(index.link_def(e.link_iri).label);
        std::string head = mention(e.head);
        clauses.push_back(fmt::format("{} that {} {}", tail, link, head));
    }
    for (const auto& n : g.nodes) {
        if (!seen.count(n.id)) clauses.push_back(mention(n.id));
    }
    return fmt::format("{}", fmt::join(clauses, " and "));
}

}  // namespace onset
