#include "onset/sparql.hpp"

#include <cctype>
#include <map>
#include <set>

#include <fmt/format.h>

#include "onset/error.hpp"

namespace onset {

std::string sparql_variable(std::string_view node_id) {
    std::string var;
    for (unsigned char c : node_id) {
        var += (std::isalnum(c) && c < 0x80) || c == '_' ? static_cast<char>(c) : '_';
    }
    if (var.empty()) var = "node";
    return var;
}

std::vector<std::string> sparql_variables(const PrototypeGraph& g) {
    std::set<std::string> used;
    std::vector<std::string> out;
    for (const auto& n : g.nodes) {
        std::string base = sparql_variable(n.id);
        std::string var = base;
        for (int i = 2; used.count(var); ++i) var = fmt::format("{}_{}", base, i);
        used.insert(var);
        out.push_back(var);
    }
    return out;
}

std::string to_sparql(const PrototypeGraph& g) {
    if (g.stage != GraphStage::corrected && g.stage != GraphStage::sampled) {
        throw InvalidArgument(fmt::format("to_sparql needs a corrected or sampled graph, got {}",
                                          to_string(g.stage)));
    }
    std::vector<std::string> order = sparql_variables(g);
    std::map<std::string, std::string> vars;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) vars.emplace(g.nodes[i].id, order[i]);

    std::string q = "SELECT DISTINCT";
    if (order.empty()) q += " *";
    for (const auto& v : order) q += " ?" + v;
    q += " WHERE {\n";
    for (const auto& e : g.edges) {
        auto t = vars.find(e.tail);
        auto h = vars.find(e.head);
        if (t == vars.end() || h == vars.end()) {
            throw InvalidArgument(fmt::format("edge {} -> {} references an undefined node", e.tail, e.head));
        }
        q += fmt::format("    ?{} <{}> ?{}.\n", t->second, e.link_iri, h->second);
    }
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        q += fmt::format("    ?{} a <{}>.\n", order[i], g.nodes[i].class_iri);
    }
    q += "}";
    return q;
}

std::string with_limit(const std::string& query, std::size_t limit) {
    return fmt::format("{}\nLIMIT {}", query, limit);
}

}  // namespace onset
