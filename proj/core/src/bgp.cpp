#include "onset/bgp.hpp"

#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "onset/error.hpp"
#include "onset/turtle.hpp"

namespace onset {

namespace {

bool type_matches(const std::set<std::string>& asserted, const std::string& node_class, const OntologyIndex& index) {
    for (const auto& t : asserted) {
        if (t == node_class) return true;
        if (index.has_class(t) && index.has_class(node_class) && index.subtypeof(t, node_class)) return true;
    }
    return false;
}

}  // namespace

void TripleSet::add(std::string s, std::string p, std::string o) {
    triples.emplace(std::move(s), std::move(p), std::move(o));
}

void TripleSet::add_type(std::string object, std::string class_iri) {
    types[std::move(object)].insert(std::move(class_iri));
}

TripleSet TripleSet::from_turtle(std::string_view text) {
    TripleSet out;
    for (auto& t : rdf::parse_turtle(text)) {
        if (!t.subject.is_iri() || !t.object.is_iri()) continue;
        if (t.predicate.value == rdf::kRdfType) {
            out.add_type(std::move(t.subject.value), std::move(t.object.value));
        } else {
            out.add(std::move(t.subject.value), std::move(t.predicate.value), std::move(t.object.value));
        }
    }
    return out;
}

std::string TripleSet::to_ntriples(const OntologyIndex* index) const {
    std::string out;
    for (const auto& [s, p, o] : triples) out += fmt::format("<{}> <{}> <{}> .\n", s, p, o);
    for (const auto& [object, classes] : types) {
        std::set<std::string> closed = classes;
        if (index) {
            for (const auto& c : classes) {
                if (!index->has_class(c)) continue;
                for (const auto& [iri, def] : index->classes()) {
                    if (index->subtypeof(c, iri)) closed.insert(iri);
                }
            }
        }
        for (const auto& c : closed) out += fmt::format("<{}> <{}> <{}> .\n", object, rdf::kRdfType, c);
    }
    return out;
}

std::set<Binding> bgp_match(const PrototypeGraph& g, const TripleSet& data, const OntologyIndex& index) {
    std::vector<std::set<std::string_view>> domain(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        for (const auto& [object, asserted] : data.types) {
            if (type_matches(asserted, g.nodes[i].class_iri, index)) domain[i].insert(object);
        }
    }
    std::map<std::string, std::size_t, std::less<>> pos;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) pos.emplace(g.nodes[i].id, i);

    // Edges checked once both endpoints are bound, at the later of the two.
    std::vector<std::vector<const GraphEdge*>> checks(g.nodes.size());
    for (const auto& e : g.edges) {
        auto t = pos.find(e.tail);
        auto h = pos.find(e.head);
        if (t == pos.end() || h == pos.end()) throw InvalidArgument("bgp_match: edge references an undefined node");
        checks[std::max(t->second, h->second)].push_back(&e);
    }

    // Candidates for a node with a bound neighbour come from that neighbour's triples.
    std::map<std::pair<std::string_view, std::string_view>, std::vector<std::string_view>> by_subject, by_object;
    for (const auto& [s, p, o] : data.triples) {
        by_subject[{s, p}].push_back(o);
        by_object[{p, o}].push_back(s);
    }
    std::vector<const GraphEdge*> anchor(g.nodes.size(), nullptr);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        for (const GraphEdge* e : checks[i]) {
            if (pos.find(e->tail)->second != pos.find(e->head)->second) {
                anchor[i] = e;
                break;
            }
        }
    }

    std::set<Binding> out;
    std::vector<std::string_view> assigned(g.nodes.size());
    static const std::vector<std::string_view> kNone;
    auto recurse = [&](auto&& self, std::size_t i) -> void {
        if (i == g.nodes.size()) {
            Binding b;
            for (std::size_t j = 0; j < g.nodes.size(); ++j) b.emplace(g.nodes[j].id, std::string(assigned[j]));
            out.insert(std::move(b));
            return;
        }
        auto attempt = [&](std::string_view object) {
            assigned[i] = object;
            for (const GraphEdge* e : checks[i]) {
                std::string_view s = assigned[pos.find(e->tail)->second];
                std::string_view o = assigned[pos.find(e->head)->second];
                if (!data.triples.count({std::string(s), e->link_iri, std::string(o)})) return;
            }
            self(self, i + 1);
        };
        if (const GraphEdge* e = anchor[i]) {
            const std::vector<std::string_view>* cands = &kNone;
            if (pos.find(e->head)->second == i) {
                auto it = by_subject.find({assigned[pos.find(e->tail)->second], e->link_iri});
                if (it != by_subject.end()) cands = &it->second;
            } else {
                auto it = by_object.find({e->link_iri, assigned[pos.find(e->head)->second]});
                if (it != by_object.end()) cands = &it->second;
            }
            for (std::string_view object : *cands) {
                if (domain[i].count(object)) attempt(object);
            }
        } else {
            for (std::string_view object : domain[i]) attempt(object);
        }
    };
    recurse(recurse, 0);
    return out;
}

}  // namespace onset
