#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "onset/ontology.hpp"
#include "onset/prototype_graph.hpp"

namespace onset {

/// Instance data: predicate triples between objects plus their type assertions.
/// Objects are iris.
struct TripleSet {
    std::set<std::tuple<std::string, std::string, std::string>> triples;  // subject, predicate, object
    std::map<std::string, std::set<std::string>> types;                   // object → asserted classes

    void add(std::string s, std::string p, std::string o);
    void add_type(std::string object, std::string class_iri);

    /// rdf:type statements become type assertions; other iri-valued triples are kept.
    static TripleSet from_turtle(std::string_view text);
    /// N-Triples with every type assertion expanded to all supertypes known to `index`,
    /// for engines without subclass reasoning.
    std::string to_ntriples(const OntologyIndex* index = nullptr) const;
};

using Binding = std::map<std::string, std::string>;  // node id → object

/// Every assignment of objects to nodes where each object has a type that is a subtype
/// of its node's class and each edge is backed by a triple. Assignments need not be
/// injective. An empty graph has the single empty binding.
std::set<Binding> bgp_match(const PrototypeGraph& g, const TripleSet& data, const OntologyIndex& index);

}  // namespace onset
