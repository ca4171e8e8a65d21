#pragma once

#include <string>

#include "onset/ontology.hpp"
#include "onset/prototype_graph.hpp"

namespace onset {

/// Deterministic English rendering of a schema-valid graph, one clause per edge:
/// "a {tail} that {link} a {head}", clauses joined by "and". A node's first mention
/// is "a {label}"; later mentions are "the same {label}" while that label names a
/// single mentioned node, otherwise "the {ordinal} {label}". Isolated nodes become
/// a bare "a {label}" clause. Labels are lowercased.
std::string template_query(const PrototypeGraph& g, const OntologyIndex& index);

}  // namespace onset
