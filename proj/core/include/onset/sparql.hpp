#pragma once

#include <string>
#include <vector>

#include "onset/prototype_graph.hpp"

namespace onset {

/// Compiles a corrected or sampled graph to a SELECT DISTINCT basic graph pattern:
/// one triple pattern per edge followed by one type pattern per node, in input order.
/// Throws InvalidArgument for any other stage.
std::string to_sparql(const PrototypeGraph& g);

/// `query` with a LIMIT clause appended (replacing none already present).
std::string with_limit(const std::string& query, std::size_t limit);

/// Query variable of each node, in node order, made unique with "_2", "_3" suffixes.
std::vector<std::string> sparql_variables(const PrototypeGraph& g);

/// A SPARQL VARNAME derived from a node id; identity for ids that already qualify.
std::string sparql_variable(std::string_view node_id);

}  // namespace onset
