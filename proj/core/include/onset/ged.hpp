#pragma once

#include <cstddef>

#include "onset/prototype_graph.hpp"

namespace onset {

inline constexpr std::size_t kGedNodeBudget = 10;

/// Exact graph edit distance with unit costs: node and edge insertion, deletion and
/// label substitution. Edges are only matched between matched endpoints.
/// Throws InvalidArgument when either graph exceeds kGedNodeBudget nodes or has
/// dangling edges.
std::size_t graph_edit_distance(const PrototypeGraph& a, const PrototypeGraph& b);

/// 1 − GED / (max node count + max edge count), clamped to [0, 1]; 1 for two empty graphs.
double ged_score(const PrototypeGraph& a, const PrototypeGraph& b);

}  // namespace onset
