#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "onset/prototype_graph.hpp"

namespace onset {

/// F1 = 2TP / (2TP + FP + FN) under multiset semantics. Both empty → 1, one empty → 0.
template <class T>
double f1_sets(const std::vector<T>& predicted, const std::vector<T>& truth) {
    if (predicted.empty() && truth.empty()) return 1.0;
    std::map<T, long> balance;
    for (const auto& p : predicted) ++balance[p];
    long tp = 0;
    for (const auto& t : truth) {
        auto it = balance.find(t);
        if (it != balance.end() && it->second > 0) {
            --it->second;
            ++tp;
        }
    }
    long fp = static_cast<long>(predicted.size()) - tp;
    long fn = static_cast<long>(truth.size()) - tp;
    return 2.0 * tp / (2.0 * tp + fp + fn);
}

using EdgeTriple = std::tuple<std::string, std::string, std::string>;  // tail class, link, head class

std::vector<std::string> node_class_multiset(const PrototypeGraph& g);
std::vector<EdgeTriple> edge_triple_multiset(const PrototypeGraph& g);

double f1_node(const PrototypeGraph& predicted, const PrototypeGraph& truth);
double f1_rel(const PrototypeGraph& predicted, const PrototypeGraph& truth);

/// Raw-stage graph with labels replaced by iris on a case-insensitive exact label
/// match; unmatched labels become "unmatched:{label}" and never equal an iri.
PrototypeGraph align_raw_graph(const PrototypeGraph& raw, const OntologyIndex& index);

}  // namespace onset
