#include "onset/scoring.hpp"

namespace onset {

std::vector<std::string> node_class_multiset(const PrototypeGraph& g) {
    std::vector<std::string> out;
    out.reserve(g.nodes.size());
    for (const auto& n : g.nodes) out.push_back(n.class_iri);
    return out;
}

std::vector<EdgeTriple> edge_triple_multiset(const PrototypeGraph& g) {
    std::vector<EdgeTriple> out;
    out.reserve(g.edges.size());
    for (const auto& e : g.edges) {
        const auto* tail = g.find_node(e.tail);
        const auto* head = g.find_node(e.head);
        out.emplace_back(tail ? tail->class_iri : std::string(), e.link_iri, head ? head->class_iri : std::string());
    }
    return out;
}

double f1_node(const PrototypeGraph& predicted, const PrototypeGraph& truth) {
    return f1_sets(node_class_multiset(predicted), node_class_multiset(truth));
}

double f1_rel(const PrototypeGraph& predicted, const PrototypeGraph& truth) {
    return f1_sets(edge_triple_multiset(predicted), edge_triple_multiset(truth));
}

PrototypeGraph align_raw_graph(const PrototypeGraph& raw, const OntologyIndex& index) {
    PrototypeGraph out = raw;
    for (auto& n : out.nodes) {
        auto hits = index.classes_with_label(n.class_iri);
        n.class_iri = hits.empty() ? "unmatched:" + n.class_iri : hits.front();
    }
    for (auto& e : out.edges) {
        auto hits = index.links_with_label(e.link_iri);
        e.link_iri = hits.empty() ? "unmatched:" + e.link_iri : hits.front();
    }
    return out;
}

}  // namespace onset
