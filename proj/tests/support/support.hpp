#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "onset/bgp.hpp"
#include "onset/ontology.hpp"
#include "onset/prototype_graph.hpp"

namespace onset::testing {

inline constexpr const char* kDbo = "http://dbpedia.org/ontology/";

std::string dbo(std::string_view local);

std::filesystem::path source_dir();
std::filesystem::path data_dir();

/// DBpedia excerpt with its count table, probabilistic sampling. Loaded once.
OntologyPtr dbpedia();
/// Person / Organisation / University / Country with almaMater and child.
OntologyPtr toy();

/// person_1 -child-> person_2, both -almaMater-> university_1; stage corrected.
PrototypeGraph figure1_graph();
std::string listing1_query();
TripleSet figure1_triples();

// ---- reference SPARQL engine (rdflib, out of process) ----

bool sparql_oracle_available();

/// Parse status per query: nullopt when the query parses, else the parser message.
std::vector<std::optional<std::string>> sparql_parse(const std::vector<std::string>& queries);

struct PatternSet {
    bool ok = false;
    std::string error;
    std::vector<std::string> projection;
    std::multiset<std::tuple<std::string, std::string, std::string>> triples;
};
std::vector<PatternSet> sparql_patterns(const std::vector<std::string>& queries);

struct EvalResult {
    bool ok = false;
    std::string error;
    std::vector<std::string> vars;
    std::vector<std::map<std::string, std::string>> rows;
};
/// (N-Triples data, query) pairs evaluated by the reference engine.
std::vector<EvalResult> sparql_eval(const std::vector<std::pair<std::string, std::string>>& cases);

// ---- independent scoring oracles ----

/// Exhaustive edit-path search: every injective partial node map, then every edge
/// matching consistent with it. Exponential; for graphs of a handful of nodes.
std::size_t exhaustive_ged(const PrototypeGraph& a, const PrototypeGraph& b);

/// 2TP / (2TP + FP + FN) from explicit per-element counts; both empty → 1.
double multiset_f1(const std::vector<std::string>& predicted, const std::vector<std::string>& truth);

// ---- generators ----

using TestRng = std::mt19937_64;

/// Random graph over arbitrary labels, self loops and parallel edges allowed. Stage corrected.
PrototypeGraph random_labeled_graph(TestRng& rng, std::size_t max_nodes, std::size_t max_edges,
                                    const std::vector<std::string>& classes, const std::vector<std::string>& links);

/// Random graph with ontology classes and links but arbitrary endpoints. Stage constrained.
PrototypeGraph random_ontology_graph(const OntologyIndex& index, TestRng& rng, std::size_t max_nodes,
                                     std::size_t max_edges);

/// Node class multiset of a graph, sorted.
std::vector<std::string> sorted_classes(const PrototypeGraph& g);

}  // namespace onset::testing
