#include "support.hpp"

#include <algorithm>
#include <cstdio>
#include <unistd.h>
#include <fstream>
#include <mutex>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace onset::testing {

namespace {

nlohmann::json run_oracle(const nlohmann::json& request) {
    auto dir = std::filesystem::temp_directory_path();
    static std::mutex counter_mutex;
    static int counter = 0;
    std::filesystem::path input;
    {
        std::lock_guard lock(counter_mutex);
        input = dir / fmt::format("onset-oracle-{}-{}.json", ::getpid(), counter++);
    }
    {
        std::ofstream out(input);
        out << request.dump();
    }
    std::string cmd = fmt::format("\"{}\" \"{}\" < \"{}\"", ONSET_PYTHON, ONSET_SPARQL_ORACLE, input.string());
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("cannot start the SPARQL oracle");
    std::string output;
    char buf[65536];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) output.append(buf, n);
    int rc = ::pclose(pipe);
    std::filesystem::remove(input);
    if (rc != 0) throw std::runtime_error(fmt::format("SPARQL oracle exited with {}: {}", rc, output));
    return nlohmann::json::parse(output);
}

}  // namespace

std::string dbo(std::string_view local) { return std::string(kDbo) + std::string(local); }

std::filesystem::path source_dir() { return ONSET_SOURCE_DIR; }
std::filesystem::path data_dir() { return source_dir() / "data"; }

OntologyPtr dbpedia() {
    static OntologyPtr onto = load_ontology_file(data_dir() / "ontologies" / "dbpedia_excerpt.ttl",
                                                 data_dir() / "ontologies" / "dbpedia_counts.tsv",
                                                 SamplingMode::probabilistic);
    return onto;
}

OntologyPtr toy() {
    static OntologyPtr onto =
        load_ontology_file(data_dir() / "ontologies" / "toy.ttl", std::nullopt, SamplingMode::uniform);
    return onto;
}

PrototypeGraph figure1_graph() {
    PrototypeGraph g;
    g.stage = GraphStage::corrected;
    g.nodes = {{"person_1", dbo("Person")}, {"person_2", dbo("Person")}, {"university_1", dbo("University")}};
    g.edges = {{"person_1", dbo("child"), "person_2"},
               {"person_1", dbo("almaMater"), "university_1"},
               {"person_2", dbo("almaMater"), "university_1"}};
    return g;
}

std::string listing1_query() {
    return "SELECT DISTINCT ?person_1 ?person_2 ?university_1 WHERE {\n"
           "    ?person_1 <http://dbpedia.org/ontology/child> ?person_2.\n"
           "    ?person_1 <http://dbpedia.org/ontology/almaMater> ?university_1.\n"
           "    ?person_2 <http://dbpedia.org/ontology/almaMater> ?university_1.\n"
           "    ?person_1 a <http://dbpedia.org/ontology/Person>.\n"
           "    ?person_2 a <http://dbpedia.org/ontology/Person>.\n"
           "    ?university_1 a <http://dbpedia.org/ontology/University>.\n"
           "}";
}

TripleSet figure1_triples() {
    std::ifstream in(data_dir() / "fixtures" / "fig1_triples.ttl");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return TripleSet::from_turtle(text);
}

bool sparql_oracle_available() {
    static const bool ok = [] {
        try {
            auto r = run_oracle({{"mode", "parse"}, {"queries", {"SELECT * WHERE { ?s ?p ?o }"}}});
            return r["results"][0]["ok"].get<bool>();
        } catch (const std::exception&) {
            return false;
        }
    }();
    return ok;
}

std::vector<std::optional<std::string>> sparql_parse(const std::vector<std::string>& queries) {
    auto r = run_oracle({{"mode", "parse"}, {"queries", queries}});
    std::vector<std::optional<std::string>> out;
    for (const auto& item : r["results"]) {
        if (item["ok"].get<bool>()) out.emplace_back(std::nullopt);
        else out.emplace_back(item.value("error", std::string("unknown error")));
    }
    return out;
}

std::vector<PatternSet> sparql_patterns(const std::vector<std::string>& queries) {
    auto r = run_oracle({{"mode", "patterns"}, {"queries", queries}});
    std::vector<PatternSet> out;
    for (const auto& item : r["results"]) {
        PatternSet p;
        p.ok = item["ok"].get<bool>();
        if (!p.ok) {
            p.error = item.value("error", std::string());
        } else {
            p.projection = item["projection"].get<std::vector<std::string>>();
            for (const auto& t : item["triples"]) {
                p.triples.emplace(t[0].get<std::string>(), t[1].get<std::string>(), t[2].get<std::string>());
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<EvalResult> sparql_eval(const std::vector<std::pair<std::string, std::string>>& cases) {
    nlohmann::json req = {{"mode", "eval"}, {"cases", nlohmann::json::array()}};
    for (const auto& [data, query] : cases) req["cases"].push_back({{"data", data}, {"query", query}});
    auto r = run_oracle(req);
    std::vector<EvalResult> out;
    for (const auto& item : r["results"]) {
        EvalResult e;
        e.ok = item["ok"].get<bool>();
        if (!e.ok) {
            e.error = item.value("error", std::string());
        } else {
            e.vars = item["vars"].get<std::vector<std::string>>();
            for (const auto& row : item["rows"]) e.rows.push_back(row.get<std::map<std::string, std::string>>());
        }
        out.push_back(std::move(e));
    }
    return out;
}

namespace {

struct FlatGraph {
    std::vector<std::string> labels;
    std::vector<std::tuple<std::size_t, std::size_t, std::string>> edges;
};

FlatGraph flatten(const PrototypeGraph& g) {
    FlatGraph f;
    std::map<std::string, std::size_t> pos;
    for (const auto& n : g.nodes) {
        pos.emplace(n.id, f.labels.size());
        f.labels.push_back(n.class_iri);
    }
    for (const auto& e : g.edges) f.edges.emplace_back(pos.at(e.tail), pos.at(e.head), e.link_iri);
    return f;
}

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Cheapest matching of a's edges onto b's under node map `m`, by trying every option.
std::size_t best_edge_cost(const FlatGraph& a, const FlatGraph& b, const std::vector<std::size_t>& m, std::size_t i,
                           std::vector<bool>& used) {
    if (i == a.edges.size()) {
        std::size_t inserted = 0;
        for (bool u : used) inserted += u ? 0 : 1;
        return inserted;
    }
    const auto& [u, v, label] = a.edges[i];
    std::size_t best = 1 + best_edge_cost(a, b, m, i + 1, used);  // delete this edge
    if (m[u] != kNone && m[v] != kNone) {
        for (std::size_t j = 0; j < b.edges.size(); ++j) {
            const auto& [bu, bv, blabel] = b.edges[j];
            if (used[j] || bu != m[u] || bv != m[v]) continue;
            used[j] = true;
            std::size_t c = (label == blabel ? 0 : 1) + best_edge_cost(a, b, m, i + 1, used);
            used[j] = false;
            best = std::min(best, c);
        }
    }
    return best;
}

void enumerate_maps(const FlatGraph& a, const FlatGraph& b, std::size_t i, std::vector<std::size_t>& m,
                    std::vector<bool>& taken, std::size_t& best) {
    if (i == a.labels.size()) {
        std::size_t cost = 0;
        for (std::size_t k = 0; k < a.labels.size(); ++k) {
            cost += m[k] == kNone ? 1 : (a.labels[k] == b.labels[m[k]] ? 0 : 1);
        }
        for (bool t : taken) cost += t ? 0 : 1;
        std::vector<bool> used(b.edges.size(), false);
        cost += best_edge_cost(a, b, m, 0, used);
        best = std::min(best, cost);
        return;
    }
    m[i] = kNone;
    enumerate_maps(a, b, i + 1, m, taken, best);
    for (std::size_t j = 0; j < b.labels.size(); ++j) {
        if (taken[j]) continue;
        taken[j] = true;
        m[i] = j;
        enumerate_maps(a, b, i + 1, m, taken, best);
        taken[j] = false;
    }
    m[i] = kNone;
}

}  // namespace

std::size_t exhaustive_ged(const PrototypeGraph& a, const PrototypeGraph& b) {
    FlatGraph fa = flatten(a);
    FlatGraph fb = flatten(b);
    std::vector<std::size_t> m(fa.labels.size(), kNone);
    std::vector<bool> taken(fb.labels.size(), false);
    std::size_t best = static_cast<std::size_t>(-1);
    enumerate_maps(fa, fb, 0, m, taken, best);
    return best;
}

double multiset_f1(const std::vector<std::string>& predicted, const std::vector<std::string>& truth) {
    if (predicted.empty() && truth.empty()) return 1.0;
    std::map<std::string, std::pair<long, long>> counts;
    for (const auto& p : predicted) ++counts[p].first;
    for (const auto& t : truth) ++counts[t].second;
    long tp = 0, fp = 0, fn = 0;
    for (const auto& [item, c] : counts) {
        tp += std::min(c.first, c.second);
        fp += std::max(0L, c.first - c.second);
        fn += std::max(0L, c.second - c.first);
    }
    return 2.0 * tp / (2.0 * tp + fp + fn);
}

PrototypeGraph random_labeled_graph(TestRng& rng, std::size_t max_nodes, std::size_t max_edges,
                                    const std::vector<std::string>& classes, const std::vector<std::string>& links) {
    PrototypeGraph g;
    g.stage = GraphStage::corrected;
    std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_nodes)(rng);
    for (std::size_t i = 0; i < n; ++i) {
        g.nodes.push_back({fmt::format("v{}", i), classes[rng() % classes.size()]});
    }
    if (n == 0) return g;
    std::size_t m = std::uniform_int_distribution<std::size_t>(0, max_edges)(rng);
    for (std::size_t i = 0; i < m; ++i) {
        g.edges.push_back({g.nodes[rng() % n].id, links[rng() % links.size()], g.nodes[rng() % n].id});
    }
    return g;
}

PrototypeGraph random_ontology_graph(const OntologyIndex& index, TestRng& rng, std::size_t max_nodes,
                                     std::size_t max_edges) {
    std::vector<std::string> classes, links;
    for (const auto& [iri, c] : index.classes()) classes.push_back(iri);
    for (const auto& [iri, l] : index.links()) links.push_back(iri);
    auto g = random_labeled_graph(rng, max_nodes, max_edges, classes, links);
    g.stage = GraphStage::constrained;
    return g;
}

std::vector<std::string> sorted_classes(const PrototypeGraph& g) {
    std::vector<std::string> out;
    for (const auto& n : g.nodes) out.push_back(n.class_iri);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace onset::testing
