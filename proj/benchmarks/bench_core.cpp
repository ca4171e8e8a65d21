#include <filesystem>
#include <random>

#include <benchmark/benchmark.h>

#include "onset/bgp.hpp"
#include "onset/embedder.hpp"
#include "onset/ged.hpp"
#include "onset/grammar.hpp"
#include "onset/ontology.hpp"
#include "onset/sampler.hpp"
#include "onset/semantic_index.hpp"

using namespace onset;

namespace {

std::filesystem::path data(const char* rel) { return std::filesystem::path(ONSET_SOURCE_DIR) / "data" / rel; }

OntologyPtr dbpedia() {
    static OntologyPtr onto = load_ontology_file(data("ontologies/dbpedia_excerpt.ttl"),
                                                 data("ontologies/dbpedia_counts.tsv"), SamplingMode::probabilistic);
    return onto;
}

PrototypeGraph sampled(std::size_t nodes, std::uint64_t seed) {
    return sample_graph(*dbpedia(), SamplerConfig{.max_nodes = nodes, .rng_seed = seed}).graph;
}

}  // namespace

static void BM_Ged(benchmark::State& state) {
    auto n = static_cast<std::size_t>(state.range(0));
    std::vector<std::pair<PrototypeGraph, PrototypeGraph>> pairs;
    for (std::uint64_t i = 0; i < 16; ++i) pairs.emplace_back(sampled(n, i), sampled(n, i + 100));
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& [a, b] = pairs[i++ % pairs.size()];
        benchmark::DoNotOptimize(graph_edit_distance(a, b));
    }
}
BENCHMARK(BM_Ged)->Arg(2)->Arg(3)->Arg(5)->Arg(7);

static void BM_Sampler(benchmark::State& state) {
    SamplerConfig cfg{.max_nodes = static_cast<std::size_t>(state.range(0))};
    Rng rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(sample_graph(*dbpedia(), cfg, rng));
}
BENCHMARK(BM_Sampler)->Arg(2)->Arg(7);

static void BM_RecognizeConstrained(benchmark::State& state) {
    auto onto = dbpedia();
    CandidateSet cands;
    for (const auto& [iri, c] : onto->classes()) cands.classes.push_back({iri, 1.0});
    for (const auto& [iri, l] : onto->links()) cands.links.push_back({iri, 1.0});
    auto spec = constrained_grammar(cands, *onto);
    auto text = graph_to_canonical_text(to_label_form(sampled(7, 3), *onto));
    for (auto _ : state) benchmark::DoNotOptimize(recognize(spec, text));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_RecognizeConstrained);

static void BM_TopK(benchmark::State& state) {
    auto sidx = SemanticIndex::build(dbpedia(), std::make_shared<HashingEmbedder>(512));
    for (auto _ : state) benchmark::DoNotOptimize(sidx.top_k("person who studied at a college", ItemKind::links, 8));
}
BENCHMARK(BM_TopK);

static void BM_BgpMatch(benchmark::State& state) {
    auto onto = dbpedia();
    TripleSet set;
    std::mt19937_64 rng(5);
    const std::string dbo = "http://dbpedia.org/ontology/";
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    auto obj = [](std::size_t i) { return "http://example.org/o" + std::to_string(i); };
    for (std::size_t i = 0; i < n; ++i) set.add_type(obj(i), dbo + (i % 4 == 0 ? "University" : "Person"));
    for (std::size_t i = 0; i < 3 * n; ++i) {
        set.add(obj(rng() % n), dbo + (rng() % 2 ? "child" : "almaMater"), obj(rng() % n));
    }
    PrototypeGraph g;
    g.stage = GraphStage::corrected;
    g.nodes = {{"p1", dbo + "Person"}, {"p2", dbo + "Person"}, {"u", dbo + "University"}};
    g.edges = {{"p1", dbo + "child", "p2"}, {"p1", dbo + "almaMater", "u"}, {"p2", dbo + "almaMater", "u"}};
    for (auto _ : state) benchmark::DoNotOptimize(bgp_match(g, set, *onto));
}
BENCHMARK(BM_BgpMatch)->Arg(100)->Arg(1000);
BENCHMARK_MAIN();
