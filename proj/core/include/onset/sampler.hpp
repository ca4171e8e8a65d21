#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "onset/ontology.hpp"
#include "onset/prototype_graph.hpp"

namespace onset {

struct SamplerConfig {
    std::size_t top_k_links = 10;
    int depth = 2;
    std::size_t max_nodes = 3;  // at least 2
    SamplingMode mode = SamplingMode::probabilistic;
    std::uint64_t rng_seed = 0;
};

using Rng = std::mt19937_64;

/// A subtype of `class_iri` within cfg.depth levels, drawn in proportion to instance
/// counts (uniformly in uniform mode or when the subtree has no instances).
std::string downgrade_node(std::string_view class_iri, const OntologyIndex& index, const SamplerConfig& cfg,
                           Rng& rng);

/// Draws one link among the `top_k` most frequent of `links` (already count-ordered).
const LinkDef& draw_link(const std::vector<const LinkDef*>& links, const SamplerConfig& cfg, Rng& rng);

/// The seed link of a sample: a draw over the global top-k links.
const LinkDef& sample_seed_link(const OntologyIndex& index, const SamplerConfig& cfg, Rng& rng);

struct SampledGraph {
    PrototypeGraph graph;
    bool early_stop = false;  // no node had attachable links before max_nodes was reached
};

/// A tree-shaped, schema-valid graph grown from a seed link one attached node at a
/// time. Left attaches an incoming link to the chosen node, right an outgoing one.
/// Throws InvalidArgument when the ontology has no links or max_nodes < 2.
SampledGraph sample_graph(const OntologyIndex& index, const SamplerConfig& cfg, Rng& rng);

/// Convenience overload seeding the generator from cfg.rng_seed.
SampledGraph sample_graph(const OntologyIndex& index, const SamplerConfig& cfg);

}  // namespace onset
