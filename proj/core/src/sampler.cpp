#include "onset/sampler.hpp"

#include <algorithm>

#include "onset/error.hpp"

namespace onset {

namespace {

template <class Weight>
std::size_t weighted_pick(const std::vector<Weight>& weights, bool uniform, Rng& rng) {
    double total = 0.0;
    for (auto w : weights) total += static_cast<double>(w);
    if (uniform || total <= 0.0) {
        return std::uniform_int_distribution<std::size_t>(0, weights.size() - 1)(rng);
    }
    std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
    return dist(rng);
}

}  // namespace

std::string downgrade_node(std::string_view class_iri, const OntologyIndex& index, const SamplerConfig& cfg,
                           Rng& rng) {
    auto subtree = index.subtypes_within(class_iri, cfg.depth);  // throws for unknown classes
    std::vector<std::uint64_t> counts;
    counts.reserve(subtree.size());
    for (const auto& iri : subtree) counts.push_back(index.class_def(iri).instance_count);
    return subtree[weighted_pick(counts, cfg.mode == SamplingMode::uniform, rng)];
}

const LinkDef& draw_link(const std::vector<const LinkDef*>& links, const SamplerConfig& cfg, Rng& rng) {
    if (links.empty()) throw InvalidArgument("no links to draw from");
    std::size_t n = std::min(links.size(), std::max<std::size_t>(cfg.top_k_links, 1));
    std::vector<std::uint64_t> counts;
    for (std::size_t i = 0; i < n; ++i) counts.push_back(links[i]->instance_count);
    return *links[weighted_pick(counts, cfg.mode == SamplingMode::uniform, rng)];
}

const LinkDef& sample_seed_link(const OntologyIndex& index, const SamplerConfig& cfg, Rng& rng) {
    std::vector<const LinkDef*> links;
    for (const auto& [iri, link] : index.links()) links.push_back(&link);
    if (links.empty()) throw InvalidArgument("ontology has no links to sample from");
    std::stable_sort(links.begin(), links.end(),
                     [](const LinkDef* a, const LinkDef* b) { return a->instance_count > b->instance_count; });
    return draw_link(links, cfg, rng);
}

SampledGraph sample_graph(const OntologyIndex& index, const SamplerConfig& cfg, Rng& rng) {
    if (cfg.max_nodes < 2) throw InvalidArgument("max_nodes must be at least 2");
    if (cfg.top_k_links == 0) throw InvalidArgument("top_k_links must be positive");
    if (cfg.depth < 1) throw InvalidArgument("depth must be positive");

    SampledGraph out;
    PrototypeGraph& g = out.graph;
    g.stage = GraphStage::sampled;
    auto add_node = [&](std::string class_iri) {
        g.nodes.push_back({"n" + std::to_string(g.nodes.size()), std::move(class_iri)});
        return g.nodes.back().id;
    };

    const LinkDef& seed = sample_seed_link(index, cfg, rng);
    std::string tail = add_node(downgrade_node(seed.from_type, index, cfg, rng));
    std::string head = add_node(downgrade_node(seed.to_type, index, cfg, rng));
    g.edges.push_back({tail, seed.iri, head});

    std::uniform_int_distribution<int> side_dist(0, 1);
    while (g.nodes.size() < cfg.max_nodes) {
        std::size_t pick = std::uniform_int_distribution<std::size_t>(0, g.nodes.size() - 1)(rng);
        auto side = side_dist(rng) == 0 ? LinkSide::incoming : LinkSide::outgoing;
        auto links = index.links_for(g.nodes[pick].class_iri, side);
        if (links.empty()) {
            // Redraw unless no (node, side) pair can grow the graph at all.
            bool any = std::any_of(g.nodes.begin(), g.nodes.end(), [&](const GraphNode& n) {
                return !index.links_for(n.class_iri, LinkSide::incoming).empty() ||
                       !index.links_for(n.class_iri, LinkSide::outgoing).empty();
            });
            if (!any) {
                out.early_stop = true;
                break;
            }
            continue;
        }
        const LinkDef& link = draw_link(links, cfg, rng);
        std::string anchor = g.nodes[pick].id;
        if (side == LinkSide::outgoing) {
            std::string added = add_node(downgrade_node(link.to_type, index, cfg, rng));
            g.edges.push_back({anchor, link.iri, added});
        } else {
            std::string added = add_node(downgrade_node(link.from_type, index, cfg, rng));
            g.edges.push_back({added, link.iri, anchor});
        }
    }
    out.graph = with_canonical_ids(g, index);
    out.graph.stage = GraphStage::sampled;
    return out;
}

SampledGraph sample_graph(const OntologyIndex& index, const SamplerConfig& cfg) {
    Rng rng(cfg.rng_seed);
    return sample_graph(index, cfg, rng);
}

}  // namespace onset
