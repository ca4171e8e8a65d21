#include "onset/ged.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "onset/error.hpp"

namespace onset {

namespace {

constexpr int kUnassigned = -2;
constexpr int kDeleted = -1;

struct Indexed {
    std::vector<std::string> labels;
    struct Edge {
        int u;
        int v;
        std::string label;
    };
    std::vector<Edge> edges;
    std::vector<std::vector<int>> incident;  // edge indices per node
};

Indexed index_graph(const PrototypeGraph& g) {
    if (g.nodes.size() > kGedNodeBudget) {
        throw InvalidArgument(fmt::format("GED is limited to {} nodes per graph, got {}", kGedNodeBudget, g.nodes.size()));
    }
    Indexed out;
    std::map<std::string, int, std::less<>> pos;
    for (const auto& n : g.nodes) {
        pos.emplace(n.id, static_cast<int>(out.labels.size()));
        out.labels.push_back(n.class_iri);
    }
    out.incident.resize(out.labels.size());
    for (const auto& e : g.edges) {
        auto t = pos.find(e.tail);
        auto h = pos.find(e.head);
        if (t == pos.end() || h == pos.end()) throw InvalidArgument("GED: edge references an undefined node");
        int idx = static_cast<int>(out.edges.size());
        out.edges.push_back({t->second, h->second, e.link_iri});
        out.incident[t->second].push_back(idx);
        if (h->second != t->second) out.incident[h->second].push_back(idx);
    }
    return out;
}

// max(|x|, |y|) - |x ∩ y| over label multisets: the cheapest way to turn one bag into the other.
std::size_t bag_cost(std::vector<std::string> x, std::vector<std::string> y) {
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::size_t common = 0;
    for (std::size_t i = 0, j = 0; i < x.size() && j < y.size();) {
        if (x[i] == y[j]) {
            ++common, ++i, ++j;
        } else if (x[i] < y[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return std::max(x.size(), y.size()) - common;
}

class Solver {
public:
    Solver(const Indexed& a, const Indexed& b) : a_(a), b_(b) {
        order_.resize(a_.labels.size());
        std::iota(order_.begin(), order_.end(), 0);
        std::stable_sort(order_.begin(), order_.end(),
                         [&](int x, int y) { return a_.incident[x].size() > a_.incident[y].size(); });
        map_.assign(a_.labels.size(), kUnassigned);
        used_.assign(b_.labels.size(), false);
        best_ = a_.labels.size() + a_.edges.size() + b_.labels.size() + b_.edges.size();
    }

    std::size_t solve() {
        search(0, 0);
        return best_;
    }

private:
    // Cost of edges between node a_node (just assigned) and previously assigned nodes,
    // including its self loops.
    std::size_t edge_cost_for(int a_node) const {
        std::map<std::pair<int, int>, std::vector<std::string>> bag_a;
        for (int ei : a_.incident[a_node]) {
            const auto& e = a_.edges[ei];
            int other = e.u == a_node ? e.v : e.u;
            if (map_[other] == kUnassigned) continue;
            bag_a[{e.u, e.v}].push_back(e.label);
        }
        std::size_t cost = 0;
        int image = map_[a_node];
        for (auto it = bag_a.begin(); it != bag_a.end();) {
            if (map_[it->first.first] == kDeleted || map_[it->first.second] == kDeleted) {
                cost += it->second.size();
                it = bag_a.erase(it);
            } else {
                ++it;
            }
        }
        if (image == kDeleted) return cost;
        std::map<std::pair<int, int>, std::vector<std::string>> bag_b;
        for (int ei : b_.incident[image]) {
            const auto& e = b_.edges[ei];
            int other = e.u == image ? e.v : e.u;
            if (other != image && !used_[other]) continue;
            bag_b[{e.u, e.v}].push_back(e.label);
        }
        // Images of assigned a-nodes, to map b pairs back.
        std::map<int, int> preimage;
        for (std::size_t i = 0; i < map_.size(); ++i) {
            if (map_[i] >= 0) preimage[map_[i]] = static_cast<int>(i);
        }
        std::map<std::pair<int, int>, std::pair<std::vector<std::string>, std::vector<std::string>>> pairs;
        for (auto& [key, labels] : bag_a) {
            pairs[{map_[key.first], map_[key.second]}].first = labels;
        }
        for (auto& [key, labels] : bag_b) {
            if (!preimage.count(key.first) || !preimage.count(key.second)) continue;
            pairs[key].second = labels;
        }
        for (auto& [key, bags] : pairs) cost += bag_cost(bags.first, bags.second);
        return cost;
    }

    // Lower bound for the rest: node bag difference plus undecided edge bag difference.
    std::size_t bound(std::size_t depth) const {
        std::vector<std::string> na, nb, ea, eb;
        for (std::size_t i = depth; i < order_.size(); ++i) na.push_back(a_.labels[order_[i]]);
        for (std::size_t j = 0; j < b_.labels.size(); ++j) {
            if (!used_[j]) nb.push_back(b_.labels[j]);
        }
        for (const auto& e : a_.edges) {
            if (map_[e.u] == kUnassigned || map_[e.v] == kUnassigned) ea.push_back(e.label);
        }
        for (const auto& e : b_.edges) {
            if (!used_[e.u] || !used_[e.v]) eb.push_back(e.label);
        }
        return bag_cost(na, nb) + bag_cost(ea, eb);
    }

    void search(std::size_t depth, std::size_t cost) {
        if (cost + bound(depth) >= best_) return;
        if (depth == order_.size()) {
            // Unmatched b nodes and edges touching them are insertions.
            std::size_t extra = 0;
            for (std::size_t j = 0; j < b_.labels.size(); ++j) extra += used_[j] ? 0 : 1;
            for (const auto& e : b_.edges) extra += (used_[e.u] && used_[e.v]) ? 0 : 1;
            best_ = std::min(best_, cost + extra);
            return;
        }
        int node = order_[depth];
        const std::string& label = a_.labels[node];
        std::vector<int> options;
        for (int j = 0; j < static_cast<int>(b_.labels.size()); ++j) {
            if (!used_[j] && b_.labels[j] == label) options.push_back(j);
        }
        for (int j = 0; j < static_cast<int>(b_.labels.size()); ++j) {
            if (!used_[j] && b_.labels[j] != label) options.push_back(j);
        }
        options.push_back(kDeleted);
        for (int choice : options) {
            map_[node] = choice;
            if (choice >= 0) used_[choice] = true;
            std::size_t step = choice == kDeleted ? 1 : (b_.labels[choice] == label ? 0 : 1);
            search(depth + 1, cost + step + edge_cost_for(node));
            if (choice >= 0) used_[choice] = false;
            map_[node] = kUnassigned;
        }
    }

    const Indexed& a_;
    const Indexed& b_;
    std::vector<int> order_;
    std::vector<int> map_;
    std::vector<bool> used_;
    std::size_t best_;
};

}  // namespace

std::size_t graph_edit_distance(const PrototypeGraph& a, const PrototypeGraph& b) {
    Indexed ia = index_graph(a);
    Indexed ib = index_graph(b);
    return Solver(ia, ib).solve();
}

double ged_score(const PrototypeGraph& a, const PrototypeGraph& b) {
    std::size_t denom = std::max(a.nodes.size(), b.nodes.size()) + std::max(a.edges.size(), b.edges.size());
    if (denom == 0) return 1.0;
    double s = 1.0 - static_cast<double>(graph_edit_distance(a, b)) / static_cast<double>(denom);
    return std::clamp(s, 0.0, 1.0);
}

}  // namespace onset
