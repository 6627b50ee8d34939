#include "gigamae/augment.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace gigamae {

MaskPlan sample_masks(const Graph& g, double edge_ratio, double feature_ratio, uint64_t seed) {
    if (edge_ratio < 0 || edge_ratio > 1 || feature_ratio < 0 || feature_ratio > 1)
        throw std::invalid_argument("sample_masks: ratios must be in [0,1]");

    MaskPlan plan;
    plan.edge_ratio = edge_ratio;
    plan.feature_ratio = feature_ratio;
    plan.seed = seed;

    size_t n_edges = size_t(std::floor(edge_ratio * double(g.edges.size()) + 0.5));
    size_t n_feat = size_t(std::floor(feature_ratio * double(g.num_nodes) + 0.5));

    std::mt19937_64 rng(mix_seed(seed, 10));
    std::vector<Edge> edges = g.edges;
    std::shuffle(edges.begin(), edges.end(), rng);
    plan.masked_edges.assign(edges.begin(), edges.begin() + n_edges);
    std::sort(plan.masked_edges.begin(), plan.masked_edges.end());

    std::vector<int> nodes(g.num_nodes);
    for (int i = 0; i < g.num_nodes; ++i) nodes[i] = i;
    std::mt19937_64 rng2(mix_seed(seed, 11));
    std::shuffle(nodes.begin(), nodes.end(), rng2);
    plan.masked_feature_nodes.assign(nodes.begin(), nodes.begin() + n_feat);
    std::sort(plan.masked_feature_nodes.begin(), plan.masked_feature_nodes.end());

    std::vector<uint8_t> edge_masked(g.num_nodes, 0), feat_masked(g.num_nodes, 0);
    for (auto [i, j] : plan.masked_edges) edge_masked[i] = edge_masked[j] = 1;
    for (int i : plan.masked_feature_nodes) feat_masked[i] = 1;
    plan.node_class.resize(g.num_nodes);
    for (int i = 0; i < g.num_nodes; ++i) {
        if (edge_masked[i] && feat_masked[i]) plan.node_class[i] = NodeClass::B;
        else if (edge_masked[i]) plan.node_class[i] = NodeClass::E;
        else if (feat_masked[i]) plan.node_class[i] = NodeClass::F;
        else plan.node_class[i] = NodeClass::N;
    }
    return plan;
}

MaskedGraph apply_masks(const Graph& g, const MaskPlan& plan) {
    if (int(plan.node_class.size()) != g.num_nodes)
        throw std::invalid_argument("apply_masks: plan/graph node count mismatch");
    for (auto [i, j] : plan.masked_edges)
        if (!g.has_edge(i, j)) throw std::invalid_argument("apply_masks: masked edge not in graph");

    MaskedGraph mg;
    mg.plan = &plan;
    std::set<Edge> masked(plan.masked_edges.begin(), plan.masked_edges.end());
    mg.adjacency_edges.reserve(g.edges.size() - masked.size());
    for (const auto& e : g.edges)
        if (!masked.count(e)) mg.adjacency_edges.push_back(e);

    mg.features = g.features;
    for (int i : plan.masked_feature_nodes)
        for (int j = 0; j < mg.features.cols; ++j) mg.features(i, j) = 0.0;
    return mg;
}

}  // namespace gigamae
