#pragma once

#include "gigamae/graph.hpp"

namespace gigamae {

enum class NodeClass : uint8_t { N, E, F, B };

// Sampled masks plus the induced four-way node partition. A node is
// edge-masked if at least one incident edge is masked, feature-masked if its
// feature row is masked; class B when both, E/F when only one, N otherwise.
struct MaskPlan {
    std::vector<Edge> masked_edges;            // canonical, subset of graph edges
    std::vector<int> masked_feature_nodes;     // sorted
    std::vector<NodeClass> node_class;         // length |V|
    double edge_ratio = 0;
    double feature_ratio = 0;
    uint64_t seed = 0;
};

struct MaskedGraph {
    std::vector<Edge> adjacency_edges;  // graph.edges minus masked_edges
    MatD features;                      // masked rows zeroed
    const MaskPlan* plan = nullptr;
};

// Uniform sampling without replacement; mask counts are round-half-up of
// ratio * |E| and ratio * |V|. Deterministic per seed.
MaskPlan sample_masks(const Graph& g, double edge_ratio, double feature_ratio, uint64_t seed);

MaskedGraph apply_masks(const Graph& g, const MaskPlan& plan);

}  // namespace gigamae
