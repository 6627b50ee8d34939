#pragma once

#include "gigamae/graph.hpp"

namespace gigamae {

// ---- PCA (attribute target) ----

struct PcaConfig {
    double ratio = 0.5;  // output dim = round(ratio * D), at least 1
    bool center = true;
};

// Projects the column-centered feature matrix onto its top-k principal
// directions; deterministic up to the canonical column signs.
EmbeddingMatrix pca_embed(const MatD& features, const PcaConfig& cfg);

// ---- node2vec (structural target) ----

struct Node2vecConfig {
    int dim = 256;
    int walk_length = 5;     // nodes per walk, including the start
    int context_size = 5;
    int walks_per_node = 5;
    int epochs = 20;
    double p = 1.0;          // return bias
    double q = 1.0;          // in-out bias
    int negatives_per_positive = 5;
    double learning_rate = 0.025;
    uint64_t seed = 0;
};

// Biased second-order random walks + skip-gram with negative sampling
// (degree^0.75 unigram negatives). Deterministic per seed.
EmbeddingMatrix node2vec_embed(const Graph& g, const Node2vecConfig& cfg);

// Walk generation alone, exposed for tests.
std::vector<std::vector<int>> node2vec_walks(const Graph& g, const Node2vecConfig& cfg);

// ---- GAE (hybrid target, feature-flagged) ----

struct GaeConfig {
    int hidden_dim = 32;
    int out_dim = 16;
    int epochs = 200;
    double learning_rate = 0.01;
    uint64_t seed = 0;
};

// Two-layer graph-convolution encoder with inner-product edge decoder trained
// under BCE on edges vs sampled non-edges.
EmbeddingMatrix gae_embed(const Graph& g, const GaeConfig& cfg);

}  // namespace gigamae
