#pragma once

#include "gigamae/tensor.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gigamae {

using Edge = std::pair<int, int>;  // canonical: first < second

// Undirected graph with dense features and optional labels. Immutable after
// construction; no self-loops and no duplicate edges in the stored list.
struct Graph {
    int num_nodes = 0;
    std::vector<Edge> edges;
    MatD features;                       // num_nodes x D
    std::optional<std::vector<int>> labels;
    std::optional<int> num_classes;

    int feature_dim() const { return features.cols; }
    bool has_edge(int i, int j) const;
    void validate() const;
};

// Canonicalizes (i<j), drops duplicates, rejects self-loops / out-of-range.
std::vector<Edge> canonicalize_edges(std::vector<Edge> edges, int num_nodes);

Graph load_graph(const std::string& features_path, const std::string& edges_path,
                 const std::string& labels_path = "");

struct EdgeSplit {
    std::vector<Edge> train_edges, valid_edges, test_edges;
    std::vector<Edge> valid_neg, test_neg;
    uint64_t seed = 0;
};

// fractions = (train, valid, test), positive, summing to 1 (tol 1e-9).
// valid/test sizes are floor-rounded; the remainder goes to train.
EdgeSplit split_edges(const Graph& g, const std::array<double, 3>& fractions, uint64_t seed);

std::vector<Edge> sample_negative_edges(const Graph& g, size_t n, uint64_t seed,
                                        const std::vector<Edge>& exclude = {});

// Graph restricted to a subset of edges (same nodes/features/labels).
Graph subgraph_with_edges(const Graph& g, std::vector<Edge> edges);

void write_edge_split(const std::string& path, const EdgeSplit& split);
EdgeSplit read_edge_split(const std::string& path);

// Named dense matrix cached on disk as float32 (see embedding_io.cpp for the
// binary layout).
struct EmbeddingMatrix {
    std::string name;
    int rows = 0;
    int cols = 0;
    std::vector<float> data;  // row-major
    std::map<std::string, std::string> meta;  // extra .meta entries

    float& at(int i, int j) { return data[size_t(i) * cols + j]; }
    float at(int i, int j) const { return data[size_t(i) * cols + j]; }

    MatD to_mat() const;
    static EmbeddingMatrix from_mat(const std::string& name, const MatD& m);
};

void write_embedding(const std::string& path, const EmbeddingMatrix& m);
EmbeddingMatrix read_embedding(const std::string& path);

}  // namespace gigamae
