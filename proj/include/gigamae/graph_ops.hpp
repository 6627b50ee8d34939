#pragma once

#include "gigamae/graph.hpp"
#include "gigamae/tape.hpp"

namespace gigamae {

// Symmetric CSR over the given undirected edges, self-loops added.
inline std::shared_ptr<AdjCsr> build_adj_csr(const std::vector<Edge>& edges, int n) {
    auto adj = std::make_shared<AdjCsr>();
    adj->n = n;
    std::vector<int> deg(n, 1);  // self-loop
    for (auto [i, j] : edges) {
        ++deg[i];
        ++deg[j];
    }
    adj->offs.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) adj->offs[i + 1] = adj->offs[i] + deg[i];
    adj->nbrs.resize(adj->offs.back());
    std::vector<int> cur(adj->offs.begin(), adj->offs.end() - 1);
    for (int i = 0; i < n; ++i) adj->nbrs[cur[i]++] = i;
    for (auto [i, j] : edges) {
        adj->nbrs[cur[i]++] = j;
        adj->nbrs[cur[j]++] = i;
    }
    return adj;
}

// D^-1/2 (A + I) D^-1/2 in CSR form.
inline std::shared_ptr<NormAdj> build_norm_adj(const std::vector<Edge>& edges, int n) {
    auto csr = build_adj_csr(edges, n);
    auto adj = std::make_shared<NormAdj>();
    adj->n = n;
    adj->offs = csr->offs;
    adj->nbrs = csr->nbrs;
    adj->w.resize(adj->nbrs.size());
    std::vector<double> dinv(n);
    for (int i = 0; i < n; ++i) dinv[i] = 1.0 / std::sqrt(double(csr->degree(i)));
    for (int i = 0; i < n; ++i)
        for (int k = adj->offs[i]; k < adj->offs[i + 1]; ++k)
            adj->w[k] = dinv[i] * dinv[adj->nbrs[k]];
    return adj;
}

}  // namespace gigamae
