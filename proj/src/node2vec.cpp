#include "gigamae/targets.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gigamae {

namespace {

struct Adjacency {
    std::vector<int> offs, nbrs;  // neighbor lists, sorted

    bool connected(int a, int b) const {
        auto lo = nbrs.begin() + offs[a], hi = nbrs.begin() + offs[a + 1];
        return std::binary_search(lo, hi, b);
    }
};

Adjacency build_adjacency(const Graph& g) {
    Adjacency adj;
    std::vector<int> deg(g.num_nodes, 0);
    for (auto [i, j] : g.edges) {
        ++deg[i];
        ++deg[j];
    }
    adj.offs.assign(g.num_nodes + 1, 0);
    for (int i = 0; i < g.num_nodes; ++i) adj.offs[i + 1] = adj.offs[i] + deg[i];
    adj.nbrs.resize(adj.offs.back());
    std::vector<int> cur(adj.offs.begin(), adj.offs.end() - 1);
    for (auto [i, j] : g.edges) {
        adj.nbrs[cur[i]++] = j;
        adj.nbrs[cur[j]++] = i;
    }
    for (int i = 0; i < g.num_nodes; ++i)
        std::sort(adj.nbrs.begin() + adj.offs[i], adj.nbrs.begin() + adj.offs[i + 1]);
    return adj;
}

}  // namespace

std::vector<std::vector<int>> node2vec_walks(const Graph& g, const Node2vecConfig& cfg) {
    if (cfg.p <= 0 || cfg.q <= 0) throw std::invalid_argument("node2vec: p and q must be positive");
    if (cfg.context_size > cfg.walk_length)
        throw std::invalid_argument("node2vec: context_size must not exceed walk_length");
    Adjacency adj = build_adjacency(g);
    std::vector<std::vector<int>> walks;
    walks.reserve(size_t(g.num_nodes) * cfg.walks_per_node);
    std::vector<double> w;
    for (int start = 0; start < g.num_nodes; ++start) {
        std::mt19937_64 rng(mix_seed(cfg.seed, 1000 + uint64_t(start)));
        for (int rep = 0; rep < cfg.walks_per_node; ++rep) {
            std::vector<int> walk{start};
            while (int(walk.size()) < cfg.walk_length) {
                int cur = walk.back();
                int b = adj.offs[cur], e = adj.offs[cur + 1];
                if (b == e) break;  // dead end
                int next;
                if (walk.size() == 1) {
                    std::uniform_int_distribution<int> pick(0, e - b - 1);
                    next = adj.nbrs[b + pick(rng)];
                } else {
                    int prev = walk[walk.size() - 2];
                    w.assign(e - b, 0.0);
                    double total = 0;
                    for (int k = b; k < e; ++k) {
                        int x = adj.nbrs[k];
                        double wt = (x == prev) ? 1.0 / cfg.p
                                  : adj.connected(prev, x) ? 1.0
                                  : 1.0 / cfg.q;
                        w[k - b] = wt;
                        total += wt;
                    }
                    std::uniform_real_distribution<double> u(0.0, total);
                    double r = u(rng);
                    int k = b;
                    for (; k < e - 1; ++k) {
                        r -= w[k - b];
                        if (r <= 0) break;
                    }
                    next = adj.nbrs[k];
                }
                walk.push_back(next);
            }
            walks.push_back(std::move(walk));
        }
    }
    return walks;
}

EmbeddingMatrix node2vec_embed(const Graph& g, const Node2vecConfig& cfg) {
    if (g.edges.empty()) throw std::invalid_argument("node2vec: graph has no edges");
    auto walks = node2vec_walks(g, cfg);

    int n = g.num_nodes, dim = cfg.dim;
    std::mt19937_64 rng(mix_seed(cfg.seed, 42));
    std::uniform_real_distribution<float> init(-0.5f / dim, 0.5f / dim);
    std::vector<float> emb(size_t(n) * dim), ctx(size_t(n) * dim, 0.0f);
    for (auto& v : emb) v = init(rng);

    // degree^0.75 unigram table for negatives
    std::vector<double> cum(n);
    std::vector<int> deg(n, 0);
    for (auto [i, j] : g.edges) {
        ++deg[i];
        ++deg[j];
    }
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        acc += std::pow(double(deg[i]), 0.75);
        cum[i] = acc;
    }
    auto sample_neg = [&](std::mt19937_64& r) {
        std::uniform_real_distribution<double> u(0.0, acc);
        return int(std::lower_bound(cum.begin(), cum.end(), u(r)) - cum.begin());
    };

    // positive pairs from sliding windows
    std::vector<std::pair<int, int>> pairs;
    for (const auto& walk : walks)
        for (size_t i = 0; i < walk.size(); ++i)
            for (size_t j = std::max<size_t>(i >= size_t(cfg.context_size - 1) ? i - (cfg.context_size - 1) : 0, 0);
                 j < std::min(walk.size(), i + cfg.context_size); ++j)
                if (j != i) pairs.emplace_back(walk[i], walk[j]);
    if (pairs.empty()) throw std::invalid_argument("node2vec: no training pairs (walks too short)");

    std::mt19937_64 train_rng(mix_seed(cfg.seed, 43));
    std::vector<float> grad_u(dim);
    size_t total_steps = pairs.size() * size_t(cfg.epochs);
    size_t step = 0;
    std::vector<uint32_t> order(pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = uint32_t(i);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), train_rng);
        for (uint32_t pi : order) {
            float lr = float(cfg.learning_rate * std::max(0.1, 1.0 - double(step) / double(total_steps)));
            ++step;
            auto [center, context] = pairs[pi];
            float* u = &emb[size_t(center) * dim];
            std::fill(grad_u.begin(), grad_u.end(), 0.0f);
            for (int s = 0; s <= cfg.negatives_per_positive; ++s) {
                int target = (s == 0) ? context : sample_neg(train_rng);
                float label = (s == 0) ? 1.0f : 0.0f;
                if (s > 0 && target == center) continue;
                float* v = &ctx[size_t(target) * dim];
                float dot = 0;
                for (int c = 0; c < dim; ++c) dot += u[c] * v[c];
                float sig = 1.0f / (1.0f + std::exp(-dot));
                float gcoef = lr * (label - sig);
                for (int c = 0; c < dim; ++c) {
                    grad_u[c] += gcoef * v[c];
                    v[c] += gcoef * u[c];
                }
            }
            for (int c = 0; c < dim; ++c) u[c] += grad_u[c];
        }
    }

    EmbeddingMatrix out;
    out.name = "node2vec";
    out.rows = n;
    out.cols = dim;
    out.data = std::move(emb);
    out.meta["dim"] = std::to_string(dim);
    out.meta["walk_length"] = std::to_string(cfg.walk_length);
    return out;
}

}  // namespace gigamae
