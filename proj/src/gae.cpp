#include "gigamae/graph_ops.hpp"
#include "gigamae/optim.hpp"
#include "gigamae/targets.hpp"

#include <random>

namespace gigamae {

namespace {

MatD glorot(int rows, int cols, std::mt19937_64& rng) {
    double bound = std::sqrt(6.0 / double(rows + cols));
    std::uniform_real_distribution<double> u(-bound, bound);
    MatD m(rows, cols);
    for (auto& v : m.d) v = u(rng);
    return m;
}

}  // namespace

EmbeddingMatrix gae_embed(const Graph& g, const GaeConfig& cfg) {
    if (g.edges.empty()) throw std::invalid_argument("gae_embed: graph has no edges");
    if (g.features.cols < 1) throw std::invalid_argument("gae_embed: graph has no features");
    if (cfg.hidden_dim < 1 || cfg.out_dim < 1) throw std::invalid_argument("gae_embed: dims must be >= 1");

    std::mt19937_64 rng(mix_seed(cfg.seed, 7));
    MatD w1 = glorot(g.features.cols, cfg.hidden_dim, rng);
    MatD w2 = glorot(cfg.hidden_dim, cfg.out_dim, rng);
    auto adj = build_norm_adj(g.edges, g.num_nodes);
    MatD relu_slope(1, 1);  // fixed zero slope: plain ReLU between layers

    auto forward = [&](TapeD& tape, bool for_grad) {
        auto x = tape.input(g.features);
        auto p1 = tape.input(w1, for_grad);
        auto p2 = tape.input(w2, for_grad);
        auto slope = tape.input(relu_slope);
        auto h = tape.prelu(tape.gcn_aggregate(tape.matmul(x, p1), adj), slope);
        auto z = tape.gcn_aggregate(tape.matmul(h, p2), adj);
        return std::tuple{z, p1, p2};
    };

    Adam<double> opt(cfg.learning_rate);
    auto pos = std::make_shared<std::vector<std::pair<int, int>>>();
    for (auto [i, j] : g.edges) pos->emplace_back(i, j);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto negs = sample_negative_edges(g, g.edges.size(), mix_seed(cfg.seed, 100 + uint64_t(epoch)));
        auto neg = std::make_shared<std::vector<std::pair<int, int>>>(negs.begin(), negs.end());
        TapeD tape;
        auto [z, p1, p2] = forward(tape, true);
        auto loss = tape.edge_bce(z, pos, neg);
        double lv = tape.val(loss)(0, 0);
        if (!std::isfinite(lv))
            throw std::runtime_error("gae_embed: non-finite loss at epoch " + std::to_string(epoch));
        tape.backward(loss);
        opt.step({&w1, &w2}, {&tape.grad(p1), &tape.grad(p2)});
    }

    TapeD tape;
    auto [z, p1, p2] = forward(tape, false);
    auto out = EmbeddingMatrix::from_mat("gae", tape.val(z));
    out.meta["dim"] = std::to_string(cfg.out_dim);
    return out;
}

}  // namespace gigamae
