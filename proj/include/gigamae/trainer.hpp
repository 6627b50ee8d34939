#pragma once

#include "gigamae/loss.hpp"
#include "gigamae/optim.hpp"

#include <chrono>
#include <ostream>

namespace gigamae {

struct TrainConfig {
    int epochs = 500;
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    int hidden_dim = 512;
    int out_dim = 512;
    int heads = 4;
    double mask_edge_ratio = 0.4;
    double mask_feature_ratio = 0.4;
    double tau = 0.5;
    ClassWeights class_weights{{5, 2, 6}, {2, 5, 6}, {1, 1, 3}};
    uint64_t seed = 0;
    bool single_precision = false;
    bool negatives_all_nodes = false;
    int checkpoint_every = 0;  // 0: only at end

    void validate() const {
        if (epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
        if (mask_edge_ratio < 0 || mask_edge_ratio > 1 || mask_feature_ratio < 0 ||
            mask_feature_ratio > 1)
            throw std::invalid_argument("train: mask ratios must be in [0,1]");
        if (tau <= 0) throw std::invalid_argument("train: tau must be positive");
    }
};

// Every non-empty subset of n targets, singletons first, then by size.
inline std::vector<std::vector<int>> all_target_subsets(int n) {
    std::vector<std::vector<int>> subsets;
    for (int size = 1; size <= n; ++size) {
        std::vector<int> sub;
        // enumerate bitmasks of the given popcount in increasing order
        for (unsigned mask = 1; mask < (1u << n); ++mask) {
            if (__builtin_popcount(mask) != size) continue;
            sub.clear();
            for (int t = 0; t < n; ++t)
                if (mask & (1u << t)) sub.push_back(t);
            subsets.push_back(sub);
        }
    }
    return subsets;
}

struct TrainEpochRecord {
    int epoch = 0;
    double loss = 0.0;
    LossBreakdown breakdown;
    double wall_ms = 0.0;
};

struct TrainLog {
    std::vector<TrainEpochRecord> records;
};

template <typename S>
struct TrainResult {
    Model<S> model;
    EmbeddingMatrix final_z;  // encoding of the unmasked graph
    TrainLog log;
};

template <typename S>
Mat<S> encode_plain(Model<S>& model, const MatD& features, const std::vector<Edge>& edges) {
    GradTape<S> tape;
    ModelOnTape<S> bound(tape, model, false);
    auto x = tape.input(features.cast<S>());
    auto z = bound.encode(x, build_adj_csr(edges, features.rows));
    return tape.val(z);
}

// Mean per-node symmetric InfoNCE under a fixed mask plan; used to measure
// progress on a held-out plan without touching parameters.
template <typename S>
double evaluate_plan_loss(Model<S>& model, const Graph& g, const std::vector<MatD>& targets,
                          const MaskPlan& plan, const TrainConfig& cfg) {
    MaskedGraph mg = apply_masks(g, plan);
    GradTape<S> tape;
    ModelOnTape<S> bound(tape, model, false);
    auto x = tape.input(mg.features.cast<S>());
    auto z = bound.encode(x, build_adj_csr(mg.adjacency_edges, g.num_nodes));
    auto loss = multi_target_loss<S>(tape, bound, z, targets, model.subsets, cfg.class_weights,
                                     plan.node_class, cfg.tau, cfg.negatives_all_nodes);
    return loss.breakdown.total;
}

// Orchestrates one full training run: per epoch a fresh mask plan is sampled,
// the masked graph is encoded, source and targets are re-masked and the
// multi-target objective is maximized by one Adam step on its negation.
template <typename S>
TrainResult<S> train_model(const Graph& g, const std::vector<MatD>& targets, TrainConfig cfg,
                           std::ostream* log_stream = nullptr) {
    cfg.validate();
    for (const auto& t : targets)
        if (t.rows != g.num_nodes)
            throw std::invalid_argument("train: target row count does not match graph");
    std::vector<int> target_dims;
    for (const auto& t : targets) target_dims.push_back(t.cols);
    auto subsets = all_target_subsets(int(targets.size()));
    cfg.class_weights.validate(subsets.size());

    TrainResult<S> out;
    out.model = Model<S>::init(g.feature_dim(), cfg.hidden_dim, cfg.out_dim, target_dims, subsets,
                               cfg.seed, cfg.heads);
    auto& model = out.model;

    Adam<S> opt(cfg.learning_rate, cfg.weight_decay);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        MaskPlan plan = sample_masks(g, cfg.mask_edge_ratio, cfg.mask_feature_ratio,
                                     mix_seed(cfg.seed, 0x700 + uint64_t(epoch)));
        MaskedGraph mg = apply_masks(g, plan);

        GradTape<S> tape;
        ModelOnTape<S> bound(tape, model, true);
        auto x = tape.input(mg.features.cast<S>());
        auto z = bound.encode(x, build_adj_csr(mg.adjacency_edges, g.num_nodes));
        auto loss = multi_target_loss<S>(tape, bound, z, targets, subsets, cfg.class_weights,
                                         plan.node_class, cfg.tau, cfg.negatives_all_nodes);
        if (!std::isfinite(loss.breakdown.total))
            throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
        auto objective = tape.scale(loss.value, S(-1));  // minimize the negation
        tape.backward(objective);

        std::vector<Mat<S>*> params;
        std::vector<const Mat<S>*> grads;
        for (auto& [name, mat] : model.params()) {
            params.push_back(mat);
            grads.push_back(&bound.grad(name));
        }
        opt.step(std::move(params), grads);

        TrainEpochRecord rec;
        rec.epoch = epoch;
        rec.loss = loss.breakdown.total;
        rec.breakdown = loss.breakdown;
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0).count();
        if (log_stream)
            *log_stream << epoch << "\t" << rec.loss << "\t" << rec.wall_ms << "\n" << std::flush;
        out.log.records.push_back(std::move(rec));
    }

    Mat<S> z = encode_plain(model, g.features, g.edges);
    out.final_z = EmbeddingMatrix::from_mat("gigamae", z.template cast<double>());
    return out;
}

}  // namespace gigamae
