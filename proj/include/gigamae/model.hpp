#pragma once

#include "gigamae/augment.hpp"
#include "gigamae/graph_ops.hpp"
#include "gigamae/tape.hpp"

#include <map>
#include <random>
#include <string>

namespace gigamae {

template <typename S>
Mat<S> glorot_init(int rows, int cols, std::mt19937_64& rng) {
    double bound = std::sqrt(6.0 / double(rows + cols));
    std::uniform_real_distribution<double> u(-bound, bound);
    Mat<S> m(rows, cols);
    for (auto& v : m.d) v = S(u(rng));
    return m;
}

// Two-layer graph-attention encoder: 4 heads concatenated in layer 1, 1 head
// in layer 2, PReLU after layer 1, linear output.
template <typename S>
struct GatLayerParams {
    Mat<S> w;       // in x (heads * f)
    Mat<S> a_src;   // heads x f
    Mat<S> a_dst;   // heads x f
    Mat<S> bias;    // 1 x (heads * f)
    Mat<S> slope;   // 1 x 1 PReLU slope (unused on the output layer)
    int heads = 1;
};

// Two-layer MLP projector d -> hidden -> d_subset, hidden = max(d, d_subset).
template <typename S>
struct Projector {
    Mat<S> w1, b1, slope, w2, b2;
};

inline std::string subset_key(const std::vector<int>& subset) {
    std::string key;
    for (size_t i = 0; i < subset.size(); ++i) {
        if (i) key += '+';
        key += std::to_string(subset[i]);
    }
    return key;
}

template <typename S>
struct Model {
    std::vector<GatLayerParams<S>> layers;
    std::map<std::string, Projector<S>> projectors;
    std::vector<std::vector<int>> subsets;  // configured target subsets
    int in_dim = 0, hidden_dim = 0, out_dim = 0;

    static Model init(int in_dim, int hidden_dim, int out_dim, const std::vector<int>& target_dims,
                      const std::vector<std::vector<int>>& subsets, uint64_t seed, int heads1 = 4) {
        if (hidden_dim % heads1 != 0)
            throw std::invalid_argument("model: hidden_dim must be divisible by head count");
        std::mt19937_64 rng(mix_seed(seed, 21));
        Model m;
        m.in_dim = in_dim;
        m.hidden_dim = hidden_dim;
        m.out_dim = out_dim;
        m.subsets = subsets;
        int f1 = hidden_dim / heads1;
        GatLayerParams<S> l1{glorot_init<S>(in_dim, hidden_dim, rng),
                             glorot_init<S>(heads1, f1, rng),
                             glorot_init<S>(heads1, f1, rng),
                             Mat<S>(1, hidden_dim),
                             Mat<S>(1, 1, S(0.25)),
                             heads1};
        GatLayerParams<S> l2{glorot_init<S>(hidden_dim, out_dim, rng),
                             glorot_init<S>(1, out_dim, rng),
                             glorot_init<S>(1, out_dim, rng),
                             Mat<S>(1, out_dim),
                             Mat<S>(1, 1, S(0.25)),
                             1};
        m.layers = {std::move(l1), std::move(l2)};
        for (const auto& sub : subsets) {
            int dsub = 0;
            for (int t : sub) {
                if (t < 0 || t >= int(target_dims.size()))
                    throw std::invalid_argument("model: subset references unknown target");
                dsub += target_dims[t];
            }
            int hid = std::max(out_dim, dsub);
            Projector<S> p{glorot_init<S>(out_dim, hid, rng), Mat<S>(1, hid),
                           Mat<S>(1, 1, S(0.25)), glorot_init<S>(hid, dsub, rng), Mat<S>(1, dsub)};
            m.projectors.emplace(subset_key(sub), std::move(p));
        }
        return m;
    }

    std::vector<std::pair<std::string, Mat<S>*>> params() {
        std::vector<std::pair<std::string, Mat<S>*>> out;
        for (size_t l = 0; l < layers.size(); ++l) {
            auto& L = layers[l];
            std::string pre = "enc" + std::to_string(l) + ".";
            out.push_back({pre + "w", &L.w});
            out.push_back({pre + "a_src", &L.a_src});
            out.push_back({pre + "a_dst", &L.a_dst});
            out.push_back({pre + "bias", &L.bias});
            if (l + 1 < layers.size()) out.push_back({pre + "slope", &L.slope});
        }
        for (auto& [key, p] : projectors) {
            std::string pre = "proj" + key + ".";
            out.push_back({pre + "w1", &p.w1});
            out.push_back({pre + "b1", &p.b1});
            out.push_back({pre + "slope", &p.slope});
            out.push_back({pre + "w2", &p.w2});
            out.push_back({pre + "b2", &p.b2});
        }
        return out;
    }
};

// Registers model parameters as tape inputs and exposes the forward pieces.
// One binding per forward pass.
template <typename S>
class ModelOnTape {
public:
    ModelOnTape(GradTape<S>& tape, Model<S>& model, bool trainable)
        : tape_(tape), model_(model), trainable_(trainable) {
        for (auto& [name, mat] : model_.params()) ids_[name] = tape_.input(*mat, trainable_);
    }

    using Id = typename GradTape<S>::Id;

    // Z = f_enc(A', X'); self-loops are added inside the adjacency.
    Id encode(Id x, const std::shared_ptr<const AdjCsr>& adj) {
        Id h = x;
        for (size_t l = 0; l < model_.layers.size(); ++l) {
            std::string pre = "enc" + std::to_string(l) + ".";
            h = tape_.matmul(h, id(pre + "w"));
            h = tape_.gat_attention(h, id(pre + "a_src"), id(pre + "a_dst"), adj,
                                    model_.layers[l].heads);
            h = tape_.add_bias(h, id(pre + "bias"));
            if (l + 1 < model_.layers.size()) h = tape_.prelu(h, id(pre + "slope"));
        }
        return h;
    }

    Id project(Id s, const std::string& key) {
        if (!model_.projectors.count(key))
            throw std::invalid_argument("project: unknown subset key " + key);
        std::string pre = "proj" + key + ".";
        Id h = tape_.add_bias(tape_.matmul(s, id(pre + "w1")), id(pre + "b1"));
        h = tape_.prelu(h, id(pre + "slope"));
        return tape_.add_bias(tape_.matmul(h, id(pre + "w2")), id(pre + "b2"));
    }

    Id id(const std::string& name) const { return ids_.at(name); }

    const Mat<S>& grad(const std::string& name) const { return tape_.grad(id(name)); }

private:
    GradTape<S>& tape_;
    Model<S>& model_;
    bool trainable_;
    std::map<std::string, Id> ids_;
};

// Re-masking (tape side): zero the rows of unmasked (class-N) nodes.
template <typename S>
typename GradTape<S>::Id remask_source(GradTape<S>& tape, typename GradTape<S>::Id z,
                                       const std::vector<NodeClass>& node_class) {
    if (tape.val(z).rows != int(node_class.size()))
        throw std::invalid_argument("remask_source: row count mismatch");
    std::vector<uint8_t> keep(node_class.size());
    for (size_t i = 0; i < node_class.size(); ++i) keep[i] = node_class[i] != NodeClass::N;
    return tape.mask_rows(z, std::move(keep));
}

// Re-masking (constant side): targets carry no gradient.
inline MatD remask_target(const MatD& z, const std::vector<NodeClass>& node_class) {
    if (z.rows != int(node_class.size()))
        throw std::invalid_argument("remask_target: row count mismatch");
    MatD t = z;
    for (int i = 0; i < t.rows; ++i)
        if (node_class[i] == NodeClass::N)
            for (int j = 0; j < t.cols; ++j) t(i, j) = 0.0;
    return t;
}

}  // namespace gigamae
