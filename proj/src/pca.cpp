#include "gigamae/svd.hpp"
#include "gigamae/targets.hpp"

#include <cmath>

namespace gigamae {

EmbeddingMatrix pca_embed(const MatD& features, const PcaConfig& cfg) {
    if (features.cols < 1) throw std::invalid_argument("pca_embed: empty feature matrix");
    if (cfg.ratio <= 0 || cfg.ratio > 1) throw std::invalid_argument("pca_embed: ratio must be in (0,1]");

    int d = features.cols;
    int k = std::max(1, int(std::floor(cfg.ratio * d + 0.5)));
    k = std::min(k, std::min(features.rows, d));

    MatD centered = features;
    if (cfg.center) {
        for (int j = 0; j < d; ++j) {
            double mean = 0;
            for (int i = 0; i < centered.rows; ++i) mean += centered(i, j);
            mean /= centered.rows;
            for (int i = 0; i < centered.rows; ++i) centered(i, j) -= mean;
        }
    }
    bool any_variance = false;
    for (double v : centered.d)
        if (v != 0.0) { any_variance = true; break; }
    if (!any_variance) throw std::invalid_argument("pca_embed: all feature columns are constant");

    SvdResult svd = svd_topk(centered, k);
    MatD emb(features.rows, k);
    for (int i = 0; i < emb.rows; ++i)
        for (int c = 0; c < k; ++c) emb(i, c) = svd.u(i, c) * svd.s[c];

    auto out = EmbeddingMatrix::from_mat("pca", emb);
    out.meta["ratio"] = std::to_string(cfg.ratio);
    out.meta["dim"] = std::to_string(k);
    return out;
}

}  // namespace gigamae
