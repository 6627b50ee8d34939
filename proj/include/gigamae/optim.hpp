#pragma once

#include "gigamae/tensor.hpp"

namespace gigamae {

// Adaptive moment estimation with bias correction.
template <typename S>
class Adam {
public:
    Adam(double lr, double weight_decay = 0.0, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8)
        : lr_(lr), wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps) {}

    void step(std::vector<Mat<S>*> params, const std::vector<const Mat<S>*>& grads) {
        if (m_.empty()) {
            for (auto* p : params) {
                m_.emplace_back(p->rows, p->cols);
                v_.emplace_back(p->rows, p->cols);
            }
        }
        ++t_;
        double bc1 = 1.0 - std::pow(b1_, t_);
        double bc2 = 1.0 - std::pow(b2_, t_);
        for (size_t i = 0; i < params.size(); ++i) {
            auto& p = *params[i];
            const auto& g = *grads[i];
            for (size_t k = 0; k < p.size(); ++k) {
                double gk = double(g.d[k]) + wd_ * double(p.d[k]);
                double m = b1_ * double(m_[i].d[k]) + (1.0 - b1_) * gk;
                double v = b2_ * double(v_[i].d[k]) + (1.0 - b2_) * gk * gk;
                m_[i].d[k] = S(m);
                v_[i].d[k] = S(v);
                p.d[k] -= S(lr_ * (m / bc1) / (std::sqrt(v / bc2) + eps_));
            }
        }
    }

private:
    double lr_, wd_, b1_, b2_, eps_;
    long t_ = 0;
    std::vector<Mat<S>> m_, v_;
};

}  // namespace gigamae
