#include "gigamae/svd.hpp"

#include <Eigen/Eigenvalues>

namespace gigamae {

SvdResult svd_topk(const MatD& m, int k) {
    int n = m.rows, d = m.cols;
    if (k < 1 || k > std::min(n, d)) throw std::invalid_argument("svd_topk: k out of range");
    if (!m.all_finite()) throw std::invalid_argument("svd_topk: non-finite input");

    bool gram_right = d <= n;  // eigendecompose the smaller Gram matrix
    int g = gram_right ? d : n;
    Eigen::MatrixXd G(g, g);
    auto M = m.map();
    if (gram_right)
        G.noalias() = M.transpose() * M;
    else
        G.noalias() = M * M.transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    if (es.info() != Eigen::Success) throw std::runtime_error("svd_topk: eigendecomposition failed");

    SvdResult out;
    out.u = MatD(n, k);
    out.v = MatD(d, k);
    out.s.resize(k);
    // eigenvalues come back ascending
    for (int c = 0; c < k; ++c) {
        int e = g - 1 - c;
        double lam = std::max(0.0, es.eigenvalues()(e));
        double sv = std::sqrt(lam);
        out.s[c] = sv;
        Eigen::VectorXd w = es.eigenvectors().col(e);
        Eigen::VectorXd uc(n), vc(d);
        if (gram_right) {
            vc = w;
            if (sv > 1e-300)
                uc.noalias() = M * w / sv;
            else
                uc.setZero();
        } else {
            uc = w;
            if (sv > 1e-300)
                vc.noalias() = M.transpose() * w / sv;
            else
                vc.setZero();
        }
        // canonical sign: largest-magnitude loading of v positive
        int arg = 0;
        for (int i = 1; i < d; ++i)
            if (std::abs(vc(i)) > std::abs(vc(arg))) arg = i;
        if (vc(arg) < 0) {
            vc = -vc;
            uc = -uc;
        }
        for (int i = 0; i < n; ++i) out.u(i, c) = uc(i);
        for (int i = 0; i < d; ++i) out.v(i, c) = vc(i);
    }
    return out;
}

}  // namespace gigamae
