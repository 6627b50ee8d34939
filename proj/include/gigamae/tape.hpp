#pragma once

#include "gigamae/tensor.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>

namespace gigamae {

// Symmetric adjacency in CSR form, self-loops included. Built once per masked
// graph and shared by the attention op.
struct AdjCsr {
    int n = 0;
    std::vector<int> offs;  // size n+1
    std::vector<int> nbrs;

    int degree(int i) const { return offs[i + 1] - offs[i]; }
};

// Symmetrically normalized adjacency (A+I scaled by D^-1/2 on both sides).
struct NormAdj {
    int n = 0;
    std::vector<int> offs;
    std::vector<int> nbrs;
    std::vector<double> w;
};

// Reverse-mode tape over Mat<S>. Ops append nodes; backward() walks the node
// list in reverse. One tape per forward pass; tapes are not shared across
// threads.
template <typename S>
class GradTape {
public:
    using Id = int;

    explicit GradTape(bool check_finite = false) : check_finite_(check_finite) {}

    Id input(Mat<S> v, bool requires_grad = false) {
        return push(std::move(v), requires_grad, nullptr);
    }

    const Mat<S>& val(Id id) const { return nodes_[id].val; }
    const Mat<S>& grad(Id id) const { return nodes_[id].grad; }
    bool requires_grad(Id id) const { return nodes_[id].needs; }
    int size() const { return int(nodes_.size()); }

    // Seeds d(root)=1 and accumulates gradients into every node that needs
    // them, in exact reverse order of recording.
    void backward(Id root) {
        if (val(root).rows != 1 || val(root).cols != 1)
            throw std::invalid_argument("backward: root must be a scalar (1x1)");
        for (auto& n : nodes_)
            if (n.needs) n.grad = Mat<S>::zeros(n.val.rows, n.val.cols);
        nodes_[root].grad(0, 0) = S(1);
        for (Id id = root; id >= 0; --id)
            if (nodes_[id].needs && nodes_[id].back) nodes_[id].back();
    }

    // ---- core ops ----

    Id matmul(Id a, Id b) {
        const auto& A = val(a);
        const auto& B = val(b);
        if (A.cols != B.rows) throw std::invalid_argument("matmul: shape mismatch");
        Mat<S> C(A.rows, B.cols);
        C.map().noalias() = A.map() * B.map();
        return push(std::move(C), needs(a) || needs(b), [this, a, b](Id y) {
            if (needs(a)) nodes_[a].grad.map().noalias() += nodes_[y].grad.map() * val(b).map().transpose();
            if (needs(b)) nodes_[b].grad.map().noalias() += val(a).map().transpose() * nodes_[y].grad.map();
        });
    }

    // bias is 1 x cols, broadcast over rows
    Id add_bias(Id a, Id bias) {
        const auto& A = val(a);
        const auto& B = val(bias);
        if (B.rows != 1 || B.cols != A.cols) throw std::invalid_argument("add_bias: bias must be 1 x cols");
        Mat<S> Y = A;
        for (int i = 0; i < Y.rows; ++i)
            for (int j = 0; j < Y.cols; ++j) Y(i, j) += B(0, j);
        return push(std::move(Y), needs(a) || needs(bias), [this, a, bias](Id y) {
            const auto& G = nodes_[y].grad;
            if (needs(a)) nodes_[a].grad.map() += G.map();
            if (needs(bias)) nodes_[bias].grad.map() += G.map().colwise().sum();
        });
    }

    Id add(Id a, Id b) {
        const auto& A = val(a);
        const auto& B = val(b);
        if (A.rows != B.rows || A.cols != B.cols) throw std::invalid_argument("add: shape mismatch");
        Mat<S> Y = A;
        Y.map() += B.map();
        return push(std::move(Y), needs(a) || needs(b), [this, a, b](Id y) {
            if (needs(a)) nodes_[a].grad.map() += nodes_[y].grad.map();
            if (needs(b)) nodes_[b].grad.map() += nodes_[y].grad.map();
        });
    }

    // PReLU with a learnable 1x1 slope.
    Id prelu(Id a, Id slope) {
        const auto& A = val(a);
        if (val(slope).size() != 1) throw std::invalid_argument("prelu: slope must be 1x1");
        S s = val(slope)(0, 0);
        Mat<S> Y = A;
        for (auto& v : Y.d)
            if (v < S(0)) v *= s;
        return push(std::move(Y), needs(a) || needs(slope), [this, a, slope](Id y) {
            const auto& A2 = val(a);
            const auto& G = nodes_[y].grad;
            S s2 = val(slope)(0, 0);
            S ds = 0;
            for (size_t i = 0; i < A2.size(); ++i) {
                if (A2.d[i] < S(0)) {
                    if (needs(a)) nodes_[a].grad.d[i] += G.d[i] * s2;
                    ds += G.d[i] * A2.d[i];
                } else if (needs(a)) {
                    nodes_[a].grad.d[i] += G.d[i];
                }
            }
            if (needs(slope)) nodes_[slope].grad(0, 0) += ds;
        });
    }

    Id elu(Id a) {
        Mat<S> Y = val(a);
        for (auto& v : Y.d)
            if (v < S(0)) v = std::exp(v) - S(1);
        return push(std::move(Y), needs(a), [this, a](Id y) {
            const auto& Y2 = nodes_[y].val;
            const auto& G = nodes_[y].grad;
            for (size_t i = 0; i < Y2.size(); ++i)
                nodes_[a].grad.d[i] += G.d[i] * (val(a).d[i] >= S(0) ? S(1) : Y2.d[i] + S(1));
        });
    }

    Id row_l2_normalize(Id a) {
        const auto& A = val(a);
        Mat<S> Y(A.rows, A.cols);
        for (int i = 0; i < A.rows; ++i) {
            S nrm = row_norm(A, i);
            S m = nrm + S(kNormEps);
            for (int j = 0; j < A.cols; ++j) Y(i, j) = A(i, j) / m;
        }
        return push(std::move(Y), needs(a), [this, a](Id y) {
            const auto& A2 = val(a);
            const auto& G = nodes_[y].grad;
            auto& dA = nodes_[a].grad;
            for (int i = 0; i < A2.rows; ++i) {
                S nrm = row_norm(A2, i);
                S m = nrm + S(kNormEps);
                S dot = 0;
                for (int j = 0; j < A2.cols; ++j) dot += A2(i, j) * G(i, j);
                S corr = nrm > S(0) ? dot / (nrm * m * m) : S(0);
                for (int j = 0; j < A2.cols; ++j) dA(i, j) += G(i, j) / m - A2(i, j) * corr;
            }
        });
    }

    Id concat_cols(const std::vector<Id>& parts) {
        if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
        int rows = val(parts[0]).rows, cols = 0;
        bool ng = false;
        for (Id p : parts) {
            if (val(p).rows != rows) throw std::invalid_argument("concat_cols: row mismatch");
            cols += val(p).cols;
            ng = ng || needs(p);
        }
        Mat<S> Y(rows, cols);
        int off = 0;
        for (Id p : parts) {
            const auto& P = val(p);
            for (int i = 0; i < rows; ++i)
                std::copy(&P.d[size_t(i) * P.cols], &P.d[size_t(i) * P.cols] + P.cols,
                          &Y.d[size_t(i) * cols + off]);
            off += P.cols;
        }
        return push(std::move(Y), ng, [this, parts](Id y) {
            const auto& G = nodes_[y].grad;
            int off2 = 0;
            for (Id p : parts) {
                auto& dP = nodes_[p].grad;
                if (needs(p))
                    for (int i = 0; i < G.rows; ++i)
                        for (int j = 0; j < dP.cols; ++j) dP(i, j) += G(i, off2 + j);
                off2 += val(p).cols;
            }
        });
    }

    Id expm(Id a) {
        Mat<S> Y = val(a);
        for (auto& v : Y.d) v = std::exp(v);
        return push(std::move(Y), needs(a), [this, a](Id y) {
            const auto& Y2 = nodes_[y].val;
            const auto& G = nodes_[y].grad;
            for (size_t i = 0; i < Y2.size(); ++i) nodes_[a].grad.d[i] += G.d[i] * Y2.d[i];
        });
    }

    // Per-row log-sum-exp with max-shift stabilization; output n x 1.
    Id logsumexp_rows(Id a) {
        const auto& A = val(a);
        Mat<S> Y(A.rows, 1);
        for (int i = 0; i < A.rows; ++i) {
            S mx = A(i, 0);
            for (int j = 1; j < A.cols; ++j) mx = std::max(mx, A(i, j));
            S acc = 0;
            for (int j = 0; j < A.cols; ++j) acc += std::exp(A(i, j) - mx);
            Y(i, 0) = mx + std::log(acc);
        }
        return push(std::move(Y), needs(a), [this, a](Id y) {
            const auto& A2 = val(a);
            const auto& Y2 = nodes_[y].val;
            const auto& G = nodes_[y].grad;
            auto& dA = nodes_[a].grad;
            for (int i = 0; i < A2.rows; ++i)
                for (int j = 0; j < A2.cols; ++j)
                    dA(i, j) += G(i, 0) * std::exp(A2(i, j) - Y2(i, 0));
        });
    }

    Id scale(Id a, S c) {
        Mat<S> Y = val(a);
        for (auto& v : Y.d) v *= c;
        return push(std::move(Y), needs(a), [this, a, c](Id y) {
            const auto& G = nodes_[y].grad;
            for (size_t i = 0; i < G.size(); ++i) nodes_[a].grad.d[i] += G.d[i] * c;
        });
    }

    Id select_rows(Id a, std::vector<int> idx) {
        const auto& A = val(a);
        for (int i : idx)
            if (i < 0 || i >= A.rows) throw std::invalid_argument("select_rows: index out of range");
        Mat<S> Y(int(idx.size()), A.cols);
        for (size_t r = 0; r < idx.size(); ++r)
            for (int j = 0; j < A.cols; ++j) Y(int(r), j) = A(idx[r], j);
        auto ix = std::make_shared<std::vector<int>>(std::move(idx));
        return push(std::move(Y), needs(a), [this, a, ix](Id y) {
            const auto& G = nodes_[y].grad;
            auto& dA = nodes_[a].grad;
            for (size_t r = 0; r < ix->size(); ++r)
                for (int j = 0; j < G.cols; ++j) dA((*ix)[r], j) += G(int(r), j);
        });
    }

    // keep[i] == 0 zeroes row i (the re-masking primitive).
    Id mask_rows(Id a, std::vector<uint8_t> keep) {
        const auto& A = val(a);
        if (int(keep.size()) != A.rows) throw std::invalid_argument("mask_rows: mask length mismatch");
        Mat<S> Y = A;
        for (int i = 0; i < A.rows; ++i)
            if (!keep[i])
                for (int j = 0; j < A.cols; ++j) Y(i, j) = S(0);
        auto k = std::make_shared<std::vector<uint8_t>>(std::move(keep));
        return push(std::move(Y), needs(a), [this, a, k](Id y) {
            const auto& G = nodes_[y].grad;
            auto& dA = nodes_[a].grad;
            for (int i = 0; i < G.rows; ++i)
                if ((*k)[i])
                    for (int j = 0; j < G.cols; ++j) dA(i, j) += G(i, j);
        });
    }

    Id reduce_sum(Id a) {
        Mat<S> Y(1, 1);
        Y(0, 0) = std::accumulate(val(a).d.begin(), val(a).d.end(), S(0));
        return push(std::move(Y), needs(a), [this, a](Id y) {
            S g = nodes_[y].grad(0, 0);
            for (auto& v : nodes_[a].grad.d) v += g;
        });
    }

    Id reduce_mean(Id a) {
        size_t n = val(a).size();
        Mat<S> Y(1, 1);
        Y(0, 0) = std::accumulate(val(a).d.begin(), val(a).d.end(), S(0)) / S(n);
        return push(std::move(Y), needs(a), [this, a, n](Id y) {
            S g = nodes_[y].grad(0, 0) / S(n);
            for (auto& v : nodes_[a].grad.d) v += g;
        });
    }

    // sum_i v_i * w_i with constant weights; v is n x 1.
    Id dot_const(Id a, std::vector<S> w) {
        const auto& A = val(a);
        if (A.cols != 1 || int(w.size()) != A.rows)
            throw std::invalid_argument("dot_const: expects n x 1 and matching weights");
        Mat<S> Y(1, 1);
        for (int i = 0; i < A.rows; ++i) Y(0, 0) += A(i, 0) * w[i];
        auto wp = std::make_shared<std::vector<S>>(std::move(w));
        return push(std::move(Y), needs(a), [this, a, wp](Id y) {
            S g = nodes_[y].grad(0, 0);
            for (int i = 0; i < val(a).rows; ++i) nodes_[a].grad(i, 0) += g * (*wp)[i];
        });
    }

    // ---- loss-carrying ops ----

    // C(i,j) = <p_i, q_j> / ((|p_i|+eps)(|q_j|+eps)); entries in [-1, 1].
    Id cosine_matrix(Id p, Id q) {
        const auto& P = val(p);
        const auto& Q = val(q);
        if (P.cols != Q.cols) throw std::invalid_argument("cosine_matrix: dim mismatch");
        Mat<S> Pn = normalized_rows(P);
        Mat<S> Qn = normalized_rows(Q);
        Mat<S> C(P.rows, Q.rows);
        C.map().noalias() = Pn.map() * Qn.map().transpose();
        auto pn = std::make_shared<Mat<S>>(std::move(Pn));
        auto qn = std::make_shared<Mat<S>>(std::move(Qn));
        return push(std::move(C), needs(p) || needs(q), [this, p, q, pn, qn](Id y) {
            const auto& G = nodes_[y].grad;
            const auto& C2 = nodes_[y].val;
            if (needs(p)) cosine_backward_side(val(p), *qn, C2, G, nodes_[p].grad, false);
            if (needs(q)) cosine_backward_side(val(q), *pn, C2, G, nodes_[q].grad, true);
        });
    }

    // Per-node InfoNCE terms from cosine score matrices (Eq-5-style partition
    // function with the self score removed once). c_pq holds cos(p_i, q_j),
    // c_pp holds cos(p_i, p_j); if transpose_pq, rows of c_pq^T are used so the
    // reverse direction can reuse the same score matrix. Output is n x 1 and
    // every entry is <= 0.
    Id infonce_scores(Id c_pq, Id c_pp, S tau, bool transpose_pq = false) {
        if (tau <= S(0)) throw std::invalid_argument("infonce_scores: tau must be positive");
        const auto& C1 = val(c_pq);
        const auto& C2 = val(c_pp);
        int n = C2.rows;
        if (C2.cols != n || C1.rows != n || C1.cols != n)
            throw std::invalid_argument("infonce_scores: expects square n x n scores");
        Mat<S> L(n, 1);
        for (int i = 0; i < n; ++i) {
            S mx = -std::numeric_limits<S>::infinity();
            for (int j = 0; j < n; ++j) {
                mx = std::max(mx, c1_at(C1, i, j, transpose_pq) / tau);
                if (j != i) mx = std::max(mx, C2(i, j) / tau);
            }
            S acc = 0;
            for (int j = 0; j < n; ++j) {
                acc += std::exp(c1_at(C1, i, j, transpose_pq) / tau - mx);
                if (j != i) acc += std::exp(C2(i, j) / tau - mx);
            }
            L(i, 0) = c1_at(C1, i, i, transpose_pq) / tau - (mx + std::log(acc));
        }
        return push(std::move(L), needs(c_pq) || needs(c_pp),
                    [this, c_pq, c_pp, tau, transpose_pq](Id y) {
            const auto& C1 = val(c_pq);
            const auto& C2 = val(c_pp);
            const auto& G = nodes_[y].grad;
            int n = C2.rows;
            for (int i = 0; i < n; ++i) {
                S g = G(i, 0);
                if (g == S(0)) continue;
                S mx = -std::numeric_limits<S>::infinity();
                for (int j = 0; j < n; ++j) {
                    mx = std::max(mx, c1_at(C1, i, j, transpose_pq) / tau);
                    if (j != i) mx = std::max(mx, C2(i, j) / tau);
                }
                S acc = 0;
                for (int j = 0; j < n; ++j) {
                    acc += std::exp(c1_at(C1, i, j, transpose_pq) / tau - mx);
                    if (j != i) acc += std::exp(C2(i, j) / tau - mx);
                }
                if (needs(c_pq)) {
                    auto& D1 = nodes_[c_pq].grad;
                    for (int j = 0; j < n; ++j) {
                        S w = std::exp(c1_at(C1, i, j, transpose_pq) / tau - mx) / acc;
                        S d = ((j == i ? S(1) : S(0)) - w) / tau;
                        c1_ref(D1, i, j, transpose_pq) += g * d;
                    }
                }
                if (needs(c_pp)) {
                    auto& D2 = nodes_[c_pp].grad;
                    for (int j = 0; j < n; ++j) {
                        if (j == i) continue;
                        S w = std::exp(C2(i, j) / tau - mx) / acc;
                        D2(i, j) -= g * w / tau;
                    }
                }
            }
        });
    }

    // ---- graph ops ----

    // Multi-head attention aggregation. h is n x (heads*f) (per-head blocks of
    // columns), a_src and a_dst are heads x f. Scores follow the additive
    // form: e_ij = leaky(h_i.a_src + h_j.a_dst) over adj (self-loops included),
    // normalized per destination row i, output o_i = sum_j w_ij h_j per head.
    Id gat_attention(Id h, Id a_src, Id a_dst, std::shared_ptr<const AdjCsr> adj, int heads,
                     S leaky = S(0.2)) {
        const auto& H = val(h);
        const auto& As = val(a_src);
        const auto& Ad = val(a_dst);
        if (H.cols % heads != 0) throw std::invalid_argument("gat_attention: cols not divisible by heads");
        int f = H.cols / heads;
        if (As.rows != heads || As.cols != f || Ad.rows != heads || Ad.cols != f)
            throw std::invalid_argument("gat_attention: attention vector shape mismatch");
        if (adj->n != H.rows) throw std::invalid_argument("gat_attention: adjacency size mismatch");
        int n = H.rows;
        size_t ne = adj->nbrs.size();
        // per-head per-edge softmax weights, kept for backward
        auto wgt = std::make_shared<std::vector<S>>(size_t(heads) * ne);
        Mat<S> O(n, H.cols);
        std::vector<S> s(n), d(n);
        for (int hd = 0; hd < heads; ++hd) {
            int c0 = hd * f;
            for (int i = 0; i < n; ++i) {
                S vs = 0, vd = 0;
                for (int j = 0; j < f; ++j) {
                    vs += H(i, c0 + j) * As(hd, j);
                    vd += H(i, c0 + j) * Ad(hd, j);
                }
                s[i] = vs;
                d[i] = vd;
            }
            for (int i = 0; i < n; ++i) {
                int b = adj->offs[i], e = adj->offs[i + 1];
                S mx = -std::numeric_limits<S>::infinity();
                for (int k = b; k < e; ++k) {
                    S z = s[i] + d[adj->nbrs[k]];
                    if (z < S(0)) z *= leaky;
                    mx = std::max(mx, z);
                }
                S acc = 0;
                for (int k = b; k < e; ++k) {
                    S z = s[i] + d[adj->nbrs[k]];
                    if (z < S(0)) z *= leaky;
                    S w = std::exp(z - mx);
                    (*wgt)[size_t(hd) * ne + k] = w;
                    acc += w;
                }
                for (int k = b; k < e; ++k) {
                    S& w = (*wgt)[size_t(hd) * ne + k];
                    w /= acc;
                    int j = adj->nbrs[k];
                    for (int c = 0; c < f; ++c) O(i, c0 + c) += w * H(j, c0 + c);
                }
            }
        }
        return push(std::move(O), needs(h) || needs(a_src) || needs(a_dst),
                    [this, h, a_src, a_dst, adj, heads, f, leaky, wgt](Id y) {
            const auto& H = val(h);
            const auto& As = val(a_src);
            const auto& Ad = val(a_dst);
            const auto& G = nodes_[y].grad;
            int n = H.rows;
            size_t ne = adj->nbrs.size();
            std::vector<S> s(n), d(n), ds(n), dd(n);
            for (int hd = 0; hd < heads; ++hd) {
                int c0 = hd * f;
                for (int i = 0; i < n; ++i) {
                    S vs = 0, vd = 0;
                    for (int j = 0; j < f; ++j) {
                        vs += H(i, c0 + j) * As(hd, j);
                        vd += H(i, c0 + j) * Ad(hd, j);
                    }
                    s[i] = vs;
                    d[i] = vd;
                    ds[i] = dd[i] = 0;
                }
                for (int i = 0; i < n; ++i) {
                    int b = adj->offs[i], e = adj->offs[i + 1];
                    // dw and the softmax jacobian
                    S wdot = 0;
                    for (int k = b; k < e; ++k) {
                        int j = adj->nbrs[k];
                        S dw = 0;
                        for (int c = 0; c < f; ++c) dw += G(i, c0 + c) * H(j, c0 + c);
                        wdot += (*wgt)[size_t(hd) * ne + k] * dw;
                    }
                    for (int k = b; k < e; ++k) {
                        int j = adj->nbrs[k];
                        S w = (*wgt)[size_t(hd) * ne + k];
                        S dw = 0;
                        for (int c = 0; c < f; ++c) dw += G(i, c0 + c) * H(j, c0 + c);
                        if (needs(h)) {
                            auto& dH = nodes_[h].grad;
                            for (int c = 0; c < f; ++c) dH(j, c0 + c) += w * G(i, c0 + c);
                        }
                        S de = w * (dw - wdot);
                        S z = s[i] + d[j];
                        S dz = de * (z < S(0) ? leaky : S(1));
                        ds[i] += dz;
                        dd[j] += dz;
                    }
                }
                for (int i = 0; i < n; ++i) {
                    for (int c = 0; c < f; ++c) {
                        if (needs(h))
                            nodes_[h].grad(i, c0 + c) += ds[i] * As(hd, c) + dd[i] * Ad(hd, c);
                        if (needs(a_src)) nodes_[a_src].grad(hd, c) += ds[i] * H(i, c0 + c);
                        if (needs(a_dst)) nodes_[a_dst].grad(hd, c) += dd[i] * H(i, c0 + c);
                    }
                }
            }
        });
    }

    // y_i = sum_j w_ij x_j over a symmetric weighted adjacency.
    Id gcn_aggregate(Id x, std::shared_ptr<const NormAdj> adj) {
        const auto& X = val(x);
        if (adj->n != X.rows) throw std::invalid_argument("gcn_aggregate: adjacency size mismatch");
        Mat<S> Y(X.rows, X.cols);
        spmm(*adj, X, Y);
        return push(std::move(Y), needs(x), [this, x, adj](Id y) {
            Mat<S> D(val(x).rows, val(x).cols);
            spmm(*adj, nodes_[y].grad, D);  // adjacency is symmetric
            nodes_[x].grad.map() += D.map();
        });
    }

    // Mean binary cross-entropy of sigmoid(z_u . z_v) over positive and
    // negative node pairs (inner-product edge decoder).
    Id edge_bce(Id z, std::shared_ptr<const std::vector<std::pair<int, int>>> pos,
                std::shared_ptr<const std::vector<std::pair<int, int>>> neg) {
        const auto& Z = val(z);
        size_t m = pos->size() + neg->size();
        if (m == 0) throw std::invalid_argument("edge_bce: no pairs");
        double total = 0;
        auto logit = [&](int u, int v) {
            S acc = 0;
            for (int c = 0; c < Z.cols; ++c) acc += Z(u, c) * Z(v, c);
            return acc;
        };
        // -log sigmoid(x) = softplus(-x); -log(1-sigmoid(x)) = softplus(x)
        auto softplus = [](double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); };
        for (auto [u, v] : *pos) total += softplus(-double(logit(u, v)));
        for (auto [u, v] : *neg) total += softplus(double(logit(u, v)));
        Mat<S> Y(1, 1);
        Y(0, 0) = S(total / double(m));
        return push(std::move(Y), needs(z), [this, z, pos, neg, m](Id y) {
            const auto& Z = val(z);
            auto& dZ = nodes_[z].grad;
            S g = nodes_[y].grad(0, 0) / S(m);
            auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
            auto apply = [&](int u, int v, S coeff) {
                for (int c = 0; c < Z.cols; ++c) {
                    dZ(u, c) += coeff * Z(v, c);
                    dZ(v, c) += coeff * Z(u, c);
                }
            };
            for (auto [u, v] : *pos) {
                S x = 0;
                for (int c = 0; c < Z.cols; ++c) x += Z(u, c) * Z(v, c);
                apply(u, v, g * S(sigmoid(double(x)) - 1.0));
            }
            for (auto [u, v] : *neg) {
                S x = 0;
                for (int c = 0; c < Z.cols; ++c) x += Z(u, c) * Z(v, c);
                apply(u, v, g * S(sigmoid(double(x))));
            }
        });
    }

private:
    static constexpr double kNormEps = 1e-12;  // zero-norm guard in cosine paths

    struct Node {
        Mat<S> val;
        Mat<S> grad;
        bool needs = false;
        std::function<void()> back;
    };

    std::vector<Node> nodes_;
    bool check_finite_ = false;

    bool needs(Id id) const { return nodes_[id].needs; }

    Id push(Mat<S> v, bool ng, std::function<void(Id)> back) {
        if (check_finite_ && !v.all_finite())
            throw std::runtime_error("tape: non-finite value produced by op");
        Id id = Id(nodes_.size());
        Node n;
        n.val = std::move(v);
        n.needs = ng;
        if (back && ng) n.back = [back = std::move(back), id]() { back(id); };
        nodes_.push_back(std::move(n));
        return id;
    }

    static S row_norm(const Mat<S>& A, int i) {
        S acc = 0;
        for (int j = 0; j < A.cols; ++j) acc += A(i, j) * A(i, j);
        return std::sqrt(acc);
    }

    static Mat<S> normalized_rows(const Mat<S>& A) {
        Mat<S> Y(A.rows, A.cols);
        for (int i = 0; i < A.rows; ++i) {
            S m = row_norm(A, i) + S(kNormEps);
            for (int j = 0; j < A.cols; ++j) Y(i, j) = A(i, j) / m;
        }
        return Y;
    }

    // Gradient of C = normalize(P) * Qn^T with respect to P (Qn already
    // normalized). With swap, C rows/cols are transposed (the Q side).
    static void cosine_backward_side(const Mat<S>& P, const Mat<S>& Qn, const Mat<S>& C,
                                     const Mat<S>& G, Mat<S>& dP, bool swap) {
        int n = P.rows, m = Qn.rows;
        // dPn = G * Qn (or G^T * Qn), then pull back through normalization.
        Mat<S> dPn(n, P.cols);
        if (!swap)
            dPn.map().noalias() = G.map() * Qn.map();
        else
            dPn.map().noalias() = G.map().transpose() * Qn.map();
        for (int i = 0; i < n; ++i) {
            S nrm = row_norm(P, i);
            S mdl = nrm + S(kNormEps);
            // sum_j G_ij C_ij recovers <p_i, dPn_i> / |p_i| without a second gemm
            S dot = 0;
            for (int j = 0; j < m; ++j) {
                S g = swap ? G(j, i) : G(i, j);
                S c = swap ? C(j, i) : C(i, j);
                dot += g * c;
            }
            // <p_i, dPn_i> = sum_j g_ij <p_i, qn_j> = mdl * sum_j g_ij C_ij, so the
            // normalization pullback dPn_i/mdl - p_i <p_i,dPn_i>/(nrm mdl^2) reduces to:
            S scale2 = nrm > S(0) ? dot / (nrm * mdl) : S(0);
            for (int c = 0; c < P.cols; ++c) dP(i, c) += dPn(i, c) / mdl - P(i, c) * scale2;
        }
    }

    static S c1_at(const Mat<S>& C, int i, int j, bool transposed) {
        return transposed ? C(j, i) : C(i, j);
    }
    static S& c1_ref(Mat<S>& C, int i, int j, bool transposed) {
        return transposed ? C(j, i) : C(i, j);
    }

    static void spmm(const NormAdj& adj, const Mat<S>& X, Mat<S>& Y) {
        std::fill(Y.d.begin(), Y.d.end(), S(0));
        for (int i = 0; i < adj.n; ++i)
            for (int k = adj.offs[i]; k < adj.offs[i + 1]; ++k) {
                int j = adj.nbrs[k];
                S w = S(adj.w[k]);
                for (int c = 0; c < X.cols; ++c) Y(i, c) += w * X(j, c);
            }
    }
};

using TapeD = GradTape<double>;
using TapeF = GradTape<float>;

}  // namespace gigamae
