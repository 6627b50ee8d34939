#pragma once

#include "gigamae/model.hpp"

#include <array>
#include <iostream>

namespace gigamae {

// One lambda-tilde weight per configured target subset, for each masked node
// class. Class-N nodes contribute no loss and carry no weights.
struct ClassWeights {
    std::vector<double> e, f, b;

    const std::vector<double>& for_class(NodeClass c) const {
        switch (c) {
            case NodeClass::E: return e;
            case NodeClass::F: return f;
            case NodeClass::B: return b;
            default: throw std::invalid_argument("ClassWeights: class N has no weights");
        }
    }

    void validate(size_t num_subsets) const {
        for (const auto* v : {&e, &f, &b}) {
            if (v->size() != num_subsets)
                throw std::invalid_argument("ClassWeights: one weight per subset required");
            for (double w : *v)
                if (w < 0) throw std::invalid_argument("ClassWeights: weights must be >= 0");
        }
    }
};

// (lambda1, lambda2, lambda3) -> (lambda3-lambda2, lambda3-lambda1,
// lambda1+lambda2-lambda3). Warns (stderr) when a transformed weight is
// negative; the framework requires them >= 0.
inline std::array<double, 3> lambda_transform(double l1, double l2, double l3,
                                              bool* warned = nullptr) {
    std::array<double, 3> t{l3 - l2, l3 - l1, l1 + l2 - l3};
    bool neg = t[0] < 0 || t[1] < 0 || t[2] < 0;
    if (warned) *warned = neg;
    if (neg && !warned)
        std::cerr << "warning: lambda transform produced a negative weight\n";
    return t;
}

inline std::array<double, 3> lambda_transform_inverse(double t1, double t2, double t3) {
    double l3 = t1 + t2 + t3;
    return {l3 - t2, l3 - t1, l3};
}

// exp(cos(s_i, t_j) / tau); plain (non-tape) form used by tests and tooling.
MatD discriminator_scores(const MatD& s_proj, const MatD& t, double tau);

// Per-node InfoNCE terms (identity projector); every entry <= 0.
std::vector<double> infonce_per_node(const MatD& p, const MatD& q, double tau);

struct LossBreakdown {
    double total = 0.0;
    // per subset: partial weighted sums split by node class (E, F, B)
    std::vector<std::array<double, 3>> per_subset_class;
    int contributing_nodes = 0;

    std::string to_kv() const;
};

template <typename S>
struct MultiTargetLoss {
    typename GradTape<S>::Id value;  // to be MAXIMIZED (trainer minimizes -value)
    LossBreakdown breakdown;
};

// Eq-13/14-style multi-target objective. z is the encoder output on the tape;
// targets are the full |V|-row target matrices (constants). For each subset
// the re-masked member targets are column-concatenated, z is re-masked,
// row-restricted to contributing nodes and projected, and the symmetric
// per-node InfoNCE terms are weighted by the node class's lambda-tilde and
// averaged over the contributing-node count.
template <typename S>
MultiTargetLoss<S> multi_target_loss(GradTape<S>& tape, ModelOnTape<S>& model,
                                     typename GradTape<S>::Id z, const std::vector<MatD>& targets,
                                     const std::vector<std::vector<int>>& subsets,
                                     const ClassWeights& weights,
                                     const std::vector<NodeClass>& node_class, double tau,
                                     bool negatives_all_nodes = false) {
    using Id = typename GradTape<S>::Id;
    weights.validate(subsets.size());
    if (subsets.empty()) throw std::invalid_argument("multi_target_loss: no subsets configured");
    int nv = int(node_class.size());
    for (const auto& t : targets)
        if (t.rows != nv) throw std::invalid_argument("multi_target_loss: target row mismatch");

    std::vector<int> idx;  // rows entering the loss
    int contributing = 0;
    for (int i = 0; i < nv; ++i) {
        if (node_class[i] != NodeClass::N) ++contributing;
        if (negatives_all_nodes || node_class[i] != NodeClass::N) idx.push_back(i);
    }
    if (contributing == 0) throw std::invalid_argument("multi_target_loss: no masked nodes");
    int n = int(idx.size());

    Id s_full = remask_source(tape, z, node_class);
    Id s_rows = tape.select_rows(s_full, idx);

    std::vector<MatD> t_masked;
    t_masked.reserve(targets.size());
    for (const auto& t : targets) t_masked.push_back(remask_target(t, node_class));

    MultiTargetLoss<S> out;
    out.breakdown.per_subset_class.assign(subsets.size(), {0.0, 0.0, 0.0});
    out.breakdown.contributing_nodes = contributing;

    Id total = tape.input(Mat<S>(1, 1));
    for (size_t si = 0; si < subsets.size(); ++si) {
        // subset target: column-concatenated members, restricted to idx rows
        int dsub = 0;
        for (int t : subsets[si]) dsub += t_masked[t].cols;
        Mat<S> tsub(n, dsub);
        int off = 0;
        for (int t : subsets[si]) {
            const MatD& tm = t_masked[t];
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < tm.cols; ++c) tsub(r, off + c) = S(tm(idx[r], c));
            off += tm.cols;
        }
        Id t_in = tape.input(std::move(tsub));

        Id proj = model.project(s_rows, subset_key(subsets[si]));
        Id c_pt = tape.cosine_matrix(proj, t_in);
        Id c_pp = tape.cosine_matrix(proj, proj);
        Id c_tt = tape.cosine_matrix(t_in, t_in);  // constant: no gradient flows
        Id lf = tape.infonce_scores(c_pt, c_pp, S(tau));
        Id lr = tape.infonce_scores(c_pt, c_tt, S(tau), /*transpose_pq=*/true);

        std::vector<S> w(n);
        for (int r = 0; r < n; ++r) {
            NodeClass c = node_class[idx[r]];
            double lam = c == NodeClass::N ? 0.0 : weights.for_class(c)[si];
            w[r] = S(lam / (2.0 * contributing));
        }
        // copies: pushing further ops may reallocate the tape's node storage
        Mat<S> vf = tape.val(lf);
        Mat<S> vr = tape.val(lr);
        Id fwd = tape.dot_const(lf, w);
        Id rev = tape.dot_const(lr, std::move(w));
        total = tape.add(total, tape.add(fwd, rev));
        for (int r = 0; r < n; ++r) {
            NodeClass c = node_class[idx[r]];
            if (c == NodeClass::N) continue;
            double lam = weights.for_class(c)[si];
            double term = lam * 0.5 * (double(vf(r, 0)) + double(vr(r, 0))) / contributing;
            out.breakdown.per_subset_class[si][int(c) - 1] += term;
        }
    }
    out.value = total;
    out.breakdown.total = double(tape.val(total)(0, 0));
    return out;
}

// ---- exact MI oracles over small discrete joints ----

// n-dimensional probability table over finite alphabets.
struct DiscreteJoint {
    std::vector<int> dims;
    std::vector<double> p;  // row-major over dims

    void validate() const;
    size_t index(const std::vector<int>& coord) const;
};

// Shannon entropy (nats) of the marginal over the given axes.
double joint_entropy(const DiscreteJoint& joint, const std::vector<int>& axes);

// I(G1; G2) between two disjoint groups of axes.
double mutual_information(const DiscreteJoint& joint, const std::vector<int>& g1,
                          const std::vector<int>& g2);

// I(G1; G2 | G3).
double conditional_mi(const DiscreteJoint& joint, const std::vector<int>& g1,
                      const std::vector<int>& g2, const std::vector<int>& cond);

// Three-way interaction information I(G1; G2; G3).
double interaction_information(const DiscreteJoint& joint, const std::vector<int>& g1,
                               const std::vector<int>& g2, const std::vector<int>& g3);

// Grouping-based front end: 2 groups -> MI, 3 groups -> interaction.
double exact_mi(const DiscreteJoint& joint, const std::vector<std::vector<int>>& grouping);

}  // namespace gigamae
