#include "gigamae/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace gigamae {

namespace {

MatD cosine_rows(const MatD& p, const MatD& q) {
    if (p.cols != q.cols) throw std::invalid_argument("cosine: dim mismatch");
    auto norm = [](const MatD& m, int i) {
        double acc = 0;
        for (int j = 0; j < m.cols; ++j) acc += m(i, j) * m(i, j);
        return std::sqrt(acc) + 1e-12;
    };
    MatD c(p.rows, q.rows);
    for (int i = 0; i < p.rows; ++i) {
        double ni = norm(p, i);
        for (int j = 0; j < q.rows; ++j) {
            double dot = 0;
            for (int k = 0; k < p.cols; ++k) dot += p(i, k) * q(j, k);
            c(i, j) = dot / (ni * norm(q, j));
        }
    }
    return c;
}

}  // namespace

MatD discriminator_scores(const MatD& s_proj, const MatD& t, double tau) {
    if (tau <= 0) throw std::invalid_argument("discriminator_scores: tau must be positive");
    MatD c = cosine_rows(s_proj, t);
    for (auto& v : c.d) v = std::exp(v / tau);
    return c;
}

std::vector<double> infonce_per_node(const MatD& p, const MatD& q, double tau) {
    if (p.rows != q.rows || p.cols != q.cols)
        throw std::invalid_argument("infonce_per_node: shape mismatch");
    if (p.rows == 0) throw std::invalid_argument("infonce_per_node: empty input");
    if (tau <= 0) throw std::invalid_argument("infonce_per_node: tau must be positive");
    MatD cpq = cosine_rows(p, q);
    MatD cpp = cosine_rows(p, p);
    int n = p.rows;
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            mx = std::max(mx, cpq(i, j) / tau);
            if (j != i) mx = std::max(mx, cpp(i, j) / tau);
        }
        double acc = 0;
        for (int j = 0; j < n; ++j) {
            acc += std::exp(cpq(i, j) / tau - mx);
            if (j != i) acc += std::exp(cpp(i, j) / tau - mx);
        }
        out[i] = cpq(i, i) / tau - (mx + std::log(acc));
    }
    return out;
}

std::string LossBreakdown::to_kv() const {
    std::ostringstream os;
    os.precision(10);
    os << "total=" << total << "\ncontributing_nodes=" << contributing_nodes << "\n";
    const char* cls = "EFB";
    for (size_t s = 0; s < per_subset_class.size(); ++s)
        for (int c = 0; c < 3; ++c)
            os << "subset" << s << "." << cls[c] << "=" << per_subset_class[s][c] << "\n";
    return os.str();
}

void DiscreteJoint::validate() const {
    size_t expect = 1;
    for (int d : dims) {
        if (d < 1) throw std::invalid_argument("DiscreteJoint: empty axis");
        expect *= size_t(d);
    }
    if (p.size() != expect) throw std::invalid_argument("DiscreteJoint: size mismatch");
    double total = 0;
    for (double v : p) {
        if (v < 0) throw std::invalid_argument("DiscreteJoint: negative entry");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("DiscreteJoint: mass != 1");
}

size_t DiscreteJoint::index(const std::vector<int>& coord) const {
    size_t ix = 0;
    for (size_t a = 0; a < dims.size(); ++a) ix = ix * size_t(dims[a]) + size_t(coord[a]);
    return ix;
}

namespace {

void check_axes(const DiscreteJoint& joint, const std::vector<int>& axes) {
    for (int a : axes)
        if (a < 0 || a >= int(joint.dims.size()))
            throw std::invalid_argument("exact_mi: axis out of range");
}

// marginal distribution over the given axes, flattened in axis order
std::vector<double> marginal(const DiscreteJoint& joint, const std::vector<int>& axes) {
    check_axes(joint, axes);
    size_t msize = 1;
    for (int a : axes) msize *= size_t(joint.dims[a]);
    std::vector<double> m(msize, 0.0);
    std::vector<int> coord(joint.dims.size(), 0);
    for (size_t ix = 0; ix < joint.p.size(); ++ix) {
        size_t mi = 0;
        for (int a : axes) mi = mi * size_t(joint.dims[a]) + size_t(coord[a]);
        m[mi] += joint.p[ix];
        for (int a = int(joint.dims.size()) - 1; a >= 0; --a) {
            if (++coord[a] < joint.dims[a]) break;
            coord[a] = 0;
        }
    }
    return m;
}

double entropy_of(const std::vector<double>& p) {
    double h = 0;
    for (double v : p)
        if (v > 0) h -= v * std::log(v);  // 0 log 0 := 0
    return h;
}

std::vector<int> concat_axes(std::initializer_list<const std::vector<int>*> groups) {
    std::vector<int> out;
    for (const auto* g : groups) out.insert(out.end(), g->begin(), g->end());
    return out;
}

void check_disjoint(std::initializer_list<const std::vector<int>*> groups) {
    std::vector<int> all = concat_axes(groups);
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw std::invalid_argument("exact_mi: axis groups must be disjoint");
    for (const auto* g : groups)
        if (g->empty()) throw std::invalid_argument("exact_mi: empty axis group");
}

}  // namespace

double joint_entropy(const DiscreteJoint& joint, const std::vector<int>& axes) {
    return entropy_of(marginal(joint, axes));
}

double mutual_information(const DiscreteJoint& joint, const std::vector<int>& g1,
                          const std::vector<int>& g2) {
    check_disjoint({&g1, &g2});
    return joint_entropy(joint, g1) + joint_entropy(joint, g2) -
           joint_entropy(joint, concat_axes({&g1, &g2}));
}

double conditional_mi(const DiscreteJoint& joint, const std::vector<int>& g1,
                      const std::vector<int>& g2, const std::vector<int>& cond) {
    check_disjoint({&g1, &g2, &cond});
    return joint_entropy(joint, concat_axes({&g1, &cond})) +
           joint_entropy(joint, concat_axes({&g2, &cond})) -
           joint_entropy(joint, concat_axes({&g1, &g2, &cond})) - joint_entropy(joint, cond);
}

double interaction_information(const DiscreteJoint& joint, const std::vector<int>& g1,
                               const std::vector<int>& g2, const std::vector<int>& g3) {
    check_disjoint({&g1, &g2, &g3});
    return mutual_information(joint, g1, g2) - conditional_mi(joint, g1, g2, g3);
}

double exact_mi(const DiscreteJoint& joint, const std::vector<std::vector<int>>& grouping) {
    joint.validate();
    if (grouping.size() == 2) return mutual_information(joint, grouping[0], grouping[1]);
    if (grouping.size() == 3)
        return interaction_information(joint, grouping[0], grouping[1], grouping[2]);
    throw std::invalid_argument("exact_mi: grouping must have 2 or 3 groups");
}

}  // namespace gigamae
