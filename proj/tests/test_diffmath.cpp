#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gigamae/gradcheck.hpp"
#include "gigamae/graph_ops.hpp"
#include "gigamae/svd.hpp"
#include "gigamae/tape.hpp"

#include <random>

using namespace gigamae;
using TapeD = GradTape<double>;
using Id = TapeD::Id;

namespace {

MatD rand_mat(int r, int c, uint64_t seed, double away_from_zero = 0.0) {
    std::mt19937_64 rng(mix_seed(seed, 0xd1f));
    MatD m = MatD::randn(r, c, rng);
    if (away_from_zero > 0)
        for (auto& v : m.d) v += v >= 0 ? away_from_zero : -away_from_zero;
    return m;
}

// Reduces an op output to a scalar through fixed random mixing matrices so
// every output entry influences the objective with a distinct weight.
Id probe(TapeD& tape, Id y, uint64_t seed) {
    int rows = tape.val(y).rows, cols = tape.val(y).cols;  // copy before further pushes
    Id left = tape.input(rand_mat(1, rows, mix_seed(seed, 1)));
    Id right = tape.input(rand_mat(cols, 1, mix_seed(seed, 2)));
    return tape.matmul(tape.matmul(left, y), right);
}

using Builder = std::function<Id(TapeD&, const std::vector<Id>&)>;

GradCheckReport check_fn(const Builder& build, std::vector<MatD> params) {
    ScalarFn fn = [&](const std::vector<MatD>& ps, std::vector<MatD>* grads) {
        TapeD tape;
        std::vector<Id> ids;
        for (const auto& p : ps) ids.push_back(tape.input(p, grads != nullptr));
        Id root = build(tape, ids);
        double v = tape.val(root)(0, 0);
        if (grads) {
            tape.backward(root);
            for (Id id : ids) grads->push_back(tape.grad(id));
        }
        return v;
    };
    return grad_check(fn, std::move(params));
}

void check_many(const char* what, const Builder& build,
                const std::function<std::vector<MatD>(uint64_t)>& make_params, int count = 20) {
    for (uint64_t s = 0; s < uint64_t(count); ++s) {
        auto rep = check_fn(build, make_params(s));
        INFO(what, " instance ", s, " max_rel_err=", rep.max_rel_err, " param=", rep.worst_param,
             " entry=", rep.worst_entry);
        CHECK(rep.ok(1e-4));
    }
}

}  // namespace

TEST_CASE("grad_check: linear function has exact all-ones gradient") {
    ScalarFn fn = [](const std::vector<MatD>& ps, std::vector<MatD>* grads) {
        double acc = 0;
        for (double v : ps[0].d) acc += v;
        if (grads) grads->push_back(MatD(ps[0].rows, ps[0].cols, 1.0));
        return acc;
    };
    auto rep = grad_check(fn, {rand_mat(3, 4, 0)});
    CHECK(rep.max_rel_err < 1e-9);
}

TEST_CASE("gradients: matmul / add / add_bias / scale") {
    check_many("matmul",
               [](TapeD& t, const std::vector<Id>& in) {
                   return probe(t, t.matmul(in[0], in[1]), 7);
               },
               [](uint64_t s) {
                   return std::vector<MatD>{rand_mat(4, 3, s), rand_mat(3, 5, s + 100)};
               });
    check_many("add",
               [](TapeD& t, const std::vector<Id>& in) { return probe(t, t.add(in[0], in[1]), 8); },
               [](uint64_t s) {
                   return std::vector<MatD>{rand_mat(4, 3, s + 1), rand_mat(4, 3, s + 200)};
               });
    check_many("add_bias",
               [](TapeD& t, const std::vector<Id>& in) {
                   return probe(t, t.add_bias(in[0], in[1]), 9);
               },
               [](uint64_t s) {
                   return std::vector<MatD>{rand_mat(4, 3, s + 2), rand_mat(1, 3, s + 300)};
               });
    check_many("scale",
               [](TapeD& t, const std::vector<Id>& in) { return probe(t, t.scale(in[0], -2.5), 10); },
               [](uint64_t s) { return std::vector<MatD>{rand_mat(5, 2, s + 3)}; });
}

TEST_CASE("gradients: prelu / elu away from the kink") {
    check_many("prelu",
               [](TapeD& t, const std::vector<Id>& in) {
                   return probe(t, t.prelu(in[0], in[1]), 11);
               },
               [](uint64_t s) {
                   return std::vector<MatD>{rand_mat(4, 4, s + 4, 0.2), MatD(1, 1, 0.3)};
               });
    check_many("elu",
               [](TapeD& t, const std::vector<Id>& in) { return probe(t, t.elu(in[0]), 12); },
               [](uint64_t s) { return std::vector<MatD>{rand_mat(4, 4, s + 5, 0.2)}; });
}

TEST_CASE("gradients: normalize / concat / exp / logsumexp / reductions") {
    check_many("row_l2_normalize",
               [](TapeD& t, const std::vector<Id>& in) {
                   return probe(t, t.row_l2_normalize(in[0]), 13);
               },
               [](uint64_t s) { return std::vector<MatD>{rand_mat(5, 3, s + 6, 0.1)}; });
    check_many("concat_cols",
               [](TapeD& t, const std::vector<Id>& in) {
                   return probe(t, t.concat_cols({in[0], in[1]}), 14);
               },
               [](uint64_t s) {
                   return std::vector<MatD>{rand_mat(4, 2, s + 7), rand_mat(4, 3, s + 400)};
               });
    check_many("expm",
               [](TapeD& t, const std::vector<Id>& in) { return probe(t, t.expm(in[0]), 15); },
               [](uint64_t s) { return std::vector<MatD>{rand_mat(3, 3, s + 8)}; });
    check_many("logsumexp_rows",
               [](TapeD& t, const std::vector<Id>& in) {
                   return probe(t, t.logsumexp_rows(in[0]), 16);
               },
               [](uint64_t s) { return std::vector<MatD>{rand_mat(4, 5, s + 9)}; });
    check_many("reduce_sum",
               [](TapeD& t, const std::vector<Id>& in) { return t.reduce_sum(in[0]); },
               [](uint64_t s) { return std::vector<MatD>{rand_mat(4, 3, s + 10)}; });
    check_many("reduce_mean",
               [](TapeD& t, const std::vector<Id>& in) { return t.reduce_mean(in[0]); },
               [](uint64_t s) { return std::vector<MatD>{rand_mat(4, 3, s + 11)}; });
}

TEST_CASE("gradients: select_rows / mask_rows / dot_const") {
    check_many("select_rows",
               [](TapeD& t, const std::vector<Id>& in) {
                   return probe(t, t.select_rows(in[0], {4, 1, 1, 0}), 17);
               },
               [](uint64_t s) { return std::vector<MatD>{rand_mat(5, 3, s + 12)}; });
    check_many("mask_rows",
               [](TapeD& t, const std::vector<Id>& in) {
                   return probe(t, t.mask_rows(in[0], {1, 0, 1, 0, 1}), 18);
               },
               [](uint64_t s) { return std::vector<MatD>{rand_mat(5, 3, s + 13)}; });
    check_many("dot_const",
               [](TapeD& t, const std::vector<Id>& in) {
                   return t.dot_const(in[0], {0.5, -1.25, 2.0, 0.75});
               },
               [](uint64_t s) { return std::vector<MatD>{rand_mat(4, 1, s + 14)}; });
}

TEST_CASE("gradients: cosine_matrix / infonce_scores") {
    check_many("cosine_matrix",
               [](TapeD& t, const std::vector<Id>& in) {
                   return probe(t, t.cosine_matrix(in[0], in[1]), 19);
               },
               [](uint64_t s) {
                   return std::vector<MatD>{rand_mat(4, 3, s + 15, 0.1), rand_mat(5, 3, s + 500, 0.1)};
               });
    check_many("infonce_scores forward",
               [](TapeD& t, const std::vector<Id>& in) {
                   Id cpt = t.cosine_matrix(in[0], in[1]);
                   Id cpp = t.cosine_matrix(in[0], in[0]);
                   return t.reduce_sum(t.infonce_scores(cpt, cpp, 0.5));
               },
               [](uint64_t s) {
                   return std::vector<MatD>{rand_mat(5, 4, s + 16, 0.1), rand_mat(5, 4, s + 600, 0.1)};
               });
    check_many("infonce_scores transposed reverse direction",
               [](TapeD& t, const std::vector<Id>& in) {
                   Id cpt = t.cosine_matrix(in[0], in[1]);
                   Id ctt = t.cosine_matrix(in[1], in[1]);
                   return t.reduce_sum(t.infonce_scores(cpt, ctt, 0.7, true));
               },
               [](uint64_t s) {
                   return std::vector<MatD>{rand_mat(5, 4, s + 17, 0.1), rand_mat(5, 4, s + 700, 0.1)};
               });
}

TEST_CASE("gradients: gat_attention / gcn_aggregate / edge_bce") {
    std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 3}, {0, 4}, {3, 4}, {1, 4}};
    auto csr = build_adj_csr(edges, 5);
    auto norm = build_norm_adj(edges, 5);
    check_many("gat_attention 2 heads",
               [&](TapeD& t, const std::vector<Id>& in) {
                   return probe(t, t.gat_attention(in[0], in[1], in[2], csr, 2), 20);
               },
               [](uint64_t s) {
                   return std::vector<MatD>{rand_mat(5, 6, s + 18), rand_mat(2, 3, s + 800),
                                            rand_mat(2, 3, s + 900)};
               });
    check_many("gcn_aggregate",
               [&](TapeD& t, const std::vector<Id>& in) {
                   return probe(t, t.gcn_aggregate(in[0], norm), 21);
               },
               [](uint64_t s) { return std::vector<MatD>{rand_mat(5, 3, s + 19)}; });
    auto pos = std::make_shared<std::vector<std::pair<int, int>>>(
        std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {3, 4}});
    auto neg = std::make_shared<std::vector<std::pair<int, int>>>(
        std::vector<std::pair<int, int>>{{0, 3}, {2, 4}});
    check_many("edge_bce",
               [&](TapeD& t, const std::vector<Id>& in) { return t.edge_bce(in[0], pos, neg); },
               [](uint64_t s) { return std::vector<MatD>{rand_mat(5, 3, s + 20)}; });
}

TEST_CASE("gradients: composition of depth >= 4 (MLP projector into symmetric InfoNCE)") {
    check_many("mlp + infonce composition",
               [](TapeD& t, const std::vector<Id>& in) {
                   // P: 6x8 source, params w1 (8x8), b1, w2 (8x8), b2; Q constant-free input
                   Id h = t.prelu(t.add_bias(t.matmul(in[0], in[1]), in[2]), in[5]);
                   Id p = t.add_bias(t.matmul(h, in[3]), in[4]);
                   Id cpt = t.cosine_matrix(p, in[6]);
                   Id cpp = t.cosine_matrix(p, p);
                   Id ctt = t.cosine_matrix(in[6], in[6]);
                   Id fwd = t.infonce_scores(cpt, cpp, 0.5);
                   Id rev = t.infonce_scores(cpt, ctt, 0.5, true);
                   return t.scale(t.add(t.reduce_sum(fwd), t.reduce_sum(rev)), 0.5);
               },
               [](uint64_t s) {
                   return std::vector<MatD>{rand_mat(6, 8, s + 21),       rand_mat(8, 8, s + 22),
                                            rand_mat(1, 8, s + 23),       rand_mat(8, 8, s + 24),
                                            rand_mat(1, 8, s + 25),       MatD(1, 1, 0.25),
                                            rand_mat(6, 8, s + 26, 0.1)};
               });
}

TEST_CASE("cosine_matrix: examples, brute force and bound") {
    TapeD tape;
    Id i2 = tape.input(MatD::identity(2));
    const auto& c = tape.val(tape.cosine_matrix(i2, i2));
    CHECK(c(0, 0) == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(c(0, 1) == doctest::Approx(0.0).epsilon(1e-11));

    MatD p(1, 2), q(1, 2);
    p(0, 0) = 1; p(0, 1) = 1;
    q(0, 0) = -1; q(0, 1) = -1;
    const auto& anti = tape.val(tape.cosine_matrix(tape.input(p), tape.input(q)));
    CHECK(anti(0, 0) == doctest::Approx(-1.0).epsilon(1e-9));

    for (uint64_t s = 0; s < 5; ++s) {
        MatD a = rand_mat(3, 4, s + 30), b = rand_mat(5, 4, s + 40);
        const auto& cm = tape.val(tape.cosine_matrix(tape.input(a), tape.input(b)));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 5; ++j) {
                double dot = 0, na = 0, nb = 0;
                for (int k = 0; k < 4; ++k) {
                    dot += a(i, k) * b(j, k);
                    na += a(i, k) * a(i, k);
                    nb += b(j, k) * b(j, k);
                }
                double want = dot / ((std::sqrt(na) + 1e-12) * (std::sqrt(nb) + 1e-12));
                CHECK(cm(i, j) == doctest::Approx(want).epsilon(1e-12));
                CHECK(cm(i, j) >= -1.0 - 1e-9);
                CHECK(cm(i, j) <= 1.0 + 1e-9);
            }
    }

    MatD zero_row(2, 3);  // zero-norm rows stay finite
    const auto& cz = tape.val(tape.cosine_matrix(tape.input(zero_row), tape.input(rand_mat(2, 3, 50))));
    for (double v : cz.d) CHECK(std::isfinite(v));
}

TEST_CASE("logsumexp_rows: examples, stability, long-double oracle, bounds") {
    TapeD tape;
    MatD row(1, 2);
    const auto& lse0 = tape.val(tape.logsumexp_rows(tape.input(row)));
    CHECK(lse0(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    MatD big(1, 2, 1000.0);
    const auto& lse1 = tape.val(tape.logsumexp_rows(tape.input(big)));
    CHECK(lse1(0, 0) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-12));

    for (uint64_t s = 0; s < 10; ++s) {
        MatD m = rand_mat(3, 6, s + 60);
        const auto& lse = tape.val(tape.logsumexp_rows(tape.input(m)));
        for (int i = 0; i < m.rows; ++i) {
            long double acc = 0;
            double mx = -1e300;
            for (int j = 0; j < m.cols; ++j) mx = std::max(mx, m(i, j));
            for (int j = 0; j < m.cols; ++j) acc += expl((long double)m(i, j));
            CHECK(lse(i, 0) == doctest::Approx(double(logl(acc))).epsilon(1e-12));
            CHECK(lse(i, 0) >= mx);
            CHECK(lse(i, 0) <= mx + std::log(double(m.cols)) + 1e-12);
        }
    }
}

TEST_CASE("tape: unused parameters keep zero gradients") {
    TapeD tape;
    Id used = tape.input(rand_mat(2, 2, 70), true);
    Id unused = tape.input(rand_mat(3, 3, 71), true);
    tape.backward(tape.reduce_sum(used));
    for (double v : tape.grad(unused).d) CHECK(v == 0.0);
}

// ---- forward-only SVD ----

namespace {

// independent oracle: cyclic Jacobi eigendecomposition of the Gram matrix
std::vector<double> jacobi_singular_values(const MatD& m) {
    int d = m.cols;
    MatD a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double acc = 0;
            for (int r = 0; r < m.rows; ++r) acc += m(r, i) * m(r, j);
            a(i, j) = acc;
        }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-24) break;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) {
                if (std::abs(a(p, q)) < 1e-30) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < d; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < d; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> s;
    for (int i = 0; i < d; ++i) s.push_back(std::sqrt(std::max(0.0, a(i, i))));
    std::sort(s.rbegin(), s.rend());
    return s;
}

}  // namespace

TEST_CASE("svd_topk: identity and rank-1") {
    auto id3 = svd_topk(MatD::identity(3), 3);
    for (double s : id3.s) CHECK(s == doctest::Approx(1.0).epsilon(1e-10));

    MatD u = rand_mat(6, 1, 80), v = rand_mat(4, 1, 81);
    MatD outer(6, 4);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 4; ++j) outer(i, j) = u(i, 0) * v(j, 0);
    auto r1 = svd_topk(outer, 1);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(r1.u(i, 0) * r1.s[0] * r1.v(j, 0) == doctest::Approx(outer(i, j)).epsilon(1e-10));
}

TEST_CASE("svd_topk: random 20x8 full decomposition vs Jacobi oracle") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        MatD m = rand_mat(20, 8, 90 + seed);
        auto r = svd_topk(m, 8);

        auto oracle = jacobi_singular_values(m);
        for (int k = 0; k < 8; ++k) CHECK(r.s[k] == doctest::Approx(oracle[k]).epsilon(1e-8));
        for (int k = 1; k < 8; ++k) CHECK(r.s[k] <= r.s[k - 1] + 1e-12);

        // orthonormal columns
        for (const MatD* side : {&r.u, &r.v})
            for (int a = 0; a < 8; ++a)
                for (int b = 0; b < 8; ++b) {
                    double dot = 0;
                    for (int i = 0; i < side->rows; ++i) dot += (*side)(i, a) * (*side)(i, b);
                    CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-8));
                }

        // full-rank reconstruction
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 8; ++j) {
                double acc = 0;
                for (int k = 0; k < 8; ++k) acc += r.u(i, k) * r.s[k] * r.v(j, k);
                CHECK(acc == doctest::Approx(m(i, j)).epsilon(1e-8));
            }
    }
}

TEST_CASE("svd_topk: argument validation") {
    CHECK_THROWS_AS(svd_topk(MatD::identity(3), 0), std::invalid_argument);
    CHECK_THROWS_AS(svd_topk(MatD::identity(3), 4), std::invalid_argument);
}
