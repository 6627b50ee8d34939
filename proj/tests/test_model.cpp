#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gigamae/checkpoint.hpp"
#include "gigamae/gradcheck.hpp"
#include "gigamae/model.hpp"

#include <filesystem>
#include <random>

using namespace gigamae;
using TapeD = GradTape<double>;
using Id = TapeD::Id;

namespace {

Graph small_graph(uint64_t seed, int n = 7, int dim = 3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    Graph g;
    g.num_nodes = n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (u(rng) < 0.4) g.edges.push_back({i, j});
    g.features = MatD::randn(n, dim, rng);
    return g;
}

Model<double> small_model(uint64_t seed, int in_dim = 3, int hidden = 8, int out = 4) {
    return Model<double>::init(in_dim, hidden, out, {3, 2}, {{0}, {1}, {0, 1}}, seed);
}

MatD encode_once(Model<double>& m, const MatD& x, const std::vector<Edge>& edges) {
    TapeD tape;
    ModelOnTape<double> bound(tape, m, false);
    return tape.val(bound.encode(tape.input(x), build_adj_csr(edges, x.rows)));
}

}  // namespace

TEST_CASE("encode: permutation equivariance") {
    Graph g = small_graph(1);
    auto model = small_model(2);
    MatD z = encode_once(model, g.features, g.edges);

    std::vector<int> perm{3, 0, 6, 2, 5, 1, 4};  // perm[i] = new label of node i
    MatD xp(g.num_nodes, g.features.cols);
    for (int i = 0; i < g.num_nodes; ++i)
        for (int j = 0; j < g.features.cols; ++j) xp(perm[i], j) = g.features(i, j);
    std::vector<Edge> ep;
    for (auto [i, j] : g.edges)
        ep.push_back({std::min(perm[i], perm[j]), std::max(perm[i], perm[j])});
    std::sort(ep.begin(), ep.end());
    MatD zp = encode_once(model, xp, ep);
    for (int i = 0; i < g.num_nodes; ++i)
        for (int j = 0; j < z.cols; ++j)
            CHECK(zp(perm[i], j) == doctest::Approx(z(i, j)).epsilon(1e-10));
}

TEST_CASE("encode: with no surviving edges each row depends only on its own features") {
    Graph g = small_graph(3);
    auto model = small_model(4);
    MatD z = encode_once(model, g.features, {});
    MatD x2 = g.features;
    for (int i = 1; i < g.num_nodes; ++i)
        for (int j = 0; j < x2.cols; ++j) x2(i, j) += 1.5;  // perturb everyone but node 0
    MatD z2 = encode_once(model, x2, {});
    for (int j = 0; j < z.cols; ++j) CHECK(z2(0, j) == z(0, j));
}

TEST_CASE("encode: symmetric nodes get identical embeddings") {
    Graph g;
    g.num_nodes = 3;
    g.edges = {{0, 1}, {1, 2}};
    g.features = MatD(3, 3);
    for (int j = 0; j < 3; ++j) {
        g.features(0, j) = 0.3 * j + 0.1;
        g.features(2, j) = 0.3 * j + 0.1;  // ends identical
        g.features(1, j) = -0.2 * j;
    }
    auto model = small_model(5);
    MatD z = encode_once(model, g.features, g.edges);
    for (int j = 0; j < z.cols; ++j) CHECK(z(0, j) == doctest::Approx(z(2, j)).epsilon(1e-12));
}

TEST_CASE("remask: class-N rows are bitwise zero") {
    auto model = small_model(6);
    Graph g = small_graph(7, 5);
    MatD z = encode_once(model, g.features, g.edges);

    TapeD tape;
    Id zi = tape.input(z);
    std::vector<NodeClass> all_n(5, NodeClass::N);
    const auto& s0 = tape.val(remask_source(tape, zi, all_n));
    for (double v : s0.d) CHECK(v == 0.0);

    std::vector<NodeClass> all_b(5, NodeClass::B);
    const auto& s1 = tape.val(remask_source(tape, zi, all_b));
    CHECK(s1.d == z.d);

    std::vector<NodeClass> mixed{NodeClass::N, NodeClass::E, NodeClass::F, NodeClass::B,
                                 NodeClass::N};
    const auto& s2 = tape.val(remask_source(tape, zi, mixed));
    for (int j = 0; j < z.cols; ++j) {
        CHECK(s2(0, j) == 0.0);
        CHECK(s2(1, j) == z(1, j));
        CHECK(s2(2, j) == z(2, j));
        CHECK(s2(3, j) == z(3, j));
        CHECK(s2(4, j) == 0.0);
    }

    MatD t = remask_target(z, mixed);
    for (int j = 0; j < z.cols; ++j) {
        CHECK(t(0, j) == 0.0);
        CHECK(t(1, j) == z(1, j));
        CHECK(t(4, j) == 0.0);
    }
}

TEST_CASE("project: shapes, subset coverage, homogeneity at zero") {
    auto model = small_model(8);
    CHECK(model.projectors.count("0") == 1);
    CHECK(model.projectors.count("1") == 1);
    CHECK(model.projectors.count("0+1") == 1);
    CHECK(subset_key({0, 1}) == "0+1");

    TapeD tape;
    ModelOnTape<double> bound(tape, model, false);
    std::mt19937_64 rng(9);
    Id s = tape.input(MatD::randn(5, 4, rng));
    CHECK(tape.val(bound.project(s, "0")).cols == 3);
    CHECK(tape.val(bound.project(s, "1")).cols == 2);
    CHECK(tape.val(bound.project(s, "0+1")).cols == 5);
    CHECK_THROWS_AS(bound.project(s, "2"), std::invalid_argument);

    // zero biases -> zero row maps to zero row (PReLU is homogeneous at 0)
    auto zb = small_model(10);
    for (auto& [key, p] : zb.projectors) {
        p.b1 = MatD(p.b1.rows, p.b1.cols);
        p.b2 = MatD(p.b2.rows, p.b2.cols);
    }
    TapeD tape2;
    ModelOnTape<double> bound2(tape2, zb, false);
    MatD in(2, 4);
    in(1, 0) = 1.0;  // row 0 all-zero
    const auto& out = tape2.val(bound2.project(tape2.input(in), "0"));
    for (int j = 0; j < out.cols; ++j) CHECK(out(0, j) == 0.0);
}

TEST_CASE("gradients: encoder and project(encode) pass finite differences") {
    Graph g = small_graph(11, 6);
    auto adj = build_adj_csr(g.edges, g.num_nodes);
    for (uint64_t s = 0; s < 20; ++s) {
        auto model = small_model(100 + s);
        auto named = model.params();
        std::vector<MatD> init;
        for (auto& [name, mat] : named) init.push_back(*mat);
        bool through_projector = s % 2 == 1;

        ScalarFn fn = [&](const std::vector<MatD>& ps, std::vector<MatD>* grads) {
            auto named2 = model.params();
            for (size_t i = 0; i < named2.size(); ++i) *named2[i].second = ps[i];
            TapeD tape;
            ModelOnTape<double> bound(tape, model, grads != nullptr);
            Id z = bound.encode(tape.input(g.features), adj);
            if (through_projector) z = bound.project(z, s % 4 == 1 ? "0+1" : "1");
            // weighted scalar probe
            std::mt19937_64 rng(mix_seed(s, 0xabc));
            int rows = tape.val(z).rows, cols = tape.val(z).cols;
            Id left = tape.input(MatD::randn(1, rows, rng));
            Id right = tape.input(MatD::randn(cols, 1, rng));
            Id root = tape.matmul(tape.matmul(left, z), right);
            double value = tape.val(root)(0, 0);
            if (grads) {
                tape.backward(root);
                for (auto& [name, mat] : named2) grads->push_back(bound.grad(name));
            }
            return value;
        };
        auto rep = grad_check(fn, init);
        INFO("instance ", s, " max_rel_err=", rep.max_rel_err, " param=", rep.worst_param);
        CHECK(rep.ok(1e-4));
    }
}

TEST_CASE("checkpoint: save and load round-trips parameters and metadata") {
    auto model = small_model(12);
    auto dir = (std::filesystem::temp_directory_path() / "gigamae_test_ckpt").string();
    std::filesystem::remove_all(dir);
    save_model(dir, model, {3, 2}, 4, "deadbeefdeadbeef");
    auto loaded = load_model<double>(dir);
    CHECK(loaded.config_hash == "deadbeefdeadbeef");
    CHECK(loaded.target_dims == std::vector<int>{3, 2});
    auto a = model.params();
    auto b = loaded.model.params();
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].first == b[i].first);
        REQUIRE(a[i].second->size() == b[i].second->size());
        for (size_t k = 0; k < a[i].second->size(); ++k)
            CHECK(float(a[i].second->d[k]) == float(b[i].second->d[k]));  // f32 storage
    }
    CHECK_THROWS_AS(load_model<double>(dir + "_missing"), std::runtime_error);
}

TEST_CASE("model init validates arguments") {
    CHECK_THROWS_AS(Model<double>::init(3, 6, 4, {3}, {{0}}, 0, 4), std::invalid_argument);
    CHECK_THROWS_AS(Model<double>::init(3, 8, 4, {3}, {{0, 1}}, 0, 4), std::invalid_argument);
}
