#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gigamae/graph.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

using namespace gigamae;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
    auto dir = fs::temp_directory_path() / "gigamae_test_graph";
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
    auto p = tmp_dir() / name;
    std::ofstream(p) << content;
    return p;
}

Graph random_graph(int n, double p_edge, uint64_t seed, int dim = 3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    Graph g;
    g.num_nodes = n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (u(rng) < p_edge) g.edges.push_back({i, j});
    g.features = MatD::randn(n, dim, rng);
    return g;
}

}  // namespace

TEST_CASE("load_graph: 3-node path") {
    auto f = write_file("path_feat.tsv", "0\t1.0,0.0\n1\t0.5,0.5\n2\t0.0,1.0\n");
    auto e = write_file("path_edges.tsv", "0\t1\n1\t2\n");
    Graph g = load_graph(f.string(), e.string());
    CHECK(g.num_nodes == 3);
    CHECK(g.edges.size() == 2);
    CHECK(g.feature_dim() == 2);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 2));
    CHECK_FALSE(g.has_edge(0, 2));
}

TEST_CASE("load_graph: duplicate and reversed edges collapse") {
    auto f = write_file("dup_feat.tsv", "0\t1\n1\t2\n2\t3\n");
    auto e = write_file("dup_edges.tsv", "1\t2\n2\t1\n1\t2\n");
    Graph g = load_graph(f.string(), e.string());
    CHECK(g.edges.size() == 1);
    CHECK(g.edges[0] == Edge{1, 2});
}

TEST_CASE("load_graph: parse errors name the file and line") {
    auto f = write_file("bad_feat.tsv", "0\t1.0,2.0\n1\t1.0\n");
    auto e = write_file("ok_edges.tsv", "0\t1\n");
    CHECK_THROWS_WITH_AS(load_graph(f.string(), e.string()),
                         doctest::Contains("bad_feat.tsv:2"), std::runtime_error);

    auto f2 = write_file("bad_feat2.tsv", "0\t1.0,x\n");
    CHECK_THROWS_WITH_AS(load_graph(f2.string(), e.string()), doctest::Contains("bad_feat2.tsv:1"),
                         std::runtime_error);

    auto f3 = write_file("ok_feat.tsv", "0\t1\n1\t2\n");
    auto e3 = write_file("oob_edges.tsv", "0\t5\n");
    CHECK_THROWS_AS(load_graph(f3.string(), e3.string()), std::runtime_error);
}

TEST_CASE("load_graph: labels") {
    auto f = write_file("lab_feat.tsv", "0\t1\n1\t2\n2\t3\n");
    auto e = write_file("lab_edges.tsv", "0\t1\n1\t2\n");
    auto l = write_file("lab_labels.tsv", "0\t0\n1\t1\n2\t1\n");
    Graph g = load_graph(f.string(), e.string(), l.string());
    REQUIRE(g.labels.has_value());
    CHECK(*g.num_classes == 2);
    CHECK((*g.labels)[2] == 1);
}

TEST_CASE("split_edges: 85/5/10 on 100 edges") {
    Graph g;
    g.num_nodes = 102;
    for (int i = 0; i < 100; ++i) g.edges.push_back({i, i + 1});
    g.features = MatD(102, 1, 1.0);
    auto s = split_edges(g, {0.85, 0.05, 0.10}, 3);
    CHECK(s.train_edges.size() == 85);
    CHECK(s.valid_edges.size() == 5);
    CHECK(s.test_edges.size() == 10);
    CHECK(s.valid_neg.size() == 5);
    CHECK(s.test_neg.size() == 10);
}

TEST_CASE("split_edges: degenerate all-train split") {
    Graph g = random_graph(20, 0.3, 11);
    REQUIRE(g.edges.size() >= 10);
    auto s = split_edges(g, {1.0, 0.0, 0.0}, 5);
    CHECK(s.train_edges.size() == g.edges.size());
    CHECK(s.valid_edges.empty());
    CHECK(s.test_edges.empty());
}

TEST_CASE("split_edges: determinism and bad fractions") {
    Graph g = random_graph(25, 0.3, 12);
    auto a = split_edges(g, {0.8, 0.1, 0.1}, 42);
    auto b = split_edges(g, {0.8, 0.1, 0.1}, 42);
    CHECK(a.train_edges == b.train_edges);
    CHECK(a.valid_neg == b.valid_neg);
    CHECK(a.test_neg == b.test_neg);
    CHECK_THROWS_AS(split_edges(g, {0.8, 0.1, 0.2}, 1), std::invalid_argument);
}

TEST_CASE("split_edges: partition property on random graphs") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Graph g = random_graph(20 + int(seed), 0.4, 100 + seed);
        if (g.edges.size() < 10 || g.edges.size() > 200) continue;
        auto s = split_edges(g, {0.7, 0.15, 0.15}, seed);
        std::set<Edge> all(g.edges.begin(), g.edges.end());
        std::set<Edge> got;
        for (const auto* part : {&s.train_edges, &s.valid_edges, &s.test_edges})
            for (auto e : *part) {
                CHECK(all.count(e) == 1);
                CHECK(got.insert(e).second);  // pairwise disjoint
            }
        CHECK(got.size() == all.size());  // union covers
        for (const auto* negs : {&s.valid_neg, &s.test_neg})
            for (auto e : *negs) CHECK(all.count(e) == 0);
    }
}

TEST_CASE("sample_negative_edges: exhaustive and infeasible cases") {
    Graph k4;
    k4.num_nodes = 4;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) k4.edges.push_back({i, j});
    k4.features = MatD(4, 1, 1.0);
    CHECK_THROWS_AS(sample_negative_edges(k4, 1, 0), std::invalid_argument);

    Graph empty3;
    empty3.num_nodes = 3;
    empty3.features = MatD(3, 1, 1.0);
    auto negs = sample_negative_edges(empty3, 3, 0);
    CHECK(negs == std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}});

    Graph path;
    path.num_nodes = 3;
    path.edges = {{0, 1}, {1, 2}};
    path.features = MatD(3, 1, 1.0);
    auto one = sample_negative_edges(path, 1, 7);
    CHECK(one == std::vector<Edge>{{0, 2}});
}

TEST_CASE("sample_negative_edges: never hits a true edge") {
    std::mt19937_64 rng(5);
    int sampled = 0;
    for (uint64_t seed = 0; sampled < 1000; ++seed) {
        Graph g = random_graph(10 + int(seed % 41), 0.3, 500 + seed);
        size_t possible = size_t(g.num_nodes) * (g.num_nodes - 1) / 2 - g.edges.size();
        size_t want = std::min<size_t>(possible, 25);
        if (want == 0) continue;
        auto negs = sample_negative_edges(g, want, seed);
        CHECK(negs.size() == want);
        std::set<Edge> seen;
        for (auto e : negs) {
            CHECK_FALSE(g.has_edge(e.first, e.second));
            CHECK(seen.insert(e).second);
            ++sampled;
        }
    }
}

TEST_CASE("embedding cache: bit-exact round trip") {
    EmbeddingMatrix m;
    m.name = "probe";
    m.rows = 2;
    m.cols = 2;
    m.data = {1.0f, 0.0f, 0.0f, 1.0f};
    m.meta["dim"] = "2";
    auto p = (tmp_dir() / "id.emb").string();
    write_embedding(p, m);
    auto back = read_embedding(p);
    CHECK(back.name == "probe");
    CHECK(back.rows == 2);
    CHECK(back.cols == 2);
    CHECK(back.data == m.data);
    CHECK(back.meta.at("dim") == "2");
}

TEST_CASE("embedding cache: NaN rejected, file size matches format") {
    EmbeddingMatrix bad;
    bad.name = "bad";
    bad.rows = 1;
    bad.cols = 1;
    bad.data = {std::numeric_limits<float>::quiet_NaN()};
    auto p = (tmp_dir() / "bad.emb").string();
    CHECK_THROWS_AS(write_embedding(p, bad), std::invalid_argument);

    EmbeddingMatrix m;
    m.name = "sz";
    m.rows = 10;
    m.cols = 7;
    m.data.assign(70, 0.5f);
    auto p2 = (tmp_dir() / "sz.emb").string();
    write_embedding(p2, m);
    CHECK(fs::file_size(p2) == 16 + 10 * 7 * 4);
}

TEST_CASE("embedding cache: corrupt headers rejected") {
    auto p = (tmp_dir() / "corrupt.emb").string();
    std::ofstream(p, std::ios::binary) << "NOPE\x01\x00\x00\x00";
    CHECK_THROWS_AS(read_embedding(p), std::runtime_error);

    EmbeddingMatrix m;
    m.name = "t";
    m.rows = 4;
    m.cols = 4;
    m.data.assign(16, 1.0f);
    auto p2 = (tmp_dir() / "trunc.emb").string();
    write_embedding(p2, m);
    fs::resize_file(p2, 24);  // chop the payload
    CHECK_THROWS_AS(read_embedding(p2), std::runtime_error);
}

TEST_CASE("edge split file round trip") {
    Graph g = random_graph(30, 0.25, 77);
    REQUIRE(g.edges.size() >= 10);
    auto s = split_edges(g, {0.8, 0.1, 0.1}, 9);
    auto p = (tmp_dir() / "split.txt").string();
    write_edge_split(p, s);
    auto back = read_edge_split(p);
    CHECK(back.seed == s.seed);
    CHECK(back.train_edges == s.train_edges);
    CHECK(back.valid_edges == s.valid_edges);
    CHECK(back.test_edges == s.test_edges);
    CHECK(back.valid_neg == s.valid_neg);
    CHECK(back.test_neg == s.test_neg);
}

TEST_CASE("subgraph_with_edges keeps nodes and features") {
    Graph g = random_graph(12, 0.4, 3);
    REQUIRE(g.edges.size() >= 4);
    std::vector<Edge> kept(g.edges.begin(), g.edges.begin() + 3);
    Graph sub = subgraph_with_edges(g, kept);
    CHECK(sub.num_nodes == g.num_nodes);
    CHECK(sub.edges == kept);
    CHECK(sub.features.d == g.features.d);
}

TEST_CASE("Cora ingestion counts" * doctest::skip(!fs::exists("data/cora/features.tsv"))) {
    Graph g = load_graph("data/cora/features.tsv", "data/cora/edges.tsv", "data/cora/labels.tsv");
    CHECK(g.num_nodes == 2708);
    CHECK(g.feature_dim() == 1433);
    CHECK(*g.num_classes == 7);
}
