#include "gigamae/graph.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

namespace gigamae {

namespace {

uint64_t edge_key(int i, int j) { return (uint64_t(uint32_t(i)) << 32) | uint32_t(j); }

[[noreturn]] void parse_error(const std::string& file, size_t line, const std::string& what) {
    throw std::runtime_error(file + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

bool Graph::has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    return std::binary_search(edges.begin(), edges.end(), Edge{i, j});
}

void Graph::validate() const {
    if (features.rows != num_nodes)
        throw std::runtime_error("graph: feature row count does not match num_nodes");
    for (auto [i, j] : edges) {
        if (i >= j) throw std::runtime_error("graph: edge list not canonical");
        if (i < 0 || j >= num_nodes) throw std::runtime_error("graph: node index out of range");
    }
    for (size_t k = 1; k < edges.size(); ++k)
        if (edges[k - 1] == edges[k]) throw std::runtime_error("graph: duplicate edge");
    if (labels) {
        if (int(labels->size()) != num_nodes) throw std::runtime_error("graph: label length mismatch");
        int nc = num_classes.value_or(0);
        for (int l : *labels)
            if (l < 0 || l >= nc) throw std::runtime_error("graph: label out of range");
    }
}

std::vector<Edge> canonicalize_edges(std::vector<Edge> edges, int num_nodes) {
    for (auto& [i, j] : edges) {
        if (i == j) throw std::runtime_error("edge list contains a self-loop");
        if (i < 0 || j < 0 || i >= num_nodes || j >= num_nodes)
            throw std::runtime_error("edge node index out of range");
        if (i > j) std::swap(i, j);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

Graph load_graph(const std::string& features_path, const std::string& edges_path,
                 const std::string& labels_path) {
    Graph g;

    std::ifstream ff(features_path);
    if (!ff) throw std::runtime_error("cannot open " + features_path);
    std::vector<std::vector<double>> rows;
    std::string line;
    size_t lineno = 0;
    int dim = -1;
    while (std::getline(ff, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) parse_error(features_path, lineno, "expected node_id TAB values");
        size_t id;
        try {
            id = std::stoul(line.substr(0, tab));
        } catch (...) {
            parse_error(features_path, lineno, "bad node id");
        }
        std::vector<double> vals;
        std::stringstream ss(line.substr(tab + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                size_t used;
                double v = std::stod(tok, &used);
                if (used != tok.size() && tok.find_first_not_of(" \r", used) != std::string::npos)
                    throw std::invalid_argument(tok);
                vals.push_back(v);
            } catch (...) {
                parse_error(features_path, lineno, "non-numeric feature value '" + tok + "'");
            }
        }
        if (dim < 0) dim = int(vals.size());
        if (int(vals.size()) != dim) parse_error(features_path, lineno, "ragged feature row");
        if (rows.size() <= id) rows.resize(id + 1);
        rows[id] = std::move(vals);
    }
    if (rows.empty()) throw std::runtime_error(features_path + ": no feature rows");
    g.num_nodes = int(rows.size());
    g.features = MatD(g.num_nodes, dim);
    for (int i = 0; i < g.num_nodes; ++i) {
        if (rows[i].empty() && dim > 0)
            throw std::runtime_error(features_path + ": missing features for node " + std::to_string(i));
        for (int j = 0; j < dim; ++j) g.features(i, j) = rows[i][j];
    }

    std::ifstream ef(edges_path);
    if (!ef) throw std::runtime_error("cannot open " + edges_path);
    std::vector<Edge> edges;
    lineno = 0;
    while (std::getline(ef, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        long a, b;
        if (!(ss >> a >> b)) parse_error(edges_path, lineno, "expected src TAB dst");
        if (a < 0 || b < 0 || a >= g.num_nodes || b >= g.num_nodes)
            parse_error(edges_path, lineno, "node index out of range");
        if (a == b) continue;  // drop self-loops at ingestion
        edges.emplace_back(int(a), int(b));
    }
    g.edges = canonicalize_edges(std::move(edges), g.num_nodes);

    if (!labels_path.empty()) {
        std::ifstream lf(labels_path);
        if (!lf) throw std::runtime_error("cannot open " + labels_path);
        std::vector<int> labels(g.num_nodes, -1);
        int max_label = -1;
        lineno = 0;
        while (std::getline(lf, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::stringstream ss(line);
            long id, lab;
            if (!(ss >> id >> lab)) parse_error(labels_path, lineno, "expected node_id TAB label");
            if (id < 0 || id >= g.num_nodes) parse_error(labels_path, lineno, "node index out of range");
            if (lab < 0) parse_error(labels_path, lineno, "negative label");
            labels[id] = int(lab);
            max_label = std::max(max_label, int(lab));
        }
        for (int i = 0; i < g.num_nodes; ++i)
            if (labels[i] < 0)
                throw std::runtime_error(labels_path + ": missing label for node " + std::to_string(i));
        g.labels = std::move(labels);
        g.num_classes = max_label + 1;
    }

    g.validate();
    return g;
}

EdgeSplit split_edges(const Graph& g, const std::array<double, 3>& fractions, uint64_t seed) {
    double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("split_edges: fractions must sum to 1");
    for (double f : fractions)
        if (f < 0) throw std::invalid_argument("split_edges: negative fraction");
    if (g.edges.size() < 10 && (fractions[1] > 0 || fractions[2] > 0))
        throw std::invalid_argument("split_edges: need at least 10 edges");

    size_t ne = g.edges.size();
    size_t n_valid = size_t(std::floor(fractions[1] * double(ne)));
    size_t n_test = size_t(std::floor(fractions[2] * double(ne)));

    std::vector<Edge> shuffled = g.edges;
    std::mt19937_64 rng(mix_seed(seed, 0));
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    EdgeSplit s;
    s.seed = seed;
    s.valid_edges.assign(shuffled.begin(), shuffled.begin() + n_valid);
    s.test_edges.assign(shuffled.begin() + n_valid, shuffled.begin() + n_valid + n_test);
    s.train_edges.assign(shuffled.begin() + n_valid + n_test, shuffled.end());
    s.valid_neg = sample_negative_edges(g, n_valid, mix_seed(seed, 1));
    s.test_neg = sample_negative_edges(g, n_test, mix_seed(seed, 2), s.valid_neg);
    return s;
}

std::vector<Edge> sample_negative_edges(const Graph& g, size_t n, uint64_t seed,
                                        const std::vector<Edge>& exclude) {
    if (n == 0) return {};
    std::unordered_set<uint64_t> taken;
    for (auto [i, j] : g.edges) taken.insert(edge_key(i, j));
    for (auto [i, j] : exclude) {
        if (i > j) std::swap(i, j);
        taken.insert(edge_key(i, j));
    }
    size_t total_pairs = size_t(g.num_nodes) * (g.num_nodes - 1) / 2;
    if (taken.size() > total_pairs || n > total_pairs - taken.size())
        throw std::invalid_argument("sample_negative_edges: not enough non-edges");

    std::mt19937_64 rng(seed);
    std::vector<Edge> out;
    out.reserve(n);
    size_t available = total_pairs - taken.size();
    if (n * 2 >= available) {
        // dense case: enumerate all candidate non-edges and shuffle
        std::vector<Edge> cand;
        cand.reserve(available);
        for (int i = 0; i < g.num_nodes; ++i)
            for (int j = i + 1; j < g.num_nodes; ++j)
                if (!taken.count(edge_key(i, j))) cand.emplace_back(i, j);
        std::shuffle(cand.begin(), cand.end(), rng);
        out.assign(cand.begin(), cand.begin() + n);
    } else {
        std::uniform_int_distribution<int> pick(0, g.num_nodes - 1);
        while (out.size() < n) {
            int i = pick(rng), j = pick(rng);
            if (i == j) continue;
            if (i > j) std::swap(i, j);
            if (taken.insert(edge_key(i, j)).second) out.emplace_back(i, j);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Graph subgraph_with_edges(const Graph& g, std::vector<Edge> edges) {
    Graph out = g;
    out.edges = canonicalize_edges(std::move(edges), g.num_nodes);
    return out;
}

namespace {

void write_edge_section(std::ofstream& f, const char* name, const std::vector<Edge>& edges) {
    f << "[" << name << "]\n";
    for (auto [i, j] : edges) f << i << " " << j << "\n";
}

}  // namespace

void write_edge_split(const std::string& path, const EdgeSplit& s) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "# gigamae edge split v1\n";
    f << "seed = " << s.seed << "\n";
    write_edge_section(f, "train", s.train_edges);
    write_edge_section(f, "valid", s.valid_edges);
    write_edge_section(f, "test", s.test_edges);
    write_edge_section(f, "valid_neg", s.valid_neg);
    write_edge_section(f, "test_neg", s.test_neg);
}

EdgeSplit read_edge_split(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    EdgeSplit s;
    std::vector<Edge>* cur = nullptr;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("seed", 0) == 0) {
            s.seed = std::stoull(line.substr(line.find('=') + 1));
        } else if (line[0] == '[') {
            std::string name = line.substr(1, line.find(']') - 1);
            if (name == "train") cur = &s.train_edges;
            else if (name == "valid") cur = &s.valid_edges;
            else if (name == "test") cur = &s.test_edges;
            else if (name == "valid_neg") cur = &s.valid_neg;
            else if (name == "test_neg") cur = &s.test_neg;
            else throw std::runtime_error(path + ": unknown section " + name);
        } else {
            if (!cur) throw std::runtime_error(path + ": edge line outside a section");
            std::stringstream ss(line);
            int a, b;
            if (!(ss >> a >> b)) throw std::runtime_error(path + ": bad edge line");
            cur->emplace_back(a, b);
        }
    }
    return s;
}

}  // namespace gigamae
