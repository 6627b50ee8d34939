#include "gigamae/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace gigamae {

namespace {

std::string trim(std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    auto e = s.find_last_not_of(" \t\r");
    s.erase(e == std::string::npos ? 0 : e + 1);
    return s;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    return std::all_of(k.begin(), k.end(), [](char c) {
        return std::isalnum(uint8_t(c)) || c == '_' || c == '.';
    });
}

}  // namespace

KvConfig KvConfig::parse_string(const std::string& text, const std::string& origin) {
    KvConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        auto where = origin + ":" + std::to_string(lineno) + ": ";
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(where + "expected `key = value`, got: " + line);
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (!valid_key(key)) throw std::invalid_argument(where + "invalid key: " + key);
        if (cfg.entries.count(key)) throw std::invalid_argument(where + "duplicate key: " + key);
        cfg.entries[key] = val;
    }
    return cfg;
}

KvConfig KvConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

std::string KvConfig::get_str(const std::string& key, const std::string& dflt) const {
    auto it = entries.find(key);
    return it == entries.end() ? dflt : it->second;
}

double KvConfig::get_double(const std::string& key, double dflt) const {
    auto it = entries.find(key);
    if (it == entries.end()) return dflt;
    size_t pos = 0;
    double v;
    try {
        v = std::stod(it->second, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: " + key + " is not a number: " + it->second);
    }
    if (pos != it->second.size())
        throw std::invalid_argument("config: " + key + " is not a number: " + it->second);
    return v;
}

int KvConfig::get_int(const std::string& key, int dflt) const {
    double v = get_double(key, double(dflt));
    int iv = int(v);
    if (double(iv) != v) throw std::invalid_argument("config: " + key + " must be an integer");
    return iv;
}

uint64_t KvConfig::get_u64(const std::string& key, uint64_t dflt) const {
    auto it = entries.find(key);
    if (it == entries.end()) return dflt;
    try {
        size_t pos = 0;
        uint64_t v = std::stoull(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: " + key + " must be a non-negative integer");
    }
}

bool KvConfig::get_bool(const std::string& key, bool dflt) const {
    auto it = entries.find(key);
    if (it == entries.end()) return dflt;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::invalid_argument("config: " + key + " must be true/false");
}

std::vector<double> KvConfig::get_doubles(const std::string& key,
                                          std::vector<double> dflt) const {
    auto it = entries.find(key);
    if (it == entries.end()) return dflt;
    std::string s = it->second;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw std::invalid_argument("config: " + key + " must be a list of numbers");
    if (out.empty()) throw std::invalid_argument("config: " + key + " is empty");
    return out;
}

std::string KvConfig::canonical() const {
    std::ostringstream os;  // std::map iterates in key order
    for (const auto& [k, v] : entries) os << k << " = " << v << "\n";
    return os.str();
}

std::string KvConfig::hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

RunConfig RunConfig::from_kv(const KvConfig& kv) {
    static const std::set<std::string> known{
        "data.features", "data.edges", "data.labels", "task", "out_dir",
        "seed", "epochs", "learning_rate", "weight_decay", "hidden_dim", "out_dim", "heads",
        "mask.edge_ratio", "mask.feature_ratio", "tau", "precision", "negatives_all_nodes",
        "weights.e", "weights.f", "weights.b", "targets",
        "node2vec.dim", "node2vec.walk_length", "node2vec.context_size", "node2vec.walks_per_node",
        "node2vec.epochs", "node2vec.p", "node2vec.q", "node2vec.negatives_per_positive",
        "node2vec.learning_rate",
        "pca.ratio", "pca.center",
        "gae.hidden_dim", "gae.out_dim", "gae.epochs", "gae.learning_rate",
        "probe.train_frac", "probe.valid_frac", "probe.repeats",
        "cluster.repeats",
        "link.train_frac", "link.valid_frac", "link.test_frac"};
    for (const auto& [k, v] : kv.entries)
        if (!known.count(k)) throw std::invalid_argument("config: unknown key: " + k);

    RunConfig rc;
    rc.config_hash = kv.hash();
    rc.features_path = kv.get_str("data.features", "");
    rc.edges_path = kv.get_str("data.edges", "");
    rc.labels_path = kv.get_str("data.labels", "");
    rc.task = kv.get_str("task", rc.task);
    if (rc.task != "classify" && rc.task != "cluster" && rc.task != "link" && rc.task != "all")
        throw std::invalid_argument("config: task must be classify, cluster, link or all");
    rc.out_dir = kv.get_str("out_dir", rc.out_dir);
    auto& t = rc.train;
    t.seed = kv.get_u64("seed", 0);
    t.epochs = kv.get_int("epochs", t.epochs);
    t.learning_rate = kv.get_double("learning_rate", t.learning_rate);
    t.weight_decay = kv.get_double("weight_decay", t.weight_decay);
    t.hidden_dim = kv.get_int("hidden_dim", t.hidden_dim);
    t.out_dim = kv.get_int("out_dim", t.out_dim);
    t.heads = kv.get_int("heads", t.heads);
    t.mask_edge_ratio = kv.get_double("mask.edge_ratio", t.mask_edge_ratio);
    t.mask_feature_ratio = kv.get_double("mask.feature_ratio", t.mask_feature_ratio);
    t.tau = kv.get_double("tau", t.tau);
    t.negatives_all_nodes = kv.get_bool("negatives_all_nodes", false);
    std::string prec = kv.get_str("precision", "f64");
    if (prec != "f64" && prec != "f32")
        throw std::invalid_argument("config: precision must be f32 or f64");
    t.single_precision = prec == "f32";

    {
        std::string s = kv.get_str("targets", "node2vec pca");
        std::replace(s.begin(), s.end(), ',', ' ');
        std::istringstream in(s);
        rc.targets.clear();
        std::string tok;
        while (in >> tok) {
            if (tok != "node2vec" && tok != "pca" && tok != "gae")
                throw std::invalid_argument("config: unknown target: " + tok);
            rc.targets.push_back(tok);
        }
        if (rc.targets.empty()) throw std::invalid_argument("config: targets is empty");
    }
    size_t num_subsets = (size_t(1) << rc.targets.size()) - 1;
    if (num_subsets == 3 || kv.has("weights.e")) {
        t.class_weights.e = kv.get_doubles("weights.e", t.class_weights.e);
        t.class_weights.f = kv.get_doubles("weights.f", t.class_weights.f);
        t.class_weights.b = kv.get_doubles("weights.b", t.class_weights.b);
    } else {
        // no sensible default beyond the two-target case
        t.class_weights.e.assign(num_subsets, 1.0);
        t.class_weights.f.assign(num_subsets, 1.0);
        t.class_weights.b.assign(num_subsets, 1.0);
    }
    t.class_weights.validate(num_subsets);

    auto& nv = rc.node2vec;
    nv.dim = kv.get_int("node2vec.dim", nv.dim);
    nv.walk_length = kv.get_int("node2vec.walk_length", nv.walk_length);
    nv.context_size = kv.get_int("node2vec.context_size", nv.context_size);
    nv.walks_per_node = kv.get_int("node2vec.walks_per_node", nv.walks_per_node);
    nv.epochs = kv.get_int("node2vec.epochs", nv.epochs);
    nv.p = kv.get_double("node2vec.p", nv.p);
    nv.q = kv.get_double("node2vec.q", nv.q);
    nv.negatives_per_positive =
        kv.get_int("node2vec.negatives_per_positive", nv.negatives_per_positive);
    nv.learning_rate = kv.get_double("node2vec.learning_rate", nv.learning_rate);
    nv.seed = t.seed;

    rc.pca.ratio = kv.get_double("pca.ratio", rc.pca.ratio);
    rc.pca.center = kv.get_bool("pca.center", rc.pca.center);

    auto& ga = rc.gae;
    ga.hidden_dim = kv.get_int("gae.hidden_dim", ga.hidden_dim);
    ga.out_dim = kv.get_int("gae.out_dim", ga.out_dim);
    ga.epochs = kv.get_int("gae.epochs", ga.epochs);
    ga.learning_rate = kv.get_double("gae.learning_rate", ga.learning_rate);
    ga.seed = t.seed;

    rc.probe.train_frac = kv.get_double("probe.train_frac", rc.probe.train_frac);
    rc.probe.valid_frac = kv.get_double("probe.valid_frac", rc.probe.valid_frac);
    rc.probe.repeats = kv.get_int("probe.repeats", rc.probe.repeats);
    rc.probe.seed = t.seed;
    rc.cluster_repeats = kv.get_int("cluster.repeats", rc.cluster_repeats);

    rc.link_fractions = {kv.get_double("link.train_frac", rc.link_fractions[0]),
                         kv.get_double("link.valid_frac", rc.link_fractions[1]),
                         kv.get_double("link.test_frac", rc.link_fractions[2])};
    return rc;
}

}  // namespace gigamae
