#pragma once

#include "gigamae/eval.hpp"
#include "gigamae/targets.hpp"
#include "gigamae/trainer.hpp"

#include <map>

namespace gigamae {

// Flat `key = value` configuration (# comments, dotted keys).
struct KvConfig {
    std::map<std::string, std::string> entries;

    static KvConfig parse_string(const std::string& text, const std::string& origin = "<string>");
    static KvConfig parse_file(const std::string& path);

    bool has(const std::string& key) const { return entries.count(key) != 0; }
    std::string get_str(const std::string& key, const std::string& dflt) const;
    double get_double(const std::string& key, double dflt) const;
    int get_int(const std::string& key, int dflt) const;
    uint64_t get_u64(const std::string& key, uint64_t dflt) const;
    bool get_bool(const std::string& key, bool dflt) const;
    std::vector<double> get_doubles(const std::string& key, std::vector<double> dflt) const;

    // keys sorted, one `key = value` per line
    std::string canonical() const;
    // FNV-1a-64 of the canonical form, as 16 hex digits
    std::string hash() const;
};

// Full run configuration: masking, encoder, loss weights, target generators
// and evaluation settings, all overridable from a flat config file.
struct RunConfig {
    std::string features_path, edges_path, labels_path;
    std::string task = "all";  // classify | cluster | link | all
    std::string out_dir = "out";
    TrainConfig train;
    std::vector<std::string> targets{"node2vec", "pca"};  // order defines indices
    Node2vecConfig node2vec;
    PcaConfig pca;
    GaeConfig gae;
    LinearProbeConfig probe;
    int cluster_repeats = 10;
    std::array<double, 3> link_fractions{0.85, 0.05, 0.10};
    std::string config_hash;  // of the originating KvConfig

    static RunConfig from_kv(const KvConfig& kv);
};

}  // namespace gigamae
