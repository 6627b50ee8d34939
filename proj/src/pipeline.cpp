#include "gigamae/pipeline.hpp"

#include "gigamae/checkpoint.hpp"
#include "gigamae/trainer.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fs = std::filesystem;

namespace gigamae {

Graph load_run_graph(const RunConfig& rc) {
    if (rc.features_path.empty() || rc.edges_path.empty())
        throw std::invalid_argument("config: data.features and data.edges are required");
    return load_graph(rc.features_path, rc.edges_path, rc.labels_path);
}

std::vector<EmbeddingMatrix> prepare_targets(const Graph& g, const RunConfig& rc) {
    std::vector<EmbeddingMatrix> out;
    for (const auto& name : rc.targets) {
        if (name == "node2vec")
            out.push_back(node2vec_embed(g, rc.node2vec));
        else if (name == "pca")
            out.push_back(pca_embed(g.features, rc.pca));
        else if (name == "gae")
            out.push_back(gae_embed(g, rc.gae));
        else
            throw std::invalid_argument("unknown target: " + name);
    }
    return out;
}

void write_targets_cache(const std::string& dir, const std::vector<EmbeddingMatrix>& targets,
                         const std::string& config_hash) {
    fs::create_directories(dir);
    for (auto t : targets) {
        t.meta["config_hash"] = config_hash;
        write_embedding((fs::path(dir) / (t.name + ".emb")).string(), t);
    }
}

std::vector<EmbeddingMatrix> read_targets_cache(const std::string& dir,
                                                const std::vector<std::string>& names) {
    std::vector<EmbeddingMatrix> out;
    for (const auto& name : names) {
        auto path = (fs::path(dir) / (name + ".emb")).string();
        if (!fs::exists(path))
            throw std::runtime_error("missing target cache: " + path +
                                     " (run the `targets` command first)");
        out.push_back(read_embedding(path));
    }
    return out;
}

namespace {

template <typename S>
EmbeddingMatrix run_training_impl(const Graph& g, const std::vector<MatD>& target_mats,
                                  const std::vector<int>& target_dims, const RunConfig& rc,
                                  const std::string& out_dir, std::ostream* log_stream) {
    std::ofstream log_file(fs::path(out_dir) / "train_log.tsv");
    log_file << "# config_hash = " << rc.config_hash << "\n";
    std::ostringstream tee;
    auto result = train_model<S>(g, target_mats, rc.train, &tee);
    log_file << tee.str();
    if (log_stream) *log_stream << tee.str();

    save_model((fs::path(out_dir) / "checkpoint").string(), result.model, target_dims,
               rc.train.heads, rc.config_hash);
    result.final_z.meta["config_hash"] = rc.config_hash;
    write_embedding((fs::path(out_dir) / "embeddings.emb").string(), result.final_z);
    return result.final_z;
}

}  // namespace

EmbeddingMatrix run_training(const Graph& g, const std::vector<EmbeddingMatrix>& targets,
                             const RunConfig& rc, const std::string& out_dir,
                             std::ostream* log_stream) {
    fs::create_directories(out_dir);
    std::vector<MatD> mats;
    std::vector<int> dims;
    for (const auto& t : targets) {
        mats.push_back(t.to_mat());
        dims.push_back(t.cols);
    }
    if (rc.train.single_precision)
        return run_training_impl<float>(g, mats, dims, rc, out_dir, log_stream);
    return run_training_impl<double>(g, mats, dims, rc, out_dir, log_stream);
}

std::string format_report(const std::string& task, const std::vector<std::string>& metric_names,
                          const std::vector<MetricStat>& metrics,
                          const std::vector<uint64_t>& seeds, const std::string& config_hash,
                          const std::string& split_desc) {
    std::ostringstream os;
    os << "== task: " << task << " ==\n";
    os << std::fixed << std::setprecision(6);
    for (size_t m = 0; m < metrics.size(); ++m)
        os << "  " << metric_names[m] << " = " << metrics[m].mean << " +/- " << metrics[m].stddev
           << "  (" << metrics[m].values.size() << " repeats)\n";
    os << "  split: " << split_desc << "\n";
    os << "[report]\n";
    os.unsetf(std::ios::fixed);
    os << std::setprecision(17);
    os << "task=" << task << "\n";
    for (size_t m = 0; m < metrics.size(); ++m) {
        os << "metric." << metric_names[m] << ".mean=" << metrics[m].mean << "\n";
        os << "metric." << metric_names[m] << ".std=" << metrics[m].stddev << "\n";
        for (size_t r = 0; r < metrics[m].values.size(); ++r)
            os << "metric." << metric_names[m] << ".value" << r << "=" << metrics[m].values[r]
               << "\n";
    }
    os << "seeds=";
    for (size_t s = 0; s < seeds.size(); ++s) os << (s ? " " : "") << seeds[s];
    os << "\nconfig_hash=" << config_hash << "\nsplit=" << split_desc << "\n";
    return os.str();
}

std::string eval_classify(const MatD& z, const Graph& g, const RunConfig& rc) {
    if (!g.labels || !g.num_classes)
        throw std::runtime_error("classify: the dataset has no labels");
    auto rep = linear_probe(z, *g.labels, *g.num_classes, rc.probe);
    return format_report("classify", {"accuracy"}, {rep.accuracy}, rep.split_seeds,
                         rc.config_hash, rep.split_desc);
}

std::string eval_cluster(const MatD& z, const Graph& g, const RunConfig& rc) {
    if (!g.labels || !g.num_classes)
        throw std::runtime_error("cluster: the dataset has no labels");
    auto rep = cluster_eval(z, *g.labels, *g.num_classes, rc.cluster_repeats, rc.train.seed);
    return format_report("cluster", {"nmi", "ari"}, {rep.nmi, rep.ari}, rep.seeds, rc.config_hash,
                         "k=" + std::to_string(*g.num_classes) + " x" +
                             std::to_string(rc.cluster_repeats));
}

std::string eval_link(const MatD& z, const EdgeSplit& split, const RunConfig& rc) {
    if (split.test_edges.empty()) throw std::runtime_error("link: empty test set");
    auto rep = link_eval(z, split.test_edges, split.test_neg);
    MetricStat auc = summarize({rep.auc}), ap = summarize({rep.ap});
    std::ostringstream sd;
    sd << rc.link_fractions[0] << "/" << rc.link_fractions[1] << "/" << rc.link_fractions[2]
       << " edge split, seed " << split.seed;
    return format_report("link", {"auc", "ap"}, {auc, ap}, {split.seed}, rc.config_hash, sd.str());
}

std::string run_pipeline(const RunConfig& rc, std::ostream* log_stream) {
    Graph g = load_run_graph(rc);
    fs::create_directories(rc.out_dir);
    std::string reports;

    bool want_classify = rc.task == "classify" || rc.task == "all";
    bool want_cluster = rc.task == "cluster" || rc.task == "all";
    bool want_link = rc.task == "link" || rc.task == "all";

    if (want_classify || want_cluster) {
        auto targets = prepare_targets(g, rc);
        write_targets_cache((fs::path(rc.out_dir) / "targets").string(), targets, rc.config_hash);
        auto emb = run_training(g, targets, rc, rc.out_dir, log_stream);
        MatD z = emb.to_mat();
        if (want_classify) reports += eval_classify(z, g, rc);
        if (want_cluster) reports += eval_cluster(z, g, rc);
    }
    if (want_link) {
        std::string link_dir = (fs::path(rc.out_dir) / "link").string();
        fs::create_directories(link_dir);
        auto split = split_edges(g, rc.link_fractions, rc.train.seed);
        write_edge_split((fs::path(link_dir) / "edge_split.txt").string(), split);
        Graph g_train = subgraph_with_edges(g, split.train_edges);
        auto targets = prepare_targets(g_train, rc);
        write_targets_cache((fs::path(link_dir) / "targets").string(), targets, rc.config_hash);
        auto emb = run_training(g_train, targets, rc, link_dir, log_stream);
        reports += eval_link(emb.to_mat(), split, rc);
    }

    std::ofstream rf(fs::path(rc.out_dir) / "report.txt", std::ios::app);
    rf << reports;
    return reports;
}

}  // namespace gigamae
