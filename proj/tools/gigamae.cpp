#include "gigamae/pipeline.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace gigamae;

namespace {

void apply_thread_cap() {
    if (const char* env = std::getenv("GIGAMAE_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) Eigen::setNbThreads(n);
    }
}

RunConfig load_config(const std::string& path) {
    return RunConfig::from_kv(KvConfig::parse_file(path));
}

int cmd_targets(const std::string& config_path) {
    RunConfig rc = load_config(config_path);
    Graph g = load_run_graph(rc);
    auto targets = prepare_targets(g, rc);
    write_targets_cache((fs::path(rc.out_dir) / "targets").string(), targets, rc.config_hash);
    std::cout << "wrote " << targets.size() << " target embeddings to " << rc.out_dir
              << "/targets\n";
    return 0;
}

int cmd_train(const std::string& config_path) {
    RunConfig rc = load_config(config_path);
    Graph g = load_run_graph(rc);
    auto targets = read_targets_cache((fs::path(rc.out_dir) / "targets").string(), rc.targets);
    run_training(g, targets, rc, rc.out_dir, &std::cout);
    std::cout << "wrote checkpoint and embeddings to " << rc.out_dir << "\n";
    return 0;
}

int cmd_eval(const std::string& config_path) {
    RunConfig rc = load_config(config_path);
    Graph g = load_run_graph(rc);
    std::string reports;
    if (rc.task == "classify" || rc.task == "cluster" || rc.task == "all") {
        auto path = (fs::path(rc.out_dir) / "embeddings.emb").string();
        if (!fs::exists(path))
            throw std::runtime_error("missing embeddings: " + path +
                                     " (run the `train` command first)");
        MatD z = read_embedding(path).to_mat();
        if (rc.task != "cluster") reports += eval_classify(z, g, rc);
        if (rc.task != "classify") reports += eval_cluster(z, g, rc);
    }
    if (rc.task == "link" || rc.task == "all") {
        auto emb_path = (fs::path(rc.out_dir) / "link" / "embeddings.emb").string();
        auto split_path = (fs::path(rc.out_dir) / "link" / "edge_split.txt").string();
        if (!fs::exists(emb_path) || !fs::exists(split_path))
            throw std::runtime_error("missing link artifacts under " + rc.out_dir +
                                     "/link (run the `run` command with task=link first)");
        MatD z = read_embedding(emb_path).to_mat();
        reports += eval_link(z, read_edge_split(split_path), rc);
    }
    std::ofstream rf(fs::path(rc.out_dir) / "report.txt", std::ios::app);
    rf << reports;
    std::cout << reports;
    return 0;
}

int cmd_run(const std::string& config_path) {
    RunConfig rc = load_config(config_path);
    std::cout << run_pipeline(rc);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap();
    CLI::App app{"gigamae: masked graph autoencoder with multi-target reconstruction"};
    app.require_subcommand(1);

    std::string config_path;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat key = value config file")->required();
    };
    auto* sc_targets = app.add_subcommand("targets", "compute and cache target embeddings");
    auto* sc_train = app.add_subcommand("train", "train from cached targets");
    auto* sc_eval = app.add_subcommand("eval", "evaluate stored embeddings");
    auto* sc_run = app.add_subcommand("run", "targets + train + eval end to end");
    for (auto* sc : {sc_targets, sc_train, sc_eval, sc_run}) add_config(sc);

    auto* sc_split = app.add_subcommand("split", "write an edge split file");
    std::string features, edges, labels, out = "edge_split.txt";
    double f_train = 0.85, f_valid = 0.05, f_test = 0.10;
    uint64_t seed = 0;
    sc_split->add_option("--features", features)->required();
    sc_split->add_option("--edges", edges)->required();
    sc_split->add_option("--labels", labels);
    sc_split->add_option("--out", out);
    sc_split->add_option("--train-frac", f_train);
    sc_split->add_option("--valid-frac", f_valid);
    sc_split->add_option("--test-frac", f_test);
    sc_split->add_option("--seed", seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sc_targets->parsed()) return cmd_targets(config_path);
        if (sc_train->parsed()) return cmd_train(config_path);
        if (sc_eval->parsed()) return cmd_eval(config_path);
        if (sc_run->parsed()) return cmd_run(config_path);
        if (sc_split->parsed()) {
            Graph g = load_graph(features, edges, labels);
            write_edge_split(out, split_edges(g, {f_train, f_valid, f_test}, seed));
            std::cout << "wrote " << out << "\n";
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
