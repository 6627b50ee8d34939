#pragma once

#include "gigamae/config.hpp"

namespace gigamae {

Graph load_run_graph(const RunConfig& rc);

// Target embeddings in rc.targets order, computed on the given graph.
std::vector<EmbeddingMatrix> prepare_targets(const Graph& g, const RunConfig& rc);

// Cache layout: <dir>/<name>.emb (+ .meta carrying the config hash).
void write_targets_cache(const std::string& dir, const std::vector<EmbeddingMatrix>& targets,
                         const std::string& config_hash);
std::vector<EmbeddingMatrix> read_targets_cache(const std::string& dir,
                                                const std::vector<std::string>& names);

// Trains on g, writes <out_dir>/checkpoint/, <out_dir>/embeddings.emb and
// <out_dir>/train_log.tsv; returns the final full-graph embedding.
EmbeddingMatrix run_training(const Graph& g, const std::vector<EmbeddingMatrix>& targets,
                             const RunConfig& rc, const std::string& out_dir,
                             std::ostream* log_stream = nullptr);

// Formatted EvalReport: human-readable table plus a key=value block.
std::string format_report(const std::string& task, const std::vector<std::string>& metric_names,
                          const std::vector<MetricStat>& metrics,
                          const std::vector<uint64_t>& seeds, const std::string& config_hash,
                          const std::string& split_desc);

std::string eval_classify(const MatD& z, const Graph& g, const RunConfig& rc);
std::string eval_cluster(const MatD& z, const Graph& g, const RunConfig& rc);
std::string eval_link(const MatD& z, const EdgeSplit& split, const RunConfig& rc);

// End-to-end `run`: targets + training + evaluation for rc.task; reports are
// appended to <out_dir>/report.txt and returned.
std::string run_pipeline(const RunConfig& rc, std::ostream* log_stream = nullptr);

}  // namespace gigamae
