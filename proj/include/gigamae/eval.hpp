#pragma once

#include "gigamae/graph.hpp"

namespace gigamae {

struct MetricStat {
    double mean = 0.0;
    double stddev = 0.0;            // population std over repeats
    std::vector<double> values;     // one per repeat
};

MetricStat summarize(const std::vector<double>& values);

// ---- node classification: multinomial logistic probe ----

struct LinearProbeConfig {
    double train_frac = 0.1;
    double valid_frac = 0.1;        // remainder is test
    int repeats = 10;
    uint64_t seed = 0;
    std::vector<double> l2_grid{1e-3, 1e-2, 1e-1, 1.0, 10.0};
    int max_iters = 5000;
    double grad_tol = 1e-6;
};

struct ClassifyReport {
    MetricStat accuracy;
    std::vector<uint64_t> split_seeds;  // one per repeat
    std::vector<double> chosen_l2;      // validation-selected, one per repeat
    std::string config_hash;
    std::string split_desc;
};

ClassifyReport linear_probe(const MatD& emb, const std::vector<int>& labels, int num_classes,
                            const LinearProbeConfig& cfg);

// Fit + accuracy on explicit index sets; exposed for tests.
double probe_accuracy(const MatD& emb, const std::vector<int>& labels, int num_classes,
                      const std::vector<int>& train_idx, const std::vector<int>& test_idx,
                      double l2, int max_iters, double grad_tol);

// ---- clustering ----

struct KmeansResult {
    std::vector<int> assign;
    MatD centers;
    double inertia = 0.0;
    int iters = 0;
};

// k-means++ seeding then Lloyd iterations; empty clusters are reseeded from
// the point farthest from its center. Deterministic per seed.
KmeansResult kmeans_cluster(const MatD& x, int k, uint64_t seed, int max_iters = 300);

// Normalized mutual information, I / sqrt(H(a) H(b)); 0 when either side has
// zero entropy.
double nmi_score(const std::vector<int>& a, const std::vector<int>& b);

double ari_score(const std::vector<int>& a, const std::vector<int>& b);

struct ClusterReport {
    MetricStat nmi, ari;
    std::vector<uint64_t> seeds;
    std::string config_hash;
};

ClusterReport cluster_eval(const MatD& emb, const std::vector<int>& labels, int k, int repeats,
                           uint64_t seed);

// ---- link prediction ----

// ROC-AUC of positives vs negatives; ties count 1/2.
double auc_score(const std::vector<double>& pos, const std::vector<double>& neg);

// Average precision with step interpolation (precision at each positive hit).
double ap_score(const std::vector<double>& pos, const std::vector<double>& neg);

struct LinkReport {
    double auc = 0.0;
    double ap = 0.0;
    std::string config_hash;
};

// Scores pairs by embedding inner product.
LinkReport link_eval(const MatD& emb, const std::vector<Edge>& pos, const std::vector<Edge>& neg);

// ---- naive multi-embedding integration baselines ----

enum class Integration { Concat, Avg, Max };

Integration parse_integration(const std::string& name);

// Concat keeps every column; avg/max zero-pad narrower inputs on the right
// before pooling elementwise.
MatD naive_integration(const std::vector<MatD>& embs, Integration mode);

}  // namespace gigamae
